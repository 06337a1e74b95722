// Copyright (c) 2026 CSRIP Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "csrip/core/common.hpp"

namespace csrip {

/// Optimization schedule for one training stage. Decay points are epoch
/// indices (1-based); the decay applies at the end of the named epoch, so
/// lr_for_epoch(e) already reflects every decay before e.
struct Schedule {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 8;
    double initial_lr = 1e-4;
    double decay_factor = 1.0 / 3.0;

    enum class Decay { periodic, milestones };
    Decay policy = Decay::periodic;
    int decay_every = 20;          // periodic
    std::vector<int> milestones;   // milestone epochs, ascending (duplicates stack)

    int max_epochs = 100;
    int patience = 10;

    /// Learning rate used during epoch `epoch` (1-based). Computed by
    /// repeated multiplication so each decay is exactly previous * factor.
    double lr_for_epoch(int epoch) const {
        if (epoch < 1) fail_arg("epochs are 1-based");
        int decays = 0;
        if (policy == Decay::periodic) {
            decays = (epoch - 1) / std::max(1, decay_every);
        } else {
            for (int m : milestones)
                if (m < epoch) ++decays;
        }
        double lr = initial_lr;
        for (int i = 0; i < decays; ++i) lr *= decay_factor;
        return lr;
    }
};

namespace detail {

// Decay epochs assume a 100-epoch budget; rescale them proportionally when
// the budget is overridden (each point at least epoch 1).
inline int scale_epoch(int epoch, int max_epochs) {
    if (max_epochs == 100) return epoch;
    double scaled = static_cast<double>(epoch) * max_epochs / 100.0;
    return std::max(1, static_cast<int>(std::lround(scaled)));
}

}  // namespace detail

/// Recognition-model stage: batch 128, lr 1e-4, x1/3 every 20 epochs,
/// patience 10.
inline Schedule stage1_schedule(int max_epochs = 100, int batch_size = 128) {
    Schedule s;
    s.batch_size = batch_size;
    s.initial_lr = 1e-4;
    s.policy = Schedule::Decay::periodic;
    s.decay_every = detail::scale_epoch(20, max_epochs);
    s.max_epochs = max_epochs;
    s.patience = 10;
    return s;
}

/// Generator stage: batch 8, lr (10/3)e-3, x1/3 at the end of epochs
/// 10, 25, 50 and 80, patience 10.
inline Schedule stage2_schedule(int max_epochs = 100, int batch_size = 8) {
    Schedule s;
    s.batch_size = batch_size;
    s.initial_lr = (10.0 / 3.0) * 1e-3;
    s.policy = Schedule::Decay::milestones;
    for (int m : {10, 25, 50, 80}) s.milestones.push_back(detail::scale_epoch(m, max_epochs));
    s.max_epochs = max_epochs;
    s.patience = 10;
    return s;
}

}  // namespace csrip
