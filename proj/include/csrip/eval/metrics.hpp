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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "csrip/loss/ssim.hpp"

namespace csrip {

/// Peak signal-to-noise ratio over all three channels jointly (one MSE over
/// 3*H*W values). Identical images return the +infinity sentinel; callers
/// exclude those from averages and report their count.
inline double psnr(const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "psnr");
    double mse = 0.0;
    for (int64_t i = 0; i < x.numel(); ++i) {
        double d = x[i] - y[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// Mean similarity over the valid region and channels; algebraically tied to
/// the loss as score = 1 - 2 * loss.
inline double ssim_score(const Tensor& x, const Tensor& y) {
    return 1.0 - 2.0 * ssim_loss(x, y);
}

/// Empirical cumulative distribution of per-image scores, one point per
/// distinct value. Curves further right are better.
struct CSDCurve {
    std::vector<std::pair<double, double>> points;  // (threshold, fraction <=)
    std::string metric;                             // "psnr" | "ssim"
};

inline CSDCurve csd_curve(std::vector<double> scores, std::string metric = "") {
    if (scores.empty()) fail_arg("csd_curve on an empty score list");
    std::sort(scores.begin(), scores.end());
    CSDCurve curve;
    curve.metric = std::move(metric);
    size_t n = scores.size();
    for (size_t i = 0; i < n; ++i) {
        if (i + 1 < n && scores[i + 1] == scores[i]) continue;  // keep last of a run
        curve.points.emplace_back(scores[i],
                                  static_cast<double>(i + 1) / static_cast<double>(n));
    }
    return curve;
}

}  // namespace csrip
