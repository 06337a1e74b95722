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

#include <cmath>
#include <vector>

#include "csrip/nn/layers.hpp"

namespace csrip {

/// Adam with bias correction. Moment buffers are indexed by registration
/// order, which must stay stable across save/load (it does: networks collect
/// parameters in construction order).
class Adam {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit Adam(std::vector<Parameter*> params) : params_(std::move(params)) {
        for (Parameter* p : params_) {
            m_.push_back(Tensor::zeros_like(p->value));
            v_.push_back(Tensor::zeros_like(p->value));
        }
    }

    void zero_grad() {
        for (Parameter* p : params_) p->grad.fill(0.0);
    }

    void step(double lr) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            Parameter& p = *params_[i];
            double* m = m_[i].data();
            double* v = v_[i].data();
            const double* g = p.grad.data();
            double* w = p.value.data();
            for (int64_t j = 0; j < p.value.numel(); ++j) {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                w[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
            }
        }
    }

    int64_t step_count() const { return t_; }
    void set_step_count(int64_t t) { t_ = t; }

    const std::vector<Parameter*>& params() const { return params_; }
    std::vector<Tensor>& moment1() { return m_; }
    std::vector<Tensor>& moment2() { return v_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Tensor> m_, v_;
    int64_t t_ = 0;
};

}  // namespace csrip
