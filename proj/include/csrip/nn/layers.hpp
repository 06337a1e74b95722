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
#include <string>
#include <utility>
#include <vector>

#include "csrip/core/rng.hpp"
#include "csrip/nn/ops.hpp"

namespace csrip {

/// Learnable tensor with its accumulated gradient. Values persist across
/// steps; each forward pass binds them onto the step's tape.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    void init_shape(std::string n, std::vector<int> shape) {
        name = std::move(n);
        value = Tensor(shape);
        grad = Tensor(std::move(shape));
    }
};

/// Per-step forward context: binds parameters as tape leaves and harvests
/// their gradients after backward. `train_params` controls whether the bound
/// leaves require gradients (frozen networks bind with false);
/// `batch_stats` selects batch-statistics mode for all batch norms.
struct FwdCtx {
    Tape& tape;
    bool train_params = false;
    bool batch_stats = false;

    explicit FwdCtx(Tape& t, bool train = false, bool batch = false)
        : tape(t), train_params(train), batch_stats(batch) {}

    Var bind(Parameter& p) {
        Var v = tape.leaf(p.value, train_params);
        if (train_params) bound_.emplace_back(&p, v.node());
        return v;
    }

    /// Adds each bound leaf's gradient into its parameter's grad buffer.
    void harvest_grads() {
        for (auto& [param, node] : bound_) {
            const double* s = node->grad.data();
            double* d = param->grad.data();
            for (int64_t i = 0; i < param->grad.numel(); ++i) d[i] += s[i];
        }
        bound_.clear();
    }

private:
    std::vector<std::pair<Parameter*, TapeNode*>> bound_;
};

/// Stride-1 same-padded convolution layer.
struct Conv2d {
    int in_ch = 0, out_ch = 0, ksize = 0;
    Parameter weight, bias;

    void build(const std::string& name, int in, int out, int k, Rng& rng) {
        in_ch = in;
        out_ch = out;
        ksize = k;
        weight.init_shape(name + ".w", {out, in, k, k});
        bias.init_shape(name + ".b", {out});
        // fan-in scaled normal init
        double stddev = std::sqrt(2.0 / (static_cast<double>(in) * k * k));
        for (int64_t i = 0; i < weight.value.numel(); ++i)
            weight.value[i] = rng.normal(0.0, stddev);
    }

    Var forward(FwdCtx& ctx, Var x) const {
        return conv2d(ctx.tape, x, ctx.bind(const_cast<Parameter&>(weight)),
                      ctx.bind(const_cast<Parameter&>(bias)));
    }

    void collect(std::vector<Parameter*>& out) {
        out.push_back(&weight);
        out.push_back(&bias);
    }

    int64_t param_count() const { return weight.value.numel() + bias.value.numel(); }
};

/// Batch norm layer; scale/shift learnable, running statistics plain state.
struct BatchNorm2d {
    int channels = 0;
    double eps = 1e-5;
    double momentum = 0.9;
    Parameter gamma, beta;
    Tensor running_mean, running_var;

    void build(const std::string& name, int c, double eps_ = 1e-5, double momentum_ = 0.9) {
        channels = c;
        eps = eps_;
        momentum = momentum_;
        gamma.init_shape(name + ".gamma", {c});
        beta.init_shape(name + ".beta", {c});
        gamma.value.fill(1.0);
        running_mean = Tensor({c});
        running_var = Tensor({c}, 1.0);
    }

    Var forward(FwdCtx& ctx, Var x) {
        return batch_norm(ctx.tape, x, ctx.bind(gamma), ctx.bind(beta), running_mean,
                          running_var, ctx.batch_stats, ctx.batch_stats, eps, momentum);
    }

    void collect(std::vector<Parameter*>& out) {
        out.push_back(&gamma);
        out.push_back(&beta);
    }

    int64_t param_count() const { return 2 * channels; }
};

/// Two conv-norm-activation sub-blocks with a post-activation identity sum:
///   y = lrelu(x + bn2(conv2(lrelu(bn1(conv1(x))))))
/// conv1 maps channels -> filters and conv2 maps back, so `filters` may
/// differ from the block's channel count while the skip stays an identity.
struct ResidualBlock {
    int channels = 0, filters = 0;
    double slope = 0.2;
    Conv2d conv1, conv2;
    BatchNorm2d bn1, bn2;

    void build(const std::string& name, int ch, int filt, int k, double lrelu_slope, Rng& rng) {
        channels = ch;
        filters = filt;
        slope = lrelu_slope;
        conv1.build(name + ".conv1", ch, filt, k, rng);
        bn1.build(name + ".bn1", filt);
        conv2.build(name + ".conv2", filt, ch, k, rng);
        bn2.build(name + ".bn2", ch);
    }

    Var forward(FwdCtx& ctx, Var x) {
        if (x.value().dim(1) != channels)
            fail_arg("residual block expects " + std::to_string(channels) + " channels, got " +
                     std::to_string(x.value().dim(1)));
        Var t = leaky_relu(ctx.tape, bn1.forward(ctx, conv1.forward(ctx, x)), slope);
        t = bn2.forward(ctx, conv2.forward(ctx, t));
        return leaky_relu(ctx.tape, add(ctx.tape, x, t), slope);
    }

    void collect(std::vector<Parameter*>& out) {
        conv1.collect(out);
        bn1.collect(out);
        conv2.collect(out);
        bn2.collect(out);
    }

    int64_t param_count() const {
        return conv1.param_count() + bn1.param_count() + conv2.param_count() + bn2.param_count();
    }
};

}  // namespace csrip
