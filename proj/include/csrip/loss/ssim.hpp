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

#include "csrip/core/gaussian.hpp"
#include "csrip/nn/ops.hpp"

namespace csrip {

// Structural-similarity loss. Local statistics come from channelwise
// convolution with an 11x11 Gaussian (sigma 1.5); the map is evaluated on the
// valid region only (5-pixel border cropped), per channel, and the loss is
// 0.5 * (1 - mean). Stabilizers follow the reference implementation at
// dynamic range 255: C1 = (0.01*255)^2, C2 = (0.03*255)^2.

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 6.5025;
inline constexpr double kSsimC2 = 58.5225;

inline const std::vector<double>& ssim_window_taps() {
    static const std::vector<double> taps = gaussian_taps_1d(kSsimWindow, kSsimSigma);
    return taps;
}

namespace detail {

inline void require_ssim_pair(const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "ssim");
    int nd = x.ndim();
    if (nd != 3 && nd != 4) fail_arg("ssim expects (C,H,W) or (N,C,H,W), got " + x.shape_str());
    int h = x.dim(nd - 2), w = x.dim(nd - 1);
    if (h < kSsimWindow || w < kSsimWindow)
        fail_arg("ssim needs images of at least " + std::to_string(kSsimWindow) + "px, got " +
                 x.shape_str());
}

}  // namespace detail

/// Differentiable similarity map over the valid region. Symmetric in its
/// arguments; values lie in [-1, 1].
inline Var ssim_map_op(Tape& tape, Var x, Var y) {
    detail::require_ssim_pair(x.value(), y.value());
    const auto& taps = ssim_window_taps();
    Var mu1 = gaussian_blur_valid(tape, x, taps);
    Var mu2 = gaussian_blur_valid(tape, y, taps);
    Var ex2 = gaussian_blur_valid(tape, mul(tape, x, x), taps);
    Var ey2 = gaussian_blur_valid(tape, mul(tape, y, y), taps);
    Var exy = gaussian_blur_valid(tape, mul(tape, x, y), taps);
    Var mu11 = mul(tape, mu1, mu1);
    Var mu22 = mul(tape, mu2, mu2);
    Var mu12 = mul(tape, mu1, mu2);
    Var var1 = sub(tape, ex2, mu11);
    Var var2 = sub(tape, ey2, mu22);
    Var cov = sub(tape, exy, mu12);
    Var num = mul(tape, add_const(tape, mul_const(tape, mu12, 2.0), kSsimC1),
                  add_const(tape, mul_const(tape, cov, 2.0), kSsimC2));
    Var den = mul(tape, add_const(tape, add(tape, mu11, mu22), kSsimC1),
                  add_const(tape, add(tape, var1, var2), kSsimC2));
    return divide(tape, num, den);
}

/// 0.5 * (1 - mean of the similarity map). Zero iff the images agree on the
/// valid region; always within [0, 1] for inputs in [0, 255].
inline Var ssim_loss_op(Tape& tape, Var x, Var y) {
    Var m = mean_all(tape, ssim_map_op(tape, x, y));
    return mul_const(tape, add_const(tape, mul_const(tape, m, -1.0), 1.0), 0.5);
}

inline Var mse_loss_op(Tape& tape, Var x, Var y) {
    require_same_shape(x.value(), y.value(), "mse_loss");
    Var d = sub(tape, y, x);
    return mean_all(tape, mul(tape, d, d));
}

inline Var mae_loss_op(Tape& tape, Var x, Var y) {
    require_same_shape(x.value(), y.value(), "mae_loss");
    return mean_all(tape, abs_value(tape, sub(tape, y, x)));
}

/// Non-differentiable similarity map of one image pair.
struct SimilarityMap {
    Tensor data;     // (3, H-10, W-10)
    int border = kSsimWindow / 2;
};

inline SimilarityMap ssim_map(const Tensor& x, const Tensor& y) {
    Tape tape;
    Var m = ssim_map_op(tape, tape.leaf(x), tape.leaf(y));
    return SimilarityMap{m.value()};
}

inline double ssim_loss(const Tensor& x, const Tensor& y) {
    Tape tape;
    return ssim_loss_op(tape, tape.leaf(x), tape.leaf(y)).value()[0];
}

inline double mse_loss(const Tensor& x, const Tensor& y) {
    Tape tape;
    return mse_loss_op(tape, tape.leaf(x), tape.leaf(y)).value()[0];
}

inline double mae_loss(const Tensor& x, const Tensor& y) {
    Tape tape;
    return mae_loss_op(tape, tape.leaf(x), tape.leaf(y)).value()[0];
}

}  // namespace csrip
