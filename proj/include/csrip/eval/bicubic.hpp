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

#include "csrip/data/image.hpp"

namespace csrip {

namespace detail {

// Keys cubic kernel, a = -0.5. Reproduces polynomials up to degree one, so
// ramps pass through the interior exactly.
inline double cubic_weight(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

// One axis of the separable pass, pixel-center aligned: source position of
// output i is (i + 0.5) / f - 0.5. Reflect-101 indexing at the borders.
inline void bicubic_axis(const double* src, double* dst, int rows, int n, int f) {
    int on = n * f;
    std::vector<int> idx(static_cast<size_t>(on) * 4);
    std::vector<double> wgt(static_cast<size_t>(on) * 4);
    for (int i = 0; i < on; ++i) {
        double s = (i + 0.5) / f - 0.5;
        int base = static_cast<int>(std::floor(s));
        double frac = s - base;
        for (int k = 0; k < 4; ++k) {
            int si = base - 1 + k;
            if (si < 0) si = -si;
            if (si >= n) si = 2 * n - 2 - si;
            idx[static_cast<size_t>(i) * 4 + k] = si;
            wgt[static_cast<size_t>(i) * 4 + k] = cubic_weight(frac + 1.0 - k);
        }
    }
    for (int r = 0; r < rows; ++r) {
        const double* s = src + static_cast<int64_t>(r) * n;
        double* d = dst + static_cast<int64_t>(r) * on;
        for (int i = 0; i < on; ++i) {
            const int* ix = &idx[static_cast<size_t>(i) * 4];
            const double* w = &wgt[static_cast<size_t>(i) * 4];
            d[i] = w[0] * s[ix[0]] + w[1] * s[ix[1]] + w[2] * s[ix[2]] + w[3] * s[ix[3]];
        }
    }
}

}  // namespace detail

/// Separable bicubic upscaling by 2, 4 or 8, clipped to [0, 255].
inline Tensor bicubic_upscale(const Tensor& img, int factor) {
    require_image(img, "bicubic_upscale");
    if (factor != 2 && factor != 4 && factor != 8)
        fail_arg("bicubic factor must be 2, 4 or 8, got " + std::to_string(factor));
    int h = img.dim(1), w = img.dim(2);
    int oh = h * factor, ow = w * factor;
    Tensor wide({3, h, ow});
    for (int c = 0; c < 3; ++c)
        detail::bicubic_axis(img.data() + static_cast<int64_t>(c) * h * w,
                             wide.data() + static_cast<int64_t>(c) * h * ow, h, w, factor);
    // second pass runs on the transposed view
    Tensor tr({3, ow, h});
    Tensor trout({3, ow, oh});
    Tensor out({3, oh, ow});
    for (int c = 0; c < 3; ++c) {
        const double* s = wide.data() + static_cast<int64_t>(c) * h * ow;
        double* t = tr.data() + static_cast<int64_t>(c) * h * ow;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < ow; ++j) t[static_cast<int64_t>(j) * h + i] = s[static_cast<int64_t>(i) * ow + j];
        detail::bicubic_axis(t, trout.data() + static_cast<int64_t>(c) * ow * oh, ow, h, factor);
        const double* to = trout.data() + static_cast<int64_t>(c) * ow * oh;
        double* o = out.data() + static_cast<int64_t>(c) * oh * ow;
        for (int j = 0; j < ow; ++j)
            for (int i = 0; i < oh; ++i) o[static_cast<int64_t>(i) * ow + j] = to[static_cast<int64_t>(j) * oh + i];
    }
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::clamp(out[i], 0.0, 255.0);
    return out;
}

/// 3x3 sharpening: center 5, cross -1, reflect padding, clipped to [0, 255].
inline Tensor sharpen(const Tensor& img) {
    require_image(img, "sharpen");
    int h = img.dim(1), w = img.dim(2);
    Tensor out({3, h, w});
    auto ref = [](int i, int n) {
        if (i < 0) return -i;
        if (i >= n) return 2 * n - 2 - i;
        return i;
    };
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                double v = 5.0 * img.at(c, i, j) - img.at(c, ref(i - 1, h), j) -
                           img.at(c, ref(i + 1, h), j) - img.at(c, i, ref(j - 1, w)) -
                           img.at(c, i, ref(j + 1, w));
                out.at(c, i, j) = std::clamp(v, 0.0, 255.0);
            }
    return out;
}

}  // namespace csrip
