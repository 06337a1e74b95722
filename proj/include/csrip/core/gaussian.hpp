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

#include "csrip/core/tensor.hpp"

namespace csrip {

/// Discretized 2-D Gaussian, normalized to unit sum. Separable by
/// construction: taps(i,j) = t1d(i) * t1d(j) with a normalized t1d.
struct GaussianKernel {
    Tensor taps;   // (size, size)
    int size = 0;  // odd
    double sigma = 0.0;
};

/// Normalized 1-D Gaussian taps of odd length `size`.
inline std::vector<double> gaussian_taps_1d(int size, double sigma) {
    if (size <= 0 || size % 2 == 0) fail_arg("gaussian kernel size must be odd and positive");
    if (!(sigma > 0.0)) fail_arg("gaussian sigma must be positive");
    std::vector<double> taps(static_cast<size_t>(size));
    int c = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        double d = static_cast<double>(i - c);
        taps[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += taps[static_cast<size_t>(i)];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

inline GaussianKernel gaussian_kernel(int size, double sigma) {
    std::vector<double> t = gaussian_taps_1d(size, sigma);
    GaussianKernel k;
    k.size = size;
    k.sigma = sigma;
    k.taps = Tensor({size, size});
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
            k.taps[i * size + j] = t[static_cast<size_t>(i)] * t[static_cast<size_t>(j)];
    return k;
}

/// Kernel span rule used for residual-detail smoothing: 2*ceil(3*sigma)+1.
inline int gaussian_size_for_sigma(double sigma) {
    return 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
}

namespace detail {

// Mirror index about the edge pixel without repeating it (…2 1 | 0 1 2… maps
// -1 -> 1 and n -> n-2). Valid while the kernel radius is below the extent,
// which holds for every kernel/size pair used here.
inline int reflect_index(int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return i;
}

// 1-D smoothing pass along the last axis of a (rows, n) view.
inline void smooth_rows_reflect(const double* src, double* dst, int rows, int n,
                                const std::vector<double>& taps) {
    int r = static_cast<int>(taps.size()) / 2;
    for (int row = 0; row < rows; ++row) {
        const double* s = src + static_cast<int64_t>(row) * n;
        double* d = dst + static_cast<int64_t>(row) * n;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int o = -r; o <= r; ++o)
                acc += taps[static_cast<size_t>(o + r)] * s[reflect_index(i + o, n)];
            d[i] = acc;
        }
    }
}

// Adjoint of smooth_rows_reflect: scatters each output gradient back to the
// (reflected) source position it read. Accumulates into dst.
inline void smooth_rows_reflect_adjoint(const double* grad, double* dst, int rows, int n,
                                        const std::vector<double>& taps) {
    int r = static_cast<int>(taps.size()) / 2;
    for (int row = 0; row < rows; ++row) {
        const double* g = grad + static_cast<int64_t>(row) * n;
        double* d = dst + static_cast<int64_t>(row) * n;
        for (int i = 0; i < n; ++i) {
            double gi = g[i];
            if (gi == 0.0) continue;
            for (int o = -r; o <= r; ++o)
                d[reflect_index(i + o, n)] += taps[static_cast<size_t>(o + r)] * gi;
        }
    }
}

inline void transpose_hw(const double* src, double* dst, int h, int w) {
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) dst[static_cast<int64_t>(j) * h + i] = src[static_cast<int64_t>(i) * w + j];
}

}  // namespace detail

namespace detail {

// Channels of a (C,H,W) or (N,C,H,W) tensor, with batch folded in.
inline int folded_channels(const Tensor& t, const char* what) {
    if (t.ndim() == 3) return t.dim(0);
    if (t.ndim() == 4) return t.dim(0) * t.dim(1);
    fail_arg(std::string(what) + " expects (C, H, W) or (N, C, H, W), got " + t.shape_str());
}

}  // namespace detail

/// Channelwise Gaussian smoothing with reflect padding, same output size.
/// Separable: horizontal pass then vertical pass. Accepts (C,H,W) or (N,C,H,W).
inline Tensor smooth_reflect(const Tensor& img, const std::vector<double>& taps) {
    int c = detail::folded_channels(img, "smooth_reflect");
    int h = img.dim(img.ndim() - 2), w = img.dim(img.ndim() - 1);
    int r = static_cast<int>(taps.size()) / 2;
    if (r >= h || r >= w)
        fail_arg("kernel radius " + std::to_string(r) + " too large for image " + img.shape_str());
    Tensor tmp({c, h, w});
    Tensor tr({c, w, h});
    Tensor out(img.shape());
    for (int ch = 0; ch < c; ++ch) {
        const double* s = img.data() + static_cast<int64_t>(ch) * h * w;
        double* t = tmp.data() + static_cast<int64_t>(ch) * h * w;
        double* tt = tr.data() + static_cast<int64_t>(ch) * h * w;
        double* o = out.data() + static_cast<int64_t>(ch) * h * w;
        detail::smooth_rows_reflect(s, t, h, w, taps);        // horizontal
        detail::transpose_hw(t, tt, h, w);
        detail::smooth_rows_reflect(tt, t, w, h, taps);       // vertical (on transposed view)
        detail::transpose_hw(t, o, w, h);
    }
    return out;
}

/// Adjoint of smooth_reflect (gradient of output w.r.t. input applied to `grad`).
inline Tensor smooth_reflect_adjoint(const Tensor& grad, const std::vector<double>& taps) {
    int c = detail::folded_channels(grad, "smooth_reflect_adjoint");
    int h = grad.dim(grad.ndim() - 2), w = grad.dim(grad.ndim() - 1);
    Tensor tr({c, w, h});
    Tensor tmp({c, w, h});
    Tensor tmp2({c, h, w});
    Tensor out(grad.shape());
    // forward was H-pass then V-pass; adjoint is V-adjoint then H-adjoint
    for (int ch = 0; ch < c; ++ch) {
        const double* g = grad.data() + static_cast<int64_t>(ch) * h * w;
        double* a = tr.data() + static_cast<int64_t>(ch) * h * w;
        double* b = tmp.data() + static_cast<int64_t>(ch) * h * w;
        double* c2 = tmp2.data() + static_cast<int64_t>(ch) * h * w;
        double* o = out.data() + static_cast<int64_t>(ch) * h * w;
        detail::transpose_hw(g, a, h, w);
        std::fill(b, b + static_cast<int64_t>(h) * w, 0.0);
        detail::smooth_rows_reflect_adjoint(a, b, w, h, taps);
        detail::transpose_hw(b, c2, w, h);
        std::fill(o, o + static_cast<int64_t>(h) * w, 0.0);
        detail::smooth_rows_reflect_adjoint(c2, o, h, w, taps);
    }
    return out;
}

/// Channelwise separable correlation, valid region only: output spatial size
/// is (H-2r, W-2r). Used by the similarity map, where no padding is defined.
/// Accepts (C,H,W) or (N,C,H,W).
inline Tensor smooth_valid(const Tensor& img, const std::vector<double>& taps) {
    int c = detail::folded_channels(img, "smooth_valid");
    int h = img.dim(img.ndim() - 2), w = img.dim(img.ndim() - 1);
    int k = static_cast<int>(taps.size());
    int oh = h - k + 1, ow = w - k + 1;
    if (oh <= 0 || ow <= 0)
        fail_arg("image " + img.shape_str() + " smaller than kernel of size " + std::to_string(k));
    std::vector<int> oshape = img.shape();
    oshape[img.ndim() - 2] = oh;
    oshape[img.ndim() - 1] = ow;
    Tensor mid({c, h, ow});
    Tensor out(oshape);
    for (int ch = 0; ch < c; ++ch) {
        for (int i = 0; i < h; ++i) {
            const double* s = img.data() + (static_cast<int64_t>(ch) * h + i) * w;
            double* d = mid.data() + (static_cast<int64_t>(ch) * h + i) * ow;
            for (int j = 0; j < ow; ++j) {
                double acc = 0.0;
                for (int o = 0; o < k; ++o) acc += taps[static_cast<size_t>(o)] * s[j + o];
                d[j] = acc;
            }
        }
        for (int i = 0; i < oh; ++i) {
            double* d = out.data() + (static_cast<int64_t>(ch) * oh + i) * ow;
            for (int j = 0; j < ow; ++j) {
                double acc = 0.0;
                for (int o = 0; o < k; ++o)
                    acc += taps[static_cast<size_t>(o)] *
                           mid.data()[(static_cast<int64_t>(ch) * h + i + o) * ow + j];
                d[j] = acc;
            }
        }
    }
    return out;
}

/// Adjoint of smooth_valid: maps a valid-region gradient back to the padded
/// (H, W) input extent.
inline Tensor smooth_valid_adjoint(const Tensor& grad, const std::vector<double>& taps,
                                   int h, int w) {
    int c = detail::folded_channels(grad, "smooth_valid_adjoint");
    int oh = grad.dim(grad.ndim() - 2), ow = grad.dim(grad.ndim() - 1);
    int k = static_cast<int>(taps.size());
    std::vector<int> oshape = grad.shape();
    oshape[grad.ndim() - 2] = h;
    oshape[grad.ndim() - 1] = w;
    Tensor mid({c, h, ow});
    Tensor out(oshape);
    for (int ch = 0; ch < c; ++ch) {
        for (int i = 0; i < oh; ++i) {
            const double* g = grad.data() + (static_cast<int64_t>(ch) * oh + i) * ow;
            for (int o = 0; o < k; ++o) {
                double* d = mid.data() + (static_cast<int64_t>(ch) * h + i + o) * ow;
                double t = taps[static_cast<size_t>(o)];
                for (int j = 0; j < ow; ++j) d[j] += t * g[j];
            }
        }
        for (int i = 0; i < h; ++i) {
            const double* g = mid.data() + (static_cast<int64_t>(ch) * h + i) * ow;
            double* d = out.data() + (static_cast<int64_t>(ch) * h + i) * w;
            for (int j = 0; j < ow; ++j) {
                double gj = g[j];
                if (gj == 0.0) continue;
                for (int o = 0; o < k; ++o) d[j + o] += taps[static_cast<size_t>(o)] * gj;
            }
        }
    }
    return out;
}

}  // namespace csrip
