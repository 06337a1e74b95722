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

#include <Eigen/Dense>

#include <vector>

#include "csrip/core/tensor.hpp"

namespace csrip {

// Stride-1, same-size (zero padded) 2-D convolution with odd square kernels,
// lowered to GEMM via im2col. Row chunking keeps the lowered buffer bounded
// so the 9x9 layers at 192x192 do not blow up the workspace.

namespace detail {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline constexpr int64_t kConvWorkspaceDoubles = 1 << 22;  // 32 MB

// Lowered patch matrix for output rows [row0, row0+rows): (Cin*k*k) x (rows*W),
// row-major. Zero padding outside the image.
inline void im2col(const double* x, int cin, int h, int w, int k, int row0, int rows,
                   double* cols) {
    int pad = k / 2;
    int64_t l = static_cast<int64_t>(rows) * w;
    for (int ci = 0; ci < cin; ++ci) {
        const double* src = x + static_cast<int64_t>(ci) * h * w;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                double* dst = cols + (static_cast<int64_t>(ci) * k * k + ki * k + kj) * l;
                for (int i = 0; i < rows; ++i) {
                    int si = row0 + i + ki - pad;
                    double* drow = dst + static_cast<int64_t>(i) * w;
                    if (si < 0 || si >= h) {
                        std::fill(drow, drow + w, 0.0);
                        continue;
                    }
                    const double* srow = src + static_cast<int64_t>(si) * w;
                    int j0 = std::max(0, pad - kj);            // first j with valid source col
                    int j1 = std::min(w, w + pad - kj);        // one past last
                    for (int j = 0; j < j0; ++j) drow[j] = 0.0;
                    for (int j = j0; j < j1; ++j) drow[j] = srow[j + kj - pad];
                    for (int j = j1; j < w; ++j) drow[j] = 0.0;
                }
            }
        }
    }
}

// Scatter-add transpose of im2col.
inline void col2im_add(const double* cols, int cin, int h, int w, int k, int row0, int rows,
                       double* dx) {
    int pad = k / 2;
    int64_t l = static_cast<int64_t>(rows) * w;
    for (int ci = 0; ci < cin; ++ci) {
        double* dst = dx + static_cast<int64_t>(ci) * h * w;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                const double* src = cols + (static_cast<int64_t>(ci) * k * k + ki * k + kj) * l;
                for (int i = 0; i < rows; ++i) {
                    int si = row0 + i + ki - pad;
                    if (si < 0 || si >= h) continue;
                    const double* srow = src + static_cast<int64_t>(i) * w;
                    double* drow = dst + static_cast<int64_t>(si) * w;
                    int j0 = std::max(0, pad - kj);
                    int j1 = std::min(w, w + pad - kj);
                    for (int j = j0; j < j1; ++j) drow[j + kj - pad] += srow[j];
                }
            }
        }
    }
}

inline int conv_chunk_rows(int cin, int k, int w) {
    int64_t per_row = static_cast<int64_t>(cin) * k * k * w;
    int rows = static_cast<int>(std::max<int64_t>(1, kConvWorkspaceDoubles / per_row));
    return rows;
}

}  // namespace detail

/// out(N,Cout,H,W) = x(N,Cin,H,W) * w(Cout,Cin,k,k) + b, stride 1, zero-padded.
inline Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.ndim() != 4 || w.ndim() != 4) fail_arg("conv2d expects 4-d input and weight");
    int n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    int cout = w.dim(0), k = w.dim(2);
    if (w.dim(1) != cin)
        fail_arg("conv2d channel mismatch: input has " + std::to_string(cin) +
                 ", weight expects " + std::to_string(w.dim(1)));
    if (w.dim(3) != k || k % 2 == 0) fail_arg("conv2d kernel must be odd and square");
    if (b.numel() != cout) fail_arg("conv2d bias size mismatch");

    Tensor out({n, cout, h, wd});
    int kk = cin * k * k;
    int chunk = detail::conv_chunk_rows(cin, k, wd);
    std::vector<double> cols(static_cast<size_t>(kk) * chunk * wd);
    std::vector<double> obuf(static_cast<size_t>(cout) * chunk * wd);
    detail::ConstMatMap wmat(w.data(), cout, kk);

    for (int s = 0; s < n; ++s) {
        const double* xs = x.data() + static_cast<int64_t>(s) * cin * h * wd;
        double* os = out.data() + static_cast<int64_t>(s) * cout * h * wd;
        for (int row0 = 0; row0 < h; row0 += chunk) {
            int rows = std::min(chunk, h - row0);
            int64_t l = static_cast<int64_t>(rows) * wd;
            detail::im2col(xs, cin, h, wd, k, row0, rows, cols.data());
            detail::ConstMatMap cmat(cols.data(), kk, l);
            detail::MatMap omat(obuf.data(), cout, l);
            omat.noalias() = wmat * cmat;
            for (int oc = 0; oc < cout; ++oc) {
                const double* src = obuf.data() + static_cast<int64_t>(oc) * l;
                double* dst = os + (static_cast<int64_t>(oc) * h + row0) * wd;
                double bias = b[oc];
                for (int64_t i = 0; i < l; ++i) dst[i] = src[i] + bias;
            }
        }
    }
    return out;
}

/// Gradients of conv2d_forward. Accumulates into dx/dw/db (pass zeroed or
/// partially accumulated buffers; null pointers skip that gradient).
inline void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gout, Tensor* dx,
                            Tensor* dw, Tensor* db) {
    int n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    int cout = w.dim(0), k = w.dim(2);
    int kk = cin * k * k;
    int chunk = detail::conv_chunk_rows(cin, k, wd);
    std::vector<double> cols(static_cast<size_t>(kk) * chunk * wd);
    std::vector<double> gbuf(static_cast<size_t>(cout) * chunk * wd);
    std::vector<double> dcols(static_cast<size_t>(kk) * chunk * wd);
    detail::ConstMatMap wmat(w.data(), cout, kk);

    for (int s = 0; s < n; ++s) {
        const double* xs = x.data() + static_cast<int64_t>(s) * cin * h * wd;
        const double* gs = gout.data() + static_cast<int64_t>(s) * cout * h * wd;
        for (int row0 = 0; row0 < h; row0 += chunk) {
            int rows = std::min(chunk, h - row0);
            int64_t l = static_cast<int64_t>(rows) * wd;
            for (int oc = 0; oc < cout; ++oc) {
                const double* src = gs + (static_cast<int64_t>(oc) * h + row0) * wd;
                std::copy(src, src + l, gbuf.data() + static_cast<int64_t>(oc) * l);
            }
            detail::ConstMatMap gmat(gbuf.data(), cout, l);
            if (dw || db) {
                detail::im2col(xs, cin, h, wd, k, row0, rows, cols.data());
                if (dw) {
                    detail::ConstMatMap cmat(cols.data(), kk, l);
                    detail::MatMap dwmat(dw->data(), cout, kk);
                    dwmat.noalias() += gmat * cmat.transpose();
                }
                if (db) {
                    for (int oc = 0; oc < cout; ++oc) {
                        const double* src = gbuf.data() + static_cast<int64_t>(oc) * l;
                        double acc = 0.0;
                        for (int64_t i = 0; i < l; ++i) acc += src[i];
                        (*db)[oc] += acc;
                    }
                }
            }
            if (dx) {
                detail::MatMap dcmat(dcols.data(), kk, l);
                dcmat.noalias() = wmat.transpose() * gmat;
                detail::col2im_add(dcols.data(), cin, h, wd, k, row0, rows,
                                   dx->data() + static_cast<int64_t>(s) * cin * h * wd);
            }
        }
    }
}

/// Sub-pixel rearrangement: (N, C, H, W) -> (N, C/r^2, rH, rW) with
/// out[c, r*i+di, r*j+dj] = in[c*r^2 + di*r + dj, i, j].
inline Tensor pixel_shuffle_forward(const Tensor& x, int r) {
    if (x.ndim() != 4) fail_arg("pixel_shuffle expects (N, C, H, W)");
    int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (c % (r * r) != 0)
        fail_arg("pixel_shuffle: " + std::to_string(c) + " channels not divisible by " +
                 std::to_string(r * r));
    int oc = c / (r * r);
    Tensor out({n, oc, h * r, w * r});
    for (int s = 0; s < n; ++s)
        for (int co = 0; co < oc; ++co)
            for (int di = 0; di < r; ++di)
                for (int dj = 0; dj < r; ++dj) {
                    const double* src =
                        x.data() + ((static_cast<int64_t>(s) * c + co * r * r + di * r + dj) * h) * w;
                    for (int i = 0; i < h; ++i) {
                        double* dst = out.data() +
                                      ((static_cast<int64_t>(s) * oc + co) * (h * r) + i * r + di) *
                                          (w * r) +
                                      dj;
                        const double* srow = src + static_cast<int64_t>(i) * w;
                        for (int j = 0; j < w; ++j) dst[static_cast<int64_t>(j) * r] = srow[j];
                    }
                }
    return out;
}

/// Exact inverse of pixel_shuffle_forward.
inline Tensor pixel_unshuffle(const Tensor& y, int r) {
    if (y.ndim() != 4) fail_arg("pixel_unshuffle expects (N, C, H, W)");
    int n = y.dim(0), oc = y.dim(1), oh = y.dim(2), ow = y.dim(3);
    if (oh % r != 0 || ow % r != 0) fail_arg("pixel_unshuffle: spatial size not divisible by r");
    int c = oc * r * r, h = oh / r, w = ow / r;
    Tensor out({n, c, h, w});
    for (int s = 0; s < n; ++s)
        for (int co = 0; co < oc; ++co)
            for (int di = 0; di < r; ++di)
                for (int dj = 0; dj < r; ++dj) {
                    double* dst =
                        out.data() + ((static_cast<int64_t>(s) * c + co * r * r + di * r + dj) * h) * w;
                    for (int i = 0; i < h; ++i) {
                        const double* src = y.data() +
                                            ((static_cast<int64_t>(s) * oc + co) * oh + i * r + di) * ow +
                                            dj;
                        double* drow = dst + static_cast<int64_t>(i) * w;
                        for (int j = 0; j < w; ++j) drow[j] = src[static_cast<int64_t>(j) * r];
                    }
                }
    return out;
}

}  // namespace csrip
