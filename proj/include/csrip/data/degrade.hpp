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

#include <string>

#include "csrip/core/gaussian.hpp"
#include "csrip/core/rng.hpp"
#include "csrip/data/image.hpp"

namespace csrip {

/// Anti-alias blur applied before each 2x decimation. Sigma 1 suppresses
/// content above the post-decimation Nyquist limit.
struct DegradeParams {
    double sigma = 1.0;
    int kernel = 5;

    bool operator==(const DegradeParams&) const = default;
};

/// One 2x downscale: channelwise Gaussian blur (reflect padding) followed by
/// decimation keeping even row/column indices.
inline Tensor degrade_step(const Tensor& img, const DegradeParams& params = {}) {
    require_image(img, "degrade_step");
    int h = img.dim(1), w = img.dim(2);
    if (h % 2 != 0 || w % 2 != 0)
        fail_arg("degrade_step needs even dimensions, got " + img.shape_str());
    Tensor blurred = smooth_reflect(img, gaussian_taps_1d(params.kernel, params.sigma));
    Tensor out({3, h / 2, w / 2});
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < h / 2; ++i)
            for (int j = 0; j < w / 2; ++j) out.at(c, i, j) = blurred.at(c, 2 * i, 2 * j);
    return out;
}

/// Aligned pyramid of one training image: 24, 48, 96 and 192 pixels square,
/// each lower member being exactly the degradation of the next.
struct ImageQuadruplet {
    Tensor lr;   // (3, 24, 24)
    Tensor x2;   // (3, 48, 48)
    Tensor x4;   // (3, 96, 96)
    Tensor hr;   // (3, 192, 192)
    int identity = -1;
};

inline ImageQuadruplet make_quadruplet(const Tensor& hr, int identity,
                                       const DegradeParams& params = {}) {
    require_image_size(hr, 192, "make_quadruplet");
    ImageQuadruplet q;
    q.hr = hr;
    q.x4 = degrade_step(q.hr, params);
    q.x2 = degrade_step(q.x4, params);
    q.lr = degrade_step(q.x2, params);
    q.identity = identity;
    return q;
}

/// The three supervision scales of the cascade.
enum class ScaleTag { x2, x4, hr };

inline const char* scale_name(ScaleTag t) {
    switch (t) {
        case ScaleTag::x2: return "2x";
        case ScaleTag::x4: return "4x";
        case ScaleTag::hr: return "hr";
    }
    return "?";
}

inline int scale_size(ScaleTag t) {
    switch (t) {
        case ScaleTag::x2: return 48;
        case ScaleTag::x4: return 96;
        case ScaleTag::hr: return 192;
    }
    return 0;
}

/// Smoothing widths for the detail residuals, one per scale.
inline double residual_sigma(ScaleTag t) {
    switch (t) {
        case ScaleTag::x2: return 1.0 / 3.0;
        case ScaleTag::x4: return 1.0;
        case ScaleTag::hr: return 7.0 / 3.0;
    }
    return 0.0;
}

inline std::vector<double> residual_taps(ScaleTag t) {
    double sigma = residual_sigma(t);
    return gaussian_taps_1d(gaussian_size_for_sigma(sigma), sigma);
}

/// High-frequency detail image: signed, zero-mean on constant inputs.
struct ResidualImage {
    Tensor data;  // (3, S, S), signed
    ScaleTag tag = ScaleTag::hr;
};

/// img - gaussian_blur(img, sigma(tag)) with reflect padding.
inline ResidualImage residual_detail(const Tensor& img, ScaleTag tag) {
    require_image_size(img, scale_size(tag), "residual_detail");
    Tensor smooth = smooth_reflect(img, residual_taps(tag));
    ResidualImage r;
    r.tag = tag;
    r.data = img;
    for (int64_t i = 0; i < img.numel(); ++i) r.data[i] -= smooth[i];
    return r;
}

/// Training-time augmentation: horizontal flip with probability 1/2, then a
/// random (H-4)x(W-4) crop resized back bilinearly. Output distribution is a
/// pure function of the generator state.
inline Tensor augment(const Tensor& img, Rng& rng) {
    require_image(img, "augment");
    int h = img.dim(1), w = img.dim(2);
    Tensor work = rng.bernoulli(0.5) ? flip_horizontal(img) : img;
    int oy = rng.uniform_int(5);  // crop offsets in [0, 4]
    int ox = rng.uniform_int(5);
    int ch = h - 4, cw = w - 4;
    Tensor crop({3, ch, cw});
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < ch; ++i)
            for (int j = 0; j < cw; ++j) crop.at(c, i, j) = work.at(c, i + oy, j + ox);
    return resize_bilinear(crop, h, w);
}

}  // namespace csrip
