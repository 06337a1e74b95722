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

#include <cstdint>
#include <vector>

#include "csrip/core/tensor.hpp"

namespace csrip {

// Images are (3, H, W) tensors with real intensities in [0, 255].

inline void require_image(const Tensor& t, const char* what) {
    if (t.ndim() != 3 || t.dim(0) != 3)
        fail_arg(std::string(what) + ": expected a (3, H, W) image, got " + t.shape_str());
}

inline void require_image_size(const Tensor& t, int size, const char* what) {
    require_image(t, what);
    if (t.dim(1) != size || t.dim(2) != size)
        fail_arg(std::string(what) + ": expected " + std::to_string(size) + "x" +
                 std::to_string(size) + ", got " + t.shape_str());
}

/// Quantize to 8-bit with round-half-away clamping; channels-first layout.
inline std::vector<uint8_t> image_to_u8(const Tensor& img) {
    std::vector<uint8_t> out(static_cast<size_t>(img.numel()));
    for (int64_t i = 0; i < img.numel(); ++i) {
        double v = std::round(img[i]);
        out[static_cast<size_t>(i)] =
            static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

inline Tensor image_from_u8(const std::vector<uint8_t>& bytes, int h, int w) {
    if (bytes.size() != static_cast<size_t>(3) * h * w)
        fail_arg("image_from_u8: byte count does not match 3x" + std::to_string(h) + "x" +
                 std::to_string(w));
    Tensor t({3, h, w});
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<double>(bytes[static_cast<size_t>(i)]);
    return t;
}

/// Mirror image about the vertical axis. Applying it twice is the identity.
inline Tensor flip_horizontal(const Tensor& img) {
    require_image(img, "flip_horizontal");
    int h = img.dim(1), w = img.dim(2);
    Tensor out({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) out.at(c, i, j) = img.at(c, i, w - 1 - j);
    return out;
}

/// Corner-aligned bilinear resize: output corners sample input corners
/// exactly, interior positions interpolate at i*(in-1)/(out-1).
inline Tensor resize_bilinear(const Tensor& img, int oh, int ow) {
    require_image(img, "resize_bilinear");
    int h = img.dim(1), w = img.dim(2);
    if (oh < 2 || ow < 2) fail_arg("resize_bilinear: output too small");
    Tensor out({3, oh, ow});
    double sy = static_cast<double>(h - 1) / (oh - 1);
    double sx = static_cast<double>(w - 1) / (ow - 1);
    for (int i = 0; i < oh; ++i) {
        double fy = i * sy;
        int y0 = std::min(static_cast<int>(fy), h - 2);
        double wy = fy - y0;
        for (int j = 0; j < ow; ++j) {
            double fx = j * sx;
            int x0 = std::min(static_cast<int>(fx), w - 2);
            double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                double a = img.at(c, y0, x0), b = img.at(c, y0, x0 + 1);
                double d = img.at(c, y0 + 1, x0), e = img.at(c, y0 + 1, x0 + 1);
                out.at(c, i, j) =
                    (1 - wy) * ((1 - wx) * a + wx * b) + wy * ((1 - wx) * d + wx * e);
            }
        }
    }
    return out;
}

}  // namespace csrip
