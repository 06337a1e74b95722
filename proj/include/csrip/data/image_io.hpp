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

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <string>

#include "csrip/data/image.hpp"

namespace csrip {

inline Tensor tensor_from_mat(const cv::Mat& bgr) {
    Tensor t({3, bgr.rows, bgr.cols});
    for (int i = 0; i < bgr.rows; ++i) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(i);
        for (int j = 0; j < bgr.cols; ++j) {
            t.at(0, i, j) = row[j][2];  // R
            t.at(1, i, j) = row[j][1];
            t.at(2, i, j) = row[j][0];
        }
    }
    return t;
}

inline cv::Mat mat_from_tensor(const Tensor& img) {
    require_image(img, "mat_from_tensor");
    int h = img.dim(1), w = img.dim(2);
    cv::Mat bgr(h, w, CV_8UC3);
    for (int i = 0; i < h; ++i) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(i);
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < 3; ++c) {
                double v = std::round(img.at(c, i, j));
                row[j][2 - c] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    return bgr;
}

/// Decodes an 8-bit PNG/JPEG as an RGB image tensor. Throws on failure.
inline Tensor load_image_rgb(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) fail("cannot decode image: " + path);
    return tensor_from_mat(bgr);
}

inline void save_image_png(const Tensor& img, const std::string& path) {
    if (!cv::imwrite(path, mat_from_tensor(img))) fail("cannot write image: " + path);
}

/// Shorter side scaled to `size` (bicubic), then center-cropped square.
/// Images already at size x size pass through untouched.
inline Tensor resize_center_crop(const Tensor& img, int size) {
    require_image(img, "resize_center_crop");
    int h = img.dim(1), w = img.dim(2);
    if (h == size && w == size) return img;
    cv::Mat bgr = mat_from_tensor(img);
    double scale = static_cast<double>(size) / std::min(h, w);
    int nh = std::max(size, static_cast<int>(std::lround(h * scale)));
    int nw = std::max(size, static_cast<int>(std::lround(w * scale)));
    cv::Mat resized;
    cv::resize(bgr, resized, cv::Size(nw, nh), 0, 0, cv::INTER_CUBIC);
    int y0 = (nh - size) / 2, x0 = (nw - size) / 2;
    cv::Mat crop = resized(cv::Rect(x0, y0, size, size)).clone();
    return tensor_from_mat(crop);
}

}  // namespace csrip
