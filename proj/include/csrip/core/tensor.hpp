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
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "csrip/core/common.hpp"

namespace csrip {

/// Dense row-major tensor of doubles. Images are (C, H, W), batches
/// (N, C, H, W), kernels (OC, IC, k, k). Value semantics throughout;
/// all compute kernels take raw pointers from here.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(count(shape_)), 0.0);
    }

    Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(count(shape_)), fill);
    }

    static Tensor from_data(std::vector<int> shape, std::vector<double> data) {
        if (count(shape) != static_cast<int64_t>(data.size()))
            fail_arg("tensor data size does not match shape " + shape_str(shape));
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // (C,H,W) accessors
    double& at(int c, int h, int w) {
        return data_[static_cast<size_t>((c * shape_[1] + h) * shape_[2] + w)];
    }
    double at(int c, int h, int w) const {
        return data_[static_cast<size_t>((c * shape_[1] + h) * shape_[2] + w)];
    }

    // (N,C,H,W) accessors
    double& at(int n, int c, int h, int w) {
        return data_[static_cast<size_t>(
            ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }
    double at(int n, int c, int h, int w) const {
        return data_[static_cast<size_t>(
            ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    double sum() const {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }
    double mean() const { return numel() > 0 ? sum() / static_cast<double>(numel()) : 0.0; }

    double min_value() const {
        return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
    }
    double max_value() const {
        return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
    }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    /// Same data, new shape (element counts must agree).
    Tensor reshaped(std::vector<int> shape) const {
        if (count(shape) != numel())
            fail_arg("reshape " + shape_str() + " -> " + shape_str(shape) +
                     " changes element count");
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = data_;
        return t;
    }

    std::string shape_str() const { return shape_str(shape_); }

    static std::string shape_str(const std::vector<int>& shape) {
        std::ostringstream os;
        os << "(";
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
        os << ")";
        return os.str();
    }

    static int64_t count(const std::vector<int>& shape) {
        int64_t n = 1;
        for (int d : shape) {
            if (d <= 0) fail_arg("non-positive tensor dimension in " + shape_str(shape));
            n *= d;
        }
        return n;
    }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        fail_arg(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                 b.shape_str());
}

}  // namespace csrip
