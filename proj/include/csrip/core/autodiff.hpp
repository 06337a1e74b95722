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

#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "csrip/core/tensor.hpp"

namespace csrip {

// Reverse-mode tape. A Tape owns the nodes of one forward pass; backward()
// walks them in reverse creation order, so any op whose inputs were created
// before its output (always true for define-by-run) differentiates correctly.

struct TapeNode {
    Tensor value;
    Tensor grad;  // same shape as value, zero-initialized
    bool requires_grad = false;
    std::function<void(TapeNode&)> backward;  // accumulates into parent grads
};

/// Lightweight handle to a node on some tape. Valid while the tape lives.
class Var {
public:
    Var() = default;
    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }
    TapeNode* node() const { return node_; }

private:
    friend class Tape;
    explicit Var(TapeNode* n) : node_(n) {}
    TapeNode* node_ = nullptr;
};

class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = false) {
        TapeNode& n = nodes_.emplace_back();
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        if (requires_grad) n.grad = Tensor::zeros_like(n.value);
        return Var(&n);
    }

    /// Records an op result. `backward` may be empty when no parent needs
    /// gradients; it is dropped in that case so dead branches cost nothing.
    Var op(Tensor value, const std::vector<Var>& parents,
           std::function<void(TapeNode&)> backward) {
        bool needs = false;
        for (const Var& p : parents) needs = needs || (p.defined() && p.requires_grad());
        TapeNode& n = nodes_.emplace_back();
        n.value = std::move(value);
        n.requires_grad = needs;
        if (needs) {
            n.grad = Tensor::zeros_like(n.value);
            n.backward = std::move(backward);
        }
        return Var(&n);
    }

    /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be scalar.
    void backward(Var loss) {
        if (!loss.defined() || loss.value().numel() != 1)
            fail_arg("backward expects a defined scalar loss");
        if (!loss.requires_grad()) return;
        loss.node()->grad[0] = 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            if (it->requires_grad && it->backward) it->backward(*it);
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    std::deque<TapeNode> nodes_;  // deque: stable addresses for parent pointers
};

namespace detail {

inline void accumulate(TapeNode* dst, const Tensor& g) {
    if (!dst->requires_grad) return;
    double* d = dst->grad.data();
    const double* s = g.data();
    int64_t n = g.numel();
    for (int64_t i = 0; i < n; ++i) d[i] += s[i];
}

}  // namespace detail

}  // namespace csrip
