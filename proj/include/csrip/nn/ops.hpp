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
#include <utility>
#include <vector>

#include "csrip/core/autodiff.hpp"
#include "csrip/core/conv.hpp"
#include "csrip/core/gaussian.hpp"
#include "csrip/core/tensor.hpp"

namespace csrip {

// Differentiable building blocks. Each op records a closure that accumulates
// into its parents' grad buffers; parent values are read back through stable
// tape pointers, so closures rarely need to copy tensors.

inline Var add(Tape& tape, Var a, Var b) {
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    const double* pb = b.value().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
    TapeNode* an = a.node();
    TapeNode* bn = b.node();
    return tape.op(std::move(out), {a, b}, [an, bn](TapeNode& n) {
        detail::accumulate(an, n.grad);
        detail::accumulate(bn, n.grad);
    });
}

inline Var sub(Tape& tape, Var a, Var b) {
    require_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    const double* pb = b.value().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
    TapeNode* an = a.node();
    TapeNode* bn = b.node();
    return tape.op(std::move(out), {a, b}, [an, bn](TapeNode& n) {
        detail::accumulate(an, n.grad);
        if (bn->requires_grad) {
            double* d = bn->grad.data();
            const double* g = n.grad.data();
            for (int64_t i = 0; i < n.grad.numel(); ++i) d[i] -= g[i];
        }
    });
}

inline Var mul(Tape& tape, Var a, Var b) {
    require_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    const double* pb = b.value().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
    TapeNode* an = a.node();
    TapeNode* bn = b.node();
    return tape.op(std::move(out), {a, b}, [an, bn](TapeNode& n) {
        const double* g = n.grad.data();
        if (an->requires_grad) {
            double* d = an->grad.data();
            const double* vb = bn->value.data();
            for (int64_t i = 0; i < n.grad.numel(); ++i) d[i] += g[i] * vb[i];
        }
        if (bn->requires_grad) {
            double* d = bn->grad.data();
            const double* va = an->value.data();
            for (int64_t i = 0; i < n.grad.numel(); ++i) d[i] += g[i] * va[i];
        }
    });
}

inline Var divide(Tape& tape, Var a, Var b) {
    require_same_shape(a.value(), b.value(), "divide");
    Tensor out = a.value();
    const double* pb = b.value().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] /= pb[i];
    TapeNode* an = a.node();
    TapeNode* bn = b.node();
    return tape.op(std::move(out), {a, b}, [an, bn](TapeNode& n) {
        const double* g = n.grad.data();
        const double* vb = bn->value.data();
        if (an->requires_grad) {
            double* d = an->grad.data();
            for (int64_t i = 0; i < n.grad.numel(); ++i) d[i] += g[i] / vb[i];
        }
        if (bn->requires_grad) {
            double* d = bn->grad.data();
            const double* va = an->value.data();
            for (int64_t i = 0; i < n.grad.numel(); ++i)
                d[i] -= g[i] * va[i] / (vb[i] * vb[i]);
        }
    });
}

inline Var add_const(Tape& tape, Var a, double c) {
    Tensor out = a.value();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] += c;
    TapeNode* an = a.node();
    return tape.op(std::move(out), {a},
                   [an](TapeNode& n) { detail::accumulate(an, n.grad); });
}

inline Var mul_const(Tape& tape, Var a, double c) {
    Tensor out = a.value();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] *= c;
    TapeNode* an = a.node();
    return tape.op(std::move(out), {a}, [an, c](TapeNode& n) {
        if (!an->requires_grad) return;
        double* d = an->grad.data();
        const double* g = n.grad.data();
        for (int64_t i = 0; i < n.grad.numel(); ++i) d[i] += c * g[i];
    });
}

/// Scalar mean over every element.
inline Var mean_all(Tape& tape, Var a) {
    Tensor out({1});
    out[0] = a.value().mean();
    TapeNode* an = a.node();
    int64_t count = a.value().numel();
    return tape.op(std::move(out), {a}, [an, count](TapeNode& n) {
        if (!an->requires_grad) return;
        double g = n.grad[0] / static_cast<double>(count);
        double* d = an->grad.data();
        for (int64_t i = 0; i < count; ++i) d[i] += g;
    });
}

inline Var abs_value(Tape& tape, Var a) {
    Tensor out = a.value();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::abs(po[i]);
    TapeNode* an = a.node();
    return tape.op(std::move(out), {a}, [an](TapeNode& n) {
        if (!an->requires_grad) return;
        double* d = an->grad.data();
        const double* g = n.grad.data();
        const double* v = an->value.data();
        for (int64_t i = 0; i < n.grad.numel(); ++i)
            d[i] += g[i] * (v[i] > 0.0 ? 1.0 : (v[i] < 0.0 ? -1.0 : 0.0));
    });
}

inline Var leaky_relu(Tape& tape, Var a, double slope) {
    Tensor out = a.value();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i)
        if (po[i] < 0.0) po[i] *= slope;
    TapeNode* an = a.node();
    return tape.op(std::move(out), {a}, [an, slope](TapeNode& n) {
        if (!an->requires_grad) return;
        double* d = an->grad.data();
        const double* g = n.grad.data();
        const double* v = an->value.data();
        for (int64_t i = 0; i < n.grad.numel(); ++i)
            d[i] += g[i] * (v[i] > 0.0 ? 1.0 : slope);
    });
}

inline Var relu(Tape& tape, Var a) { return leaky_relu(tape, a, 0.0); }

/// Clamp to the valid RGB range. Gradient is identity where the input is
/// inside [0, 255] and zero where it was clipped.
inline Var clip_rgb(Tape& tape, Var a) {
    Tensor out = a.value();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::clamp(po[i], 0.0, 255.0);
    TapeNode* an = a.node();
    return tape.op(std::move(out), {a}, [an](TapeNode& n) {
        if (!an->requires_grad) return;
        double* d = an->grad.data();
        const double* g = n.grad.data();
        const double* v = an->value.data();
        for (int64_t i = 0; i < n.grad.numel(); ++i)
            if (v[i] >= 0.0 && v[i] <= 255.0) d[i] += g[i];
    });
}

inline Var conv2d(Tape& tape, Var x, Var w, Var b) {
    Tensor out = conv2d_forward(x.value(), w.value(), b.value());
    TapeNode* xn = x.node();
    TapeNode* wn = w.node();
    TapeNode* bn = b.node();
    return tape.op(std::move(out), {x, w, b}, [xn, wn, bn](TapeNode& n) {
        conv2d_backward(xn->value, wn->value, n.grad,
                        xn->requires_grad ? &xn->grad : nullptr,
                        wn->requires_grad ? &wn->grad : nullptr,
                        bn->requires_grad ? &bn->grad : nullptr);
    });
}

/// Batch normalization over (N, *, H, W) per channel.
/// `use_batch_stats` selects batch statistics (training) vs the provided
/// running statistics (inference); running stats are updated only when
/// `update_running` is set. Variance is biased in both uses.
inline Var batch_norm(Tape& tape, Var x, Var gamma, Var beta, Tensor& running_mean,
                      Tensor& running_var, bool use_batch_stats, bool update_running,
                      double eps, double momentum) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) fail_arg("batch_norm expects (N, C, H, W)");
    int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    if (gamma.value().numel() != c || beta.value().numel() != c ||
        running_mean.numel() != c || running_var.numel() != c)
        fail_arg("batch_norm parameter size mismatch for " + std::to_string(c) + " channels");
    int64_t m = static_cast<int64_t>(n) * h * w;
    int64_t hw = static_cast<int64_t>(h) * w;

    Tensor mean({c});
    Tensor var({c});
    if (use_batch_stats) {
        for (int ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (int s0 = 0; s0 < n; ++s0) {
                const double* p = xv.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
                for (int64_t i = 0; i < hw; ++i) s += p[i];
            }
            double mu = s / static_cast<double>(m);
            double sv = 0.0;
            for (int s0 = 0; s0 < n; ++s0) {
                const double* p = xv.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
                for (int64_t i = 0; i < hw; ++i) {
                    double d = p[i] - mu;
                    sv += d * d;
                }
            }
            mean[ch] = mu;
            var[ch] = sv / static_cast<double>(m);
        }
        if (update_running) {
            for (int ch = 0; ch < c; ++ch) {
                running_mean[ch] = momentum * running_mean[ch] + (1.0 - momentum) * mean[ch];
                running_var[ch] = momentum * running_var[ch] + (1.0 - momentum) * var[ch];
            }
        }
    } else {
        mean = running_mean;
        var = running_var;
    }

    Tensor inv_std({c});
    for (int ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(var[ch] + eps);

    Tensor xhat(xv.shape());
    Tensor out(xv.shape());
    for (int s0 = 0; s0 < n; ++s0)
        for (int ch = 0; ch < c; ++ch) {
            const double* p = xv.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
            double* ph = xhat.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
            double* po = out.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
            double mu = mean[ch], is = inv_std[ch];
            double gm = gamma.value()[ch], bt = beta.value()[ch];
            for (int64_t i = 0; i < hw; ++i) {
                ph[i] = (p[i] - mu) * is;
                po[i] = gm * ph[i] + bt;
            }
        }

    TapeNode* xn = x.node();
    TapeNode* gn = gamma.node();
    TapeNode* bn = beta.node();
    return tape.op(
        std::move(out), {x, gamma, beta},
        [xn, gn, bn, xhat = std::move(xhat), inv_std = std::move(inv_std), n, c, hw, m,
         use_batch_stats](TapeNode& node) {
            const double* g = node.grad.data();
            // per-channel reductions shared by all three gradients
            std::vector<double> sum_g(static_cast<size_t>(c), 0.0);
            std::vector<double> sum_gx(static_cast<size_t>(c), 0.0);
            for (int s0 = 0; s0 < n; ++s0)
                for (int ch = 0; ch < c; ++ch) {
                    const double* gp = g + (static_cast<int64_t>(s0) * c + ch) * hw;
                    const double* hp = xhat.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
                    double a = 0.0, b2 = 0.0;
                    for (int64_t i = 0; i < hw; ++i) {
                        a += gp[i];
                        b2 += gp[i] * hp[i];
                    }
                    sum_g[static_cast<size_t>(ch)] += a;
                    sum_gx[static_cast<size_t>(ch)] += b2;
                }
            if (bn->requires_grad)
                for (int ch = 0; ch < c; ++ch) bn->grad[ch] += sum_g[static_cast<size_t>(ch)];
            if (gn->requires_grad)
                for (int ch = 0; ch < c; ++ch) gn->grad[ch] += sum_gx[static_cast<size_t>(ch)];
            if (!xn->requires_grad) return;
            double inv_m = 1.0 / static_cast<double>(m);
            for (int s0 = 0; s0 < n; ++s0)
                for (int ch = 0; ch < c; ++ch) {
                    const double* gp = g + (static_cast<int64_t>(s0) * c + ch) * hw;
                    const double* hp = xhat.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
                    double* dp = xn->grad.data() + (static_cast<int64_t>(s0) * c + ch) * hw;
                    double scale = gn->value[ch] * inv_std[ch];
                    if (use_batch_stats) {
                        double mg = sum_g[static_cast<size_t>(ch)] * inv_m;
                        double mgx = sum_gx[static_cast<size_t>(ch)] * inv_m;
                        for (int64_t i = 0; i < hw; ++i)
                            dp[i] += scale * (gp[i] - mg - hp[i] * mgx);
                    } else {
                        for (int64_t i = 0; i < hw; ++i) dp[i] += scale * gp[i];
                    }
                }
        });
}

inline Var pixel_shuffle(Tape& tape, Var x, int r) {
    Tensor out = pixel_shuffle_forward(x.value(), r);
    TapeNode* xn = x.node();
    return tape.op(std::move(out), {x}, [xn, r](TapeNode& n) {
        if (!xn->requires_grad) return;
        detail::accumulate(xn, pixel_unshuffle(n.grad, r));
    });
}

/// 2x2 max pooling, stride 2. Ties resolve to the first element in scan order.
inline Var max_pool2(Tape& tape, Var x) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) fail_arg("max_pool2 expects (N, C, H, W)");
    int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    if (h % 2 != 0 || w % 2 != 0) fail_arg("max_pool2 needs even spatial dims");
    int oh = h / 2, ow = w / 2;
    Tensor out({n, c, oh, ow});
    std::vector<int64_t> argmax(static_cast<size_t>(out.numel()));
    int64_t oi = 0;
    for (int s = 0; s < n; ++s)
        for (int ch = 0; ch < c; ++ch) {
            const double* p = xv.data() + (static_cast<int64_t>(s) * c + ch) * h * w;
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    int64_t base = static_cast<int64_t>(2 * i) * w + 2 * j;
                    int64_t best = base;
                    double bv = p[base];
                    for (int64_t cand : {base + 1, base + w, base + w + 1})
                        if (p[cand] > bv) {
                            bv = p[cand];
                            best = cand;
                        }
                    out[oi] = bv;
                    argmax[static_cast<size_t>(oi)] =
                        (static_cast<int64_t>(s) * c + ch) * h * w + best;
                    ++oi;
                }
        }
    TapeNode* xn = x.node();
    return tape.op(std::move(out), {x}, [xn, argmax = std::move(argmax)](TapeNode& nd) {
        if (!xn->requires_grad) return;
        const double* g = nd.grad.data();
        double* d = xn->grad.data();
        for (size_t i = 0; i < argmax.size(); ++i) d[argmax[i]] += g[i];
    });
}

inline Var concat_channels(Tape& tape, Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.ndim() != 4 || bv.ndim() != 4 || av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2) ||
        av.dim(3) != bv.dim(3))
        fail_arg("concat_channels: incompatible shapes " + av.shape_str() + " vs " +
                 bv.shape_str());
    int n = av.dim(0), ca = av.dim(1), cb = bv.dim(1), h = av.dim(2), w = av.dim(3);
    int64_t hw = static_cast<int64_t>(h) * w;
    Tensor out({n, ca + cb, h, w});
    for (int s = 0; s < n; ++s) {
        std::copy(av.data() + static_cast<int64_t>(s) * ca * hw,
                  av.data() + static_cast<int64_t>(s + 1) * ca * hw,
                  out.data() + static_cast<int64_t>(s) * (ca + cb) * hw);
        std::copy(bv.data() + static_cast<int64_t>(s) * cb * hw,
                  bv.data() + static_cast<int64_t>(s + 1) * cb * hw,
                  out.data() + (static_cast<int64_t>(s) * (ca + cb) + ca) * hw);
    }
    TapeNode* an = a.node();
    TapeNode* bn = b.node();
    return tape.op(std::move(out), {a, b}, [an, bn, n, ca, cb, hw](TapeNode& nd) {
        const double* g = nd.grad.data();
        for (int s = 0; s < n; ++s) {
            if (an->requires_grad) {
                double* d = an->grad.data() + static_cast<int64_t>(s) * ca * hw;
                const double* gs = g + static_cast<int64_t>(s) * (ca + cb) * hw;
                for (int64_t i = 0; i < ca * hw; ++i) d[i] += gs[i];
            }
            if (bn->requires_grad) {
                double* d = bn->grad.data() + static_cast<int64_t>(s) * cb * hw;
                const double* gs = g + (static_cast<int64_t>(s) * (ca + cb) + ca) * hw;
                for (int64_t i = 0; i < cb * hw; ++i) d[i] += gs[i];
            }
        }
    });
}

/// (N, C, H, W) -> (N, C) spatial mean.
inline Var global_avg_pool(Tape& tape, Var x) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) fail_arg("global_avg_pool expects (N, C, H, W)");
    int n = xv.dim(0), c = xv.dim(1);
    int64_t hw = static_cast<int64_t>(xv.dim(2)) * xv.dim(3);
    Tensor out({n, c});
    for (int s = 0; s < n; ++s)
        for (int ch = 0; ch < c; ++ch) {
            const double* p = xv.data() + (static_cast<int64_t>(s) * c + ch) * hw;
            double acc = 0.0;
            for (int64_t i = 0; i < hw; ++i) acc += p[i];
            out[static_cast<int64_t>(s) * c + ch] = acc / static_cast<double>(hw);
        }
    TapeNode* xn = x.node();
    return tape.op(std::move(out), {x}, [xn, n, c, hw](TapeNode& nd) {
        if (!xn->requires_grad) return;
        const double* g = nd.grad.data();
        for (int s = 0; s < n; ++s)
            for (int ch = 0; ch < c; ++ch) {
                double gv = g[static_cast<int64_t>(s) * c + ch] / static_cast<double>(hw);
                double* d = xn->grad.data() + (static_cast<int64_t>(s) * c + ch) * hw;
                for (int64_t i = 0; i < hw; ++i) d[i] += gv;
            }
    });
}

/// Row-wise softmax of (N, K) logits, numerically shifted by the row max.
inline Var softmax(Tape& tape, Var logits) {
    const Tensor& z = logits.value();
    if (z.ndim() != 2) fail_arg("softmax expects (N, K)");
    int n = z.dim(0), k = z.dim(1);
    Tensor out({n, k});
    for (int s = 0; s < n; ++s) {
        const double* p = z.data() + static_cast<int64_t>(s) * k;
        double* o = out.data() + static_cast<int64_t>(s) * k;
        double mx = p[0];
        for (int i = 1; i < k; ++i) mx = std::max(mx, p[i]);
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            o[i] = std::exp(p[i] - mx);
            sum += o[i];
        }
        for (int i = 0; i < k; ++i) o[i] /= sum;
    }
    TapeNode* zn = logits.node();
    return tape.op(std::move(out), {logits}, [zn, n, k](TapeNode& nd) {
        if (!zn->requires_grad) return;
        const double* y = nd.value.data();
        const double* g = nd.grad.data();
        for (int s = 0; s < n; ++s) {
            const double* ys = y + static_cast<int64_t>(s) * k;
            const double* gs = g + static_cast<int64_t>(s) * k;
            double* d = zn->grad.data() + static_cast<int64_t>(s) * k;
            double dot = 0.0;
            for (int i = 0; i < k; ++i) dot += gs[i] * ys[i];
            for (int i = 0; i < k; ++i) d[i] += ys[i] * (gs[i] - dot);
        }
    });
}

/// Mean over the batch of -log(max(p[label], floor)).
inline Var cross_entropy_mean(Tape& tape, Var probs, const std::vector<int>& labels,
                              double floor = 1e-12) {
    const Tensor& p = probs.value();
    if (p.ndim() != 2) fail_arg("cross_entropy_mean expects (N, K) probabilities");
    int n = p.dim(0), k = p.dim(1);
    if (static_cast<int>(labels.size()) != n) fail_arg("cross_entropy_mean: label count mismatch");
    for (int lbl : labels)
        if (lbl < 0 || lbl >= k)
            fail_arg("cross_entropy label " + std::to_string(lbl) + " out of range [0, " +
                     std::to_string(k) + ")");
    Tensor out({1});
    double acc = 0.0;
    for (int s = 0; s < n; ++s)
        acc -= std::log(std::max(p[static_cast<int64_t>(s) * k + labels[static_cast<size_t>(s)]], floor));
    out[0] = acc / static_cast<double>(n);
    TapeNode* pn = probs.node();
    return tape.op(std::move(out), {probs}, [pn, labels, n, k, floor](TapeNode& nd) {
        if (!pn->requires_grad) return;
        double g = nd.grad[0] / static_cast<double>(n);
        for (int s = 0; s < n; ++s) {
            int64_t idx = static_cast<int64_t>(s) * k + labels[static_cast<size_t>(s)];
            double pv = pn->value[idx];
            if (pv >= floor) pn->grad[idx] -= g / pv;
        }
    });
}

/// Channelwise Gaussian smoothing (reflect padding, same size) on (N, C, H, W).
inline Var gaussian_blur(Tape& tape, Var x, std::vector<double> taps) {
    Tensor out = smooth_reflect(x.value(), taps);
    TapeNode* xn = x.node();
    return tape.op(std::move(out), {x}, [xn, taps = std::move(taps)](TapeNode& nd) {
        if (!xn->requires_grad) return;
        detail::accumulate(xn, smooth_reflect_adjoint(nd.grad, taps));
    });
}

/// Valid-region channelwise Gaussian correlation on (N, C, H, W).
inline Var gaussian_blur_valid(Tape& tape, Var x, std::vector<double> taps) {
    const Tensor& xv = x.value();
    int h = xv.dim(xv.ndim() - 2), w = xv.dim(xv.ndim() - 1);
    Tensor out = smooth_valid(xv, taps);
    TapeNode* xn = x.node();
    return tape.op(std::move(out), {x}, [xn, taps = std::move(taps), h, w](TapeNode& nd) {
        if (!xn->requires_grad) return;
        detail::accumulate(xn, smooth_valid_adjoint(nd.grad, taps, h, w));
    });
}

}  // namespace csrip
