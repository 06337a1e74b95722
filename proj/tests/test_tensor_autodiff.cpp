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

#include <catch2/catch_amalgamated.hpp>

#include "csrip/nn/adam.hpp"
#include "csrip/nn/layers.hpp"
#include "csrip/nn/ops.hpp"
#include "support/oracles.hpp"

using namespace csrip;
using namespace csrip::testing;

TEST_CASE("tensor basics") {
    Tensor t({2, 3, 4});
    REQUIRE(t.numel() == 24);
    REQUIRE(t.shape_str() == "(2, 3, 4)");
    t.at(1, 2, 3) = 7.5;
    REQUIRE(t[23] == 7.5);
    REQUIRE_THROWS_AS(Tensor::from_data({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(Tensor({0, 3}), std::invalid_argument);
}

TEST_CASE("rng determinism and flip frequency") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
    Rng c(7);
    int flips = 0;
    for (int i = 0; i < 10000; ++i)
        if (c.bernoulli(0.5)) ++flips;
    double freq = flips / 10000.0;
    REQUIRE(freq > 0.47);
    REQUIRE(freq < 0.53);
}

TEST_CASE("elementwise op values") {
    Tape tape;
    Var a = tape.leaf(Tensor::from_data({3}, {1.0, 2.0, 3.0}));
    Var b = tape.leaf(Tensor::from_data({3}, {4.0, 5.0, 6.0}));
    REQUIRE(add(tape, a, b).value()[1] == 7.0);
    REQUIRE(sub(tape, b, a).value()[2] == 3.0);
    REQUIRE(mul(tape, a, b).value()[0] == 4.0);
    REQUIRE(divide(tape, b, a).value()[1] == 2.5);
    REQUIRE(mean_all(tape, a).value()[0] == 2.0);
    REQUIRE(add_const(tape, a, 1.5).value()[0] == 2.5);
    REQUIRE(mul_const(tape, a, -2.0).value()[2] == -6.0);
}

TEST_CASE("clip gradient gating") {
    Tape tape;
    Var x = tape.leaf(Tensor::from_data({3}, {300.0, -5.0, 128.0}), true);
    Var y = clip_rgb(tape, x);
    REQUIRE(y.value()[0] == 255.0);
    REQUIRE(y.value()[1] == 0.0);
    REQUIRE(y.value()[2] == 128.0);
    Var loss = mean_all(tape, y);
    tape.backward(loss);
    REQUIRE(x.grad()[0] == 0.0);
    REQUIRE(x.grad()[1] == 0.0);
    REQUIRE(x.grad()[2] == 1.0 / 3.0);

    // idempotence
    Tape t2;
    Rng rng(5);
    Tensor r = random_tensor({2, 4, 4}, rng, -100.0, 400.0);
    Var v = t2.leaf(r);
    Var once = clip_rgb(t2, v);
    Var twice = clip_rgb(t2, once);
    for (int64_t i = 0; i < r.numel(); ++i) REQUIRE(once.value()[i] == twice.value()[i]);
}

namespace {

// Analytic gradient of a scalar functional built on a fresh tape.
template <class Build>
Tensor tape_gradient(const Tensor& x, Build build) {
    Tape tape;
    Var xv = tape.leaf(x, true);
    Var loss = build(tape, xv);
    tape.backward(loss);
    return xv.grad();
}

template <class Build>
void check_gradient(const Tensor& x, Build build, double tol = 1e-6, double h = 1e-5) {
    Tensor analytic = tape_gradient(x, build);
    Tensor numeric = fd_gradient(
        x,
        [&](const Tensor& xt) {
            Tape tape;
            Var xv = tape.leaf(xt, false);
            return build(tape, xv).value()[0];
        },
        h);
    REQUIRE(max_rel_error(analytic, numeric) < tol);
}

}  // namespace

TEST_CASE("gradients of elementwise chains match finite differences") {
    Rng rng(11);
    Tensor x = random_tensor({2, 3, 5}, rng, 0.5, 2.0);
    Tensor other = random_tensor({2, 3, 5}, rng, 0.5, 2.0);

    check_gradient(x, [&](Tape& t, Var v) {
        Var o = t.leaf(other);
        return mean_all(t, mul(t, add(t, v, o), sub(t, v, o)));
    });
    check_gradient(x, [&](Tape& t, Var v) {
        Var o = t.leaf(other);
        return mean_all(t, divide(t, o, add_const(t, mul(t, v, v), 0.3)));
    });
    check_gradient(x, [&](Tape& t, Var v) {
        return mean_all(t, leaky_relu(t, add_const(t, v, -1.2), 0.2));
    });
}

TEST_CASE("conv2d forward matches the nested-loop oracle") {
    Rng rng(21);
    for (auto [cin, cout, k, h, w] :
         {std::tuple{3, 5, 3, 8, 8}, {1, 1, 1, 4, 6}, {4, 2, 9, 12, 10}}) {
        Tensor x = random_tensor({2, cin, h, w}, rng, -1.0, 1.0);
        Tensor wt = random_tensor({cout, cin, k, k}, rng, -0.5, 0.5);
        Tensor b = random_tensor({cout}, rng, -0.2, 0.2);
        Tensor got = conv2d_forward(x, wt, b);
        Tensor want = conv_layer_oracle(x, wt, b);
        REQUIRE(max_rel_error(got, want, 1e-9) < 1e-10);
    }
}

TEST_CASE("conv2d gradients match finite differences") {
    Rng rng(22);
    Tensor x = random_tensor({2, 3, 6, 6}, rng, -1.0, 1.0);
    Tensor w = random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5);
    Tensor b = random_tensor({4}, rng, -0.1, 0.1);

    check_gradient(x, [&](Tape& t, Var v) {
        return mean_all(t, conv2d(t, v, t.leaf(w), t.leaf(b)));
    });
    check_gradient(w, [&](Tape& t, Var v) {
        return mean_all(t, conv2d(t, t.leaf(x), v, t.leaf(b)));
    });
    check_gradient(b, [&](Tape& t, Var v) {
        return mean_all(t, conv2d(t, t.leaf(x), t.leaf(w), v));
    });
}

TEST_CASE("batch norm gradients, both statistics modes") {
    Rng rng(23);
    Tensor x = random_tensor({3, 2, 4, 4}, rng, -2.0, 2.0);
    Tensor gamma = random_tensor({2}, rng, 0.5, 1.5);
    Tensor beta = random_tensor({2}, rng, -0.5, 0.5);
    Tensor rm = random_tensor({2}, rng, -0.3, 0.3);
    Tensor rv = random_tensor({2}, rng, 0.5, 1.5);

    for (bool batch_stats : {true, false}) {
        auto build = [&](Tape& t, Var v) {
            Tensor rmc = rm, rvc = rv;
            Var g = t.leaf(gamma);
            Var bt = t.leaf(beta);
            Var y = batch_norm(t, v, g, bt, rmc, rvc, batch_stats, false, 1e-5, 0.9);
            // square the output so the mean gradient is non-trivial
            return mean_all(t, mul(t, y, y));
        };
        // batch statistics couple every element; the larger step keeps the
        // central-difference roundoff below tolerance
        check_gradient(x, build, 1e-5, 1e-3);
    }
    // gamma/beta gradients in batch mode
    Tensor rmc = rm, rvc = rv;
    check_gradient(gamma, [&](Tape& t, Var g) {
        Var v = t.leaf(x);
        Var bt = t.leaf(beta);
        Var y = batch_norm(t, v, g, bt, rmc, rvc, true, false, 1e-5, 0.9);
        return mean_all(t, mul(t, y, y));
    });
    check_gradient(beta, [&](Tape& t, Var bt) {
        Var v = t.leaf(x);
        Var g = t.leaf(gamma);
        Var y = batch_norm(t, v, g, bt, rmc, rvc, true, false, 1e-5, 0.9);
        return mean_all(t, mul(t, y, y));
    });
}

TEST_CASE("pixel shuffle ordering, bijection and oracle") {
    // forced ordering on a single 2x2 group
    Tape tape;
    Var x = tape.leaf(Tensor::from_data({1, 4, 1, 1}, {1.0, 2.0, 3.0, 4.0}));
    Var y = pixel_shuffle(tape, x, 2);
    REQUIRE(y.value().shape() == std::vector<int>{1, 1, 2, 2});
    REQUIRE(y.value()[0] == 1.0);
    REQUIRE(y.value()[1] == 2.0);
    REQUIRE(y.value()[2] == 3.0);
    REQUIRE(y.value()[3] == 4.0);

    Rng rng(31);
    Tensor in = random_tensor({2, 8, 3, 3}, rng, -1.0, 1.0);
    Tensor out = pixel_shuffle_forward(in, 2);
    // index-by-index remap oracle
    for (int n = 0; n < 2; ++n)
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    REQUIRE(out.at(n, c, i, j) ==
                            in.at(n, c * 4 + (i % 2) * 2 + (j % 2), i / 2, j / 2));
    // bijection: unshuffle inverts exactly
    Tensor back = pixel_unshuffle(out, 2);
    for (int64_t i = 0; i < in.numel(); ++i) REQUIRE(back[i] == in[i]);

    check_gradient(in, [&](Tape& t, Var v) {
        Var s = pixel_shuffle(t, v, 2);
        return mean_all(t, mul(t, s, s));
    });

    REQUIRE_THROWS_AS(pixel_shuffle_forward(Tensor({1, 3, 2, 2}), 2), std::invalid_argument);
}

TEST_CASE("max pool, concat, global average pool") {
    Rng rng(41);
    Tensor x = random_tensor({2, 3, 6, 6}, rng, -1.0, 1.0);
    check_gradient(x, [&](Tape& t, Var v) {
        return mean_all(t, mul(t, max_pool2(t, v), max_pool2(t, v)));
    }, 1e-6, 1e-6);
    Tensor b = random_tensor({2, 2, 6, 6}, rng, -1.0, 1.0);
    check_gradient(x, [&](Tape& t, Var v) {
        Var c = concat_channels(t, v, t.leaf(b));
        return mean_all(t, mul(t, c, c));
    });
    check_gradient(x, [&](Tape& t, Var v) {
        Var g = global_avg_pool(t, v);
        return mean_all(t, mul(t, g, g));
    });
}

TEST_CASE("softmax and cross entropy") {
    Rng rng(51);
    Tensor logits = random_tensor({3, 5}, rng, -2.0, 2.0);
    std::vector<int> labels{1, 4, 0};

    Tape tape;
    Var p = softmax(tape, tape.leaf(logits));
    for (int s = 0; s < 3; ++s) {
        double sum = 0.0;
        for (int k = 0; k < 5; ++k) {
            double v = p.value()[s * 5 + k];
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }

    check_gradient(logits, [&](Tape& t, Var v) {
        return cross_entropy_mean(t, softmax(t, v), labels);
    });

    REQUIRE_THROWS_AS(
        [&] {
            Tape t;
            cross_entropy_mean(t, softmax(t, t.leaf(logits)), {1, 9, 0});
        }(),
        std::invalid_argument);
}

TEST_CASE("gaussian blur ops match dense oracles and finite differences") {
    Rng rng(61);
    Tensor img = random_tensor({1, 3, 12, 12}, rng, 0.0, 255.0);
    auto taps = gaussian_taps_1d(7, 1.0);
    GaussianKernel k2 = gaussian_kernel(7, 1.0);

    Tensor blurred = smooth_reflect(img, taps);
    Tensor img3 = Tensor::from_data({3, 12, 12},
                                    std::vector<double>(img.data(), img.data() + img.numel()));
    Tensor want = conv_channelwise_oracle(img3, k2.taps, OraclePad::reflect101);
    REQUIRE(max_rel_error(blurred, want, 1e-9) < 1e-10);

    Tensor valid = smooth_valid(img, taps);
    Tensor want_valid = conv_channelwise_oracle(img3, k2.taps, OraclePad::valid);
    REQUIRE(valid.shape() == std::vector<int>{1, 3, 6, 6});
    REQUIRE(max_rel_error(valid, want_valid, 1e-9) < 1e-10);

    Tensor small = random_tensor({1, 2, 8, 8}, rng, 0.0, 10.0);
    auto taps5 = gaussian_taps_1d(5, 1.0);
    check_gradient(small, [&](Tape& t, Var v) {
        Var y = gaussian_blur(t, v, taps5);
        return mean_all(t, mul(t, y, y));
    });
    check_gradient(small, [&](Tape& t, Var v) {
        Var y = gaussian_blur_valid(t, v, taps5);
        return mean_all(t, mul(t, y, y));
    });
}

TEST_CASE("residual block: zero weights reduce to the activation of the skip") {
    Rng rng(71);
    ResidualBlock block;
    block.build("blk", 3, 5, 3, 0.2, rng);
    // zero out convs; batch norms start as identity with zero running stats
    block.conv1.weight.value.fill(0.0);
    block.conv2.weight.value.fill(0.0);

    Tensor x = random_tensor({2, 3, 4, 4}, rng, -2.0, 2.0);
    Tape tape;
    FwdCtx ctx{tape, false, false};  // eval: identity batch norm
    Var y = block.forward(ctx, tape.leaf(x));
    REQUIRE(y.value().shape() == x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) {
        double want = x[i] > 0.0 ? x[i] : 0.2 * x[i];
        REQUIRE(std::abs(y.value()[i] - want) < 1e-12);
    }

    // channel mismatch rejected
    Tape t2;
    FwdCtx ctx2{t2, false, false};
    REQUIRE_THROWS_AS(block.forward(ctx2, t2.leaf(Tensor({2, 4, 4, 4}))),
                      std::invalid_argument);
}

TEST_CASE("residual block matches nested-loop convolution oracle") {
    Rng rng(72);
    ResidualBlock block;
    block.build("blk", 8, 8, 3, 0.2, rng);
    Tensor x = random_tensor({1, 8, 6, 6}, rng, -1.0, 1.0);

    Tape tape;
    FwdCtx ctx{tape, false, false};
    Var y = block.forward(ctx, tape.leaf(x));

    auto lrelu = [](Tensor t, double s) {
        for (int64_t i = 0; i < t.numel(); ++i)
            if (t[i] < 0.0) t[i] *= s;
        return t;
    };
    // eval-mode batch norm with fresh stats is x / sqrt(1 + eps)
    auto bn_identity = [](Tensor t) {
        double scale = 1.0 / std::sqrt(1.0 + 1e-5);
        for (int64_t i = 0; i < t.numel(); ++i) t[i] *= scale;
        return t;
    };
    Tensor mid = lrelu(bn_identity(conv_layer_oracle(x, block.conv1.weight.value,
                                                     block.conv1.bias.value)),
                       0.2);
    Tensor out = bn_identity(
        conv_layer_oracle(mid, block.conv2.weight.value, block.conv2.bias.value));
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += x[i];
    out = lrelu(std::move(out), 0.2);
    REQUIRE(max_rel_error(y.value(), out, 1e-9) < 1e-5);
}

TEST_CASE("adam minimizes a quadratic") {
    Parameter p;
    p.init_shape("p", {4});
    for (int i = 0; i < 4; ++i) p.value[i] = static_cast<double>(i + 1);
    Adam opt({&p});
    for (int step = 0; step < 400; ++step) {
        opt.zero_grad();
        for (int i = 0; i < 4; ++i) p.grad[i] = 2.0 * (p.value[i] - 0.5);
        opt.step(0.05);
    }
    for (int i = 0; i < 4; ++i) REQUIRE(std::abs(p.value[i] - 0.5) < 1e-3);
}
