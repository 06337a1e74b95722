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

#include "csrip/model/sr_network.hpp"
#include "support/oracles.hpp"

using namespace csrip;
using namespace csrip::testing;

namespace {

int64_t conv_params(int in, int out, int k) {
    return static_cast<int64_t>(out) * in * k * k + out;
}
int64_t bn_params(int c) { return 2 * c; }
int64_t block_params(int ch, int filt, int k) {
    return conv_params(ch, filt, k) + bn_params(filt) + conv_params(filt, ch, k) + bn_params(ch);
}

// Closed-form parameter census of the cascaded generator.
int64_t cascaded_census(int w, int p) {
    int64_t n = conv_params(3, w, 9);
    for (int c : {w, w / 2, w / 4}) n += p * block_params(c, c, 3) + conv_params(c, 2 * c, 3);
    n += conv_params(w / 2, 3, 9) + conv_params(w / 4, 3, 9);  // branches
    n += block_params(w / 8, w / 4, 3);
    n += conv_params(w / 8, 3, 9);
    return n;
}

int64_t baseline_census(int w, int p) {
    int64_t n = conv_params(3, w, 9);
    n += 3 * p * block_params(w, w, 3);
    n += conv_params(w, 2 * w, 3) + conv_params(w / 2, w, 3) + conv_params(w / 4, w / 2, 3);
    n += conv_params(w / 8, 3, 9);
    return n;
}

}  // namespace

TEST_CASE("reference configuration filter counts") {
    NetworkConfig cfg;
    cfg.base_width = 512;
    cfg.width_multiplier = 1.0;
    cfg.blocks_per_module = 1;  // block count does not change per-module widths
    SRNetwork net = build_network(cfg, 1);
    REQUIRE(net.modules[0].blocks[0].filters == 512);
    REQUIRE(net.modules[1].blocks[0].filters == 256);
    REQUIRE(net.modules[2].blocks[0].filters == 128);
    REQUIRE(net.modules[0].pre_upscale.out_ch == 1024);
    REQUIRE(net.modules[1].pre_upscale.out_ch == 512);
    REQUIRE(net.modules[2].pre_upscale.out_ch == 256);
    REQUIRE(net.final_block.filters == 128);  // width/4
    REQUIRE(net.final_block.channels == 64);  // what the last shuffle delivers
    REQUIRE(net.head.out_ch == 3);
    REQUIRE(net.head.ksize == 9);
}

TEST_CASE("desk configuration widths and parameter census") {
    NetworkConfig cfg;  // defaults: width 512, multiplier 1/16, p = 3
    REQUIRE(cfg.width() == 32);
    SRNetwork net = build_network(cfg, 7);
    REQUIRE(net.modules[0].blocks.size() == 3);
    REQUIRE(net.modules[0].blocks[0].filters == 32);
    REQUIRE(net.modules[1].blocks[0].filters == 16);
    REQUIRE(net.modules[2].blocks[0].filters == 8);
    REQUIRE(net.param_count() == cascaded_census(32, 3));

    SRNetwork base = build_baseline_network(cfg, 7);
    REQUIRE(base.param_count() == baseline_census(32, 3));
}

TEST_CASE("baseline keeps the full block budget with upscaling at the end") {
    NetworkConfig cfg;
    cfg.base_width = 16;
    cfg.width_multiplier = 1.0;
    cfg.blocks_per_module = 7;
    SRNetwork net = build_baseline_network(cfg, 3);
    REQUIRE(net.trunk.size() == 21);  // 3p residual blocks
    for (auto& b : net.trunk) REQUIRE(b.filters == 16);

    Rng rng(301);
    Tensor lr = random_tensor({3, 24, 24}, rng);
    Tensor out = net.infer(lr);
    REQUIRE(out.shape() == std::vector<int>{3, 192, 192});
}

TEST_CASE("deterministic initialization") {
    NetworkConfig cfg;
    SRNetwork a = build_network(cfg, 99);
    SRNetwork b = build_network(cfg, 99);
    SRNetwork c = build_network(cfg, 100);
    REQUIRE(a.param_hash() == b.param_hash());
    REQUIRE(a.param_hash() != c.param_hash());
}

TEST_CASE("config validation") {
    NetworkConfig bad;
    bad.base_width = 512;
    bad.width_multiplier = 1.0 / 128.0;  // width 4, not a multiple of 8
    REQUIRE_THROWS_AS(build_network(bad, 1), std::invalid_argument);
    NetworkConfig bad2;
    bad2.blocks_per_module = 0;
    REQUIRE_THROWS_AS(build_network(bad2, 1), std::invalid_argument);
}

TEST_CASE("forward shapes, clipping and wrong-input rejection") {
    NetworkConfig cfg;
    SRNetwork net = build_network(cfg, 5);
    Rng rng(302);
    Tensor lr = random_tensor({2, 3, 24, 24}, rng);

    Tape tape;
    FwdCtx ctx(tape, false, false);
    SROutputVars out = net.forward(ctx, tape.leaf(lr), true);
    REQUIRE(out.sr2x.value().shape() == std::vector<int>{2, 3, 48, 48});
    REQUIRE(out.sr4x.value().shape() == std::vector<int>{2, 3, 96, 96});
    REQUIRE(out.sr8x.value().shape() == std::vector<int>{2, 3, 192, 192});
    for (const Var* v : {&out.sr2x, &out.sr4x, &out.sr8x}) {
        REQUIRE(v->value().min_value() >= 0.0);
        REQUIRE(v->value().max_value() <= 255.0);
    }

    // adversarially scaled weights still clip into range
    for (Parameter* p : net.parameters())
        for (int64_t i = 0; i < p->value.numel(); ++i) p->value[i] *= 50.0;
    Tape t2;
    FwdCtx ctx2(t2, false, false);
    SROutputVars big = net.forward(ctx2, t2.leaf(lr), true);
    REQUIRE(big.sr8x.value().min_value() >= 0.0);
    REQUIRE(big.sr8x.value().max_value() <= 255.0);

    Tape t3;
    FwdCtx ctx3(t3, false, false);
    REQUIRE_THROWS_AS(net.forward(ctx3, t3.leaf(Tensor({1, 3, 48, 48})), true),
                      std::invalid_argument);
}

TEST_CASE("inference is deterministic and branch taps leave the trunk alone") {
    NetworkConfig cfg;
    SRNetwork net = build_network(cfg, 11);
    Rng rng(303);
    Tensor lr = random_tensor({3, 24, 24}, rng);

    Tensor once = net.infer(lr);
    Tensor twice = net.infer(lr);
    for (int64_t i = 0; i < once.numel(); ++i) REQUIRE(once[i] == twice[i]);

    // with-branches forward (frozen statistics) agrees bit for bit on sr8x
    Tape tape;
    FwdCtx ctx(tape, false, false);
    SROutputVars full = net.forward(ctx, tape.leaf(lr.reshaped({1, 3, 24, 24})), true);
    for (int64_t i = 0; i < once.numel(); ++i) REQUIRE(full.sr8x.value()[i] == once[i]);
}

TEST_CASE("pixel shuffle passes the exhaustive index oracle") {
    Rng rng(304);
    for (int c : {4, 8, 12, 16})
        for (int h = 1; h <= 4; ++h)
            for (int w = 1; w <= 4; ++w) {
                Tensor x = random_tensor({1, c, h, w}, rng, -1.0, 1.0);
                Tensor y = pixel_shuffle_forward(x, 2);
                for (int oc = 0; oc < c / 4; ++oc)
                    for (int i = 0; i < 2 * h; ++i)
                        for (int j = 0; j < 2 * w; ++j)
                            REQUIRE(y.at(0, oc, i, j) ==
                                    x.at(0, oc * 4 + (i % 2) * 2 + (j % 2), i / 2, j / 2));
            }
}

TEST_CASE("end-to-end gradient through the generator") {
    NetworkConfig cfg;
    cfg.base_width = 16;
    cfg.width_multiplier = 1.0;
    cfg.blocks_per_module = 1;
    SRNetwork net = build_network(cfg, 21);
    // center outputs mid-range so the clip layer stays out of the way
    net.head.bias.value.fill(128.0);

    Rng rng(305);
    Tensor lr = random_tensor({1, 3, 24, 24}, rng);
    Tensor mask = random_tensor({1, 3, 192, 192}, rng, 0.0, 1.0);

    // analytic gradient of the stem weights
    for (Parameter* p : net.parameters()) p->grad.fill(0.0);
    Tape tape;
    FwdCtx ctx(tape, true, true);
    SROutputVars out = net.forward(ctx, tape.leaf(lr), false);
    Var loss = mean_all(tape, mul(tape, out.sr8x, tape.leaf(mask)));
    tape.backward(loss);
    ctx.harvest_grads();

    Rng pick(306);
    for (int trial = 0; trial < 4; ++trial) {
        int64_t idx = pick.uniform_int(static_cast<int>(net.stem.weight.value.numel()));
        double orig = net.stem.weight.value[idx];
        double h = 1e-6;  // small enough that activation kinks are rarely crossed
        auto eval = [&](double v) {
            net.stem.weight.value[idx] = v;
            Tape t;
            FwdCtx c(t, false, true);
            SROutputVars o = net.forward(c, t.leaf(lr), false);
            return mean_all(t, mul(t, o.sr8x, t.leaf(mask))).value()[0];
        };
        double fd = (eval(orig + h) - eval(orig - h)) / (2.0 * h);
        net.stem.weight.value[idx] = orig;
        double analytic = net.stem.weight.grad[idx];
        double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
        REQUIRE(std::abs(fd - analytic) / denom < 1e-3);
    }
}
