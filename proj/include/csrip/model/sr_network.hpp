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

#include <array>
#include <string>
#include <vector>

#include "csrip/data/image.hpp"
#include "csrip/nn/layers.hpp"

namespace csrip {

/// Generator hyperparameters. The reference configuration is width 512 with
/// p = 7 blocks per module; width_multiplier scales every filter count so the
/// same topology trains on a CPU in minutes.
struct NetworkConfig {
    int base_width = 512;
    double width_multiplier = 1.0 / 16.0;
    int blocks_per_module = 3;  // p
    int stem_kernel = 9;
    int block_kernel = 3;
    int head_kernel = 9;
    double lrelu_slope = 0.2;
    double bn_eps = 1e-5;
    double bn_momentum = 0.9;

    /// Effective base filter count after scaling.
    int width() const {
        return static_cast<int>(std::lround(base_width * width_multiplier));
    }

    void validate() const {
        int w = width();
        // /8 keeps every module width and the post-shuffle channel count integral
        if (w <= 0 || w % 8 != 0)
            fail_arg("network width " + std::to_string(w) +
                     " must be a positive multiple of 8 (width * width_multiplier)");
        if (blocks_per_module < 1) fail_arg("blocks_per_module must be >= 1");
    }
};

/// One 2x stage: residual blocks at a fixed width, a channel-doubling
/// convolution, then sub-pixel upscaling.
struct SRModule {
    std::vector<ResidualBlock> blocks;
    Conv2d pre_upscale;

    void build(const std::string& name, int ch, int p, const NetworkConfig& cfg, Rng& rng) {
        blocks.resize(static_cast<size_t>(p));
        for (int i = 0; i < p; ++i)
            blocks[static_cast<size_t>(i)].build(name + ".block" + std::to_string(i), ch, ch,
                                                 cfg.block_kernel, cfg.lrelu_slope, rng);
        pre_upscale.build(name + ".preup", ch, 2 * ch, cfg.block_kernel, rng);
    }

    /// -> (2*ch/4) channels at twice the resolution.
    Var forward(FwdCtx& ctx, Var x, double slope) {
        for (auto& b : blocks) x = b.forward(ctx, x);
        x = pre_upscale.forward(ctx, x);
        x = pixel_shuffle(ctx.tape, x, 2);
        return leaky_relu(ctx.tape, x, slope);
    }

    void collect(std::vector<Parameter*>& out) {
        for (auto& b : blocks) b.collect(out);
        pre_upscale.collect(out);
    }
};

struct SROutputVars {
    Var sr2x, sr4x, sr8x;
};

struct SROutputs {
    Tensor sr2x, sr4x, sr8x;  // sr2x/sr4x empty for the single-output generator
};

/// The 8x generator. Cascaded form: stem, three SR modules with supervision
/// branches at 2x and 4x, a final residual block and the RGB head. The
/// non-cascaded form keeps the same block budget at the stem width and
/// performs all three upscalings at the end.
struct SRNetwork {
    NetworkConfig config;
    bool cascaded = true;
    uint64_t init_seed = 0;

    Conv2d stem;
    std::array<SRModule, 3> modules;         // cascaded
    std::vector<ResidualBlock> trunk;        // baseline blocks (3p at stem width)
    std::array<Conv2d, 3> upscale_convs;     // baseline pre-shuffle convs
    Conv2d branch2x, branch4x;               // cascaded supervision heads
    ResidualBlock final_block;               // cascaded
    Conv2d head;

    /// Branch taps are produced only when `want_branches` is set; the trunk
    /// computation is identical either way.
    SROutputVars forward(FwdCtx& ctx, Var lr, bool want_branches) {
        const Tensor& in = lr.value();
        if (in.ndim() != 4 || in.dim(1) != 3 || in.dim(2) != 24 || in.dim(3) != 24)
            fail_arg("generator expects (N, 3, 24, 24) input, got " + in.shape_str());
        double slope = config.lrelu_slope;
        Tape& tape = ctx.tape;
        SROutputVars out;
        Var x = leaky_relu(tape, stem.forward(ctx, lr), slope);
        if (cascaded) {
            x = modules[0].forward(ctx, x, slope);
            if (want_branches) out.sr2x = clip_rgb(tape, branch2x.forward(ctx, x));
            x = modules[1].forward(ctx, x, slope);
            if (want_branches) out.sr4x = clip_rgb(tape, branch4x.forward(ctx, x));
            x = modules[2].forward(ctx, x, slope);
            x = final_block.forward(ctx, x);
        } else {
            for (auto& b : trunk) x = b.forward(ctx, x);
            for (auto& up : upscale_convs) {
                x = up.forward(ctx, x);
                x = pixel_shuffle(tape, x, 2);
                x = leaky_relu(tape, x, slope);
            }
        }
        out.sr8x = clip_rgb(tape, head.forward(ctx, x));
        return out;
    }

    /// Inference: running batch-norm statistics, no branches, final scale only.
    Tensor infer(const Tensor& lr_single) {
        require_image_size(lr_single, 24, "generator input");
        Tape tape;
        FwdCtx ctx(tape, false, false);
        Var in = tape.leaf(lr_single.reshaped({1, 3, 24, 24}));
        SROutputVars out = forward(ctx, in, false);
        return out.sr8x.value().reshaped({3, 192, 192});
    }

    /// All intermediate taps of one image (branch heads included).
    SROutputs infer_all(const Tensor& lr_single) {
        require_image_size(lr_single, 24, "generator input");
        Tape tape;
        FwdCtx ctx(tape, false, false);
        Var in = tape.leaf(lr_single.reshaped({1, 3, 24, 24}));
        SROutputVars out = forward(ctx, in, cascaded);
        SROutputs res;
        res.sr8x = out.sr8x.value().reshaped({3, 192, 192});
        if (cascaded) {
            res.sr2x = out.sr2x.value().reshaped({3, 48, 48});
            res.sr4x = out.sr4x.value().reshaped({3, 96, 96});
        }
        return res;
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        stem.collect(out);
        if (cascaded) {
            for (auto& m : modules) m.collect(out);
            branch2x.collect(out);
            branch4x.collect(out);
            final_block.collect(out);
        } else {
            for (auto& b : trunk) b.collect(out);
            for (auto& up : upscale_convs) up.collect(out);
        }
        head.collect(out);
        return out;
    }

    /// Batch-norm running statistics, in a stable order (for checkpoints).
    std::vector<std::pair<std::string, Tensor*>> state_tensors() {
        std::vector<std::pair<std::string, Tensor*>> out;
        auto add_block = [&](ResidualBlock& b) {
            out.emplace_back(b.bn1.gamma.name + ".rmean", &b.bn1.running_mean);
            out.emplace_back(b.bn1.gamma.name + ".rvar", &b.bn1.running_var);
            out.emplace_back(b.bn2.gamma.name + ".rmean", &b.bn2.running_mean);
            out.emplace_back(b.bn2.gamma.name + ".rvar", &b.bn2.running_var);
        };
        if (cascaded) {
            for (auto& m : modules)
                for (auto& b : m.blocks) add_block(b);
            add_block(final_block);
        } else {
            for (auto& b : trunk) add_block(b);
        }
        return out;
    }

    int64_t param_count() {
        int64_t n = 0;
        for (Parameter* p : parameters()) n += p->value.numel();
        return n;
    }

    uint64_t param_hash() {
        uint64_t h = 1469598103934665603ull;
        for (Parameter* p : parameters())
            h = fnv1a(p->value.data(), static_cast<size_t>(p->value.numel()) * sizeof(double), h);
        return h;
    }
};

/// Cascaded generator with deterministic initialization.
inline SRNetwork build_network(const NetworkConfig& config, uint64_t seed) {
    config.validate();
    SRNetwork net;
    net.config = config;
    net.cascaded = true;
    net.init_seed = seed;
    Rng rng(derive_seed(seed, "sr_network"));
    int w = config.width();
    net.stem.build("stem", 3, w, config.stem_kernel, rng);
    net.modules[0].build("module1", w, config.blocks_per_module, config, rng);
    net.modules[1].build("module2", w / 2, config.blocks_per_module, config, rng);
    net.modules[2].build("module3", w / 4, config.blocks_per_module, config, rng);
    net.branch2x.build("branch2x", w / 2, 3, config.head_kernel, rng);
    net.branch4x.build("branch4x", w / 4, 3, config.head_kernel, rng);
    // the last shuffle leaves w/8 channels; the block widens to w/4 inside
    net.final_block.build("final_block", w / 8, w / 4, config.block_kernel, config.lrelu_slope,
                          rng);
    net.head.build("head", w / 8, 3, config.head_kernel, rng);
    return net;
}

/// Non-cascaded reference: the same 3p-block budget at stem width, with all
/// three sub-pixel upscalings stacked at the end.
inline SRNetwork build_baseline_network(const NetworkConfig& config, uint64_t seed) {
    config.validate();
    SRNetwork net;
    net.config = config;
    net.cascaded = false;
    net.init_seed = seed;
    Rng rng(derive_seed(seed, "sr_baseline"));
    int w = config.width();
    net.stem.build("stem", 3, w, config.stem_kernel, rng);
    int p = 3 * config.blocks_per_module;
    net.trunk.resize(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i)
        net.trunk[static_cast<size_t>(i)].build("trunk.block" + std::to_string(i), w, w,
                                                config.block_kernel, config.lrelu_slope, rng);
    net.upscale_convs[0].build("up1", w, 2 * w, config.block_kernel, rng);
    net.upscale_convs[1].build("up2", w / 2, w, config.block_kernel, rng);
    net.upscale_convs[2].build("up3", w / 4, w / 2, config.block_kernel, rng);
    net.head.build("head", w / 8, 3, config.head_kernel, rng);
    return net;
}

}  // namespace csrip
