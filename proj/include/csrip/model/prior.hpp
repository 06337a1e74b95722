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
#include <vector>

#include "csrip/data/degrade.hpp"
#include "csrip/nn/layers.hpp"

namespace csrip {

/// Squeeze/expand block: 1x1 squeeze, parallel 1x1 and 3x3 expands,
/// channel concatenation, identity bypass whenever shapes allow.
struct FireModule {
    int in_ch = 0, out_ch = 0;
    bool shortcut = false;
    Conv2d squeeze, expand1, expand3;

    void build(const std::string& name, int in, int s, int e, Rng& rng) {
        in_ch = in;
        out_ch = 2 * e;
        shortcut = (in_ch == out_ch);
        squeeze.build(name + ".squeeze", in, s, 1, rng);
        expand1.build(name + ".expand1", s, e, 1, rng);
        expand3.build(name + ".expand3", s, e, 3, rng);
    }

    Var forward(FwdCtx& ctx, Var x) {
        Tape& tape = ctx.tape;
        Var sq = relu(tape, squeeze.forward(ctx, x));
        Var out = concat_channels(tape, relu(tape, expand1.forward(ctx, sq)),
                                  relu(tape, expand3.forward(ctx, sq)));
        return shortcut ? add(tape, out, x) : out;
    }

    void collect(std::vector<Parameter*>& out) {
        squeeze.collect(out);
        expand1.collect(out);
        expand3.collect(out);
    }
};

/// Identity classifier over residual-detail images at one fixed scale.
/// Nine fire modules with bypasses at matching shapes, pooling after the stem
/// and after every third module, a 1x1 class convolution, global average
/// pooling and softmax. Signed residual inputs are scaled by 1/128 before the
/// first convolution.
struct RecognitionModel {
    int input_size = 0;     // 48, 96 or 192
    int num_classes = 0;    // K
    double width_multiplier = 1.0;
    bool frozen = false;
    uint64_t init_seed = 0;

    Conv2d conv_in;
    std::vector<FireModule> fires;  // 9
    Conv2d conv_classes;

    static constexpr double kInputScale = 1.0 / 128.0;

    /// (N, 3, S, S) residuals -> (N, K) logits.
    Var forward_logits(FwdCtx& ctx, Var x) {
        const Tensor& in = x.value();
        if (in.ndim() != 4 || in.dim(1) != 3 || in.dim(2) != input_size ||
            in.dim(3) != input_size)
            fail_arg("recognition model expects (N, 3, " + std::to_string(input_size) + ", " +
                     std::to_string(input_size) + "), got " + in.shape_str());
        Tape& tape = ctx.tape;
        Var t = mul_const(tape, x, kInputScale);
        t = relu(tape, conv_in.forward(ctx, t));
        t = max_pool2(tape, t);
        for (size_t i = 0; i < fires.size(); ++i) {
            t = fires[i].forward(ctx, t);
            if (i == 2 || i == 5) t = max_pool2(tape, t);
        }
        t = conv_classes.forward(ctx, t);
        return global_avg_pool(tape, t);
    }

    Var forward_probs(FwdCtx& ctx, Var x) { return softmax(ctx.tape, forward_logits(ctx, x)); }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        conv_in.collect(out);
        for (auto& f : fires) f.collect(out);
        conv_classes.collect(out);
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

namespace detail {

inline int scaled_width(int base, double mult) {
    return std::max(1, static_cast<int>(std::lround(base * mult)));
}

}  // namespace detail

/// Deterministic recognition-model construction. Reference widths (multiplier
/// 1): 96-filter stem; squeeze widths 16,16,32,32,48,48,64,64,64 with
/// expand = 4x squeeze on each side.
inline RecognitionModel build_prior(int input_size, int num_classes, double width_multiplier,
                                    uint64_t seed) {
    if (input_size != 48 && input_size != 96 && input_size != 192)
        fail_arg("prior input size must be 48, 96 or 192, got " + std::to_string(input_size));
    if (num_classes < 2) fail_arg("prior needs at least 2 classes");
    RecognitionModel m;
    m.input_size = input_size;
    m.num_classes = num_classes;
    m.width_multiplier = width_multiplier;
    m.init_seed = seed;
    Rng rng(derive_seed(seed, "prior", static_cast<uint64_t>(input_size)));
    static constexpr int kSqueeze[9] = {16, 16, 32, 32, 48, 48, 64, 64, 64};
    int c = detail::scaled_width(96, width_multiplier);
    m.conv_in.build("p" + std::to_string(input_size) + ".conv_in", 3, c, 3, rng);
    m.fires.resize(9);
    for (int i = 0; i < 9; ++i) {
        int s = detail::scaled_width(kSqueeze[i], width_multiplier);
        int e = 4 * s;
        m.fires[static_cast<size_t>(i)].build(
            "p" + std::to_string(input_size) + ".fire" + std::to_string(i + 1), c, s, e, rng);
        c = 2 * e;
    }
    m.conv_classes.build("p" + std::to_string(input_size) + ".conv_classes", c, num_classes, 1,
                         rng);
    return m;
}

/// Class posterior for one residual image. The residual keeps its signed
/// values; only the shape is validated against the model's scale.
inline Tensor prior_forward(RecognitionModel& model, const ResidualImage& residual) {
    if (scale_size(residual.tag) != model.input_size)
        fail_arg(std::string("residual at scale ") + scale_name(residual.tag) +
                 " does not match prior input size " + std::to_string(model.input_size));
    require_image_size(residual.data, model.input_size, "prior_forward");
    Tape tape;
    FwdCtx ctx(tape, false, false);
    Var x = tape.leaf(residual.data.reshaped({1, 3, model.input_size, model.input_size}));
    Var probs = model.forward_probs(ctx, x);
    return probs.value().reshaped({model.num_classes});
}

/// -log p(label), with probabilities floored at 1e-12.
inline double cross_entropy(const Tensor& probs, int label) {
    if (probs.ndim() != 1) fail_arg("cross_entropy expects a probability vector");
    if (label < 0 || label >= probs.dim(0))
        fail_arg("cross_entropy label " + std::to_string(label) + " out of range [0, " +
                 std::to_string(probs.dim(0)) + ")");
    return -std::log(std::max(probs[label], 1e-12));
}

/// Fraction of samples whose top class matches the label; ties break to the
/// lowest class index.
inline double rank_one_accuracy(RecognitionModel& model,
                                const std::vector<std::pair<ResidualImage, int>>& samples) {
    if (samples.empty()) fail_arg("rank_one_accuracy on an empty set");
    int correct = 0;
    for (const auto& [residual, label] : samples) {
        Tensor probs = prior_forward(model, residual);
        int best = 0;
        for (int k = 1; k < probs.dim(0); ++k)
            if (probs[k] > probs[best]) best = k;
        if (best == label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace csrip
