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
#include <cstdint>
#include <random>
#include <string_view>

#include "csrip/core/common.hpp"

namespace csrip {

// Every random decision in the pipeline is keyed by (base seed, purpose tag,
// counters) instead of by shared mutable generator state. That makes epoch
// replay, multi-worker iteration and checkpoint resume reproduce the exact
// same streams by construction.
inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a = 0,
                            uint64_t b = 0) {
    uint64_t h = fnv1a(tag.data(), tag.size(), base ^ 0x9e3779b97f4a7c15ull);
    // splitmix64 finalizer over the counters
    for (uint64_t x : {a + 0x9e3779b97f4a7c15ull, b + 0xbf58476d1ce4e5b9ull}) {
        h += x;
        h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
        h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
        h ^= h >> 31;
    }
    return h;
}

/// Deterministic random stream. Distributions are hand-rolled on top of
/// mt19937_64 so sequences do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, no cached pair).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n). Modulo bias is irrelevant at our n.
    int uniform_int(int n) {
        return static_cast<int>(eng_() % static_cast<uint64_t>(n));
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
};

}  // namespace csrip
