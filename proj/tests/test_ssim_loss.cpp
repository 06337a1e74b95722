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

#include "csrip/loss/ssim.hpp"
#include "support/oracles.hpp"

using namespace csrip;
using namespace csrip::testing;

TEST_CASE("gaussian kernel construction") {
    GaussianKernel k1 = gaussian_kernel(1, 2.0);
    REQUIRE(k1.taps.numel() == 1);
    REQUIRE(k1.taps[0] == 1.0);

    GaussianKernel k = gaussian_kernel(11, 1.5);
    REQUIRE(std::abs(k.taps.sum() - 1.0) < 1e-12);

    // center tap equals exp(0) / Z with Z summed directly from the formula
    double z = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            double di = i - 5.0, dj = j - 5.0;
            z += std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
        }
    REQUIRE(std::abs(k.taps[5 * 11 + 5] - 1.0 / z) < 1e-12);

    // radial symmetry
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j)
            REQUIRE(k.taps[i * 11 + j] == k.taps[(10 - i) * 11 + (10 - j)]);

    REQUIRE_THROWS_AS(gaussian_kernel(4, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_kernel(5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_kernel(5, -1.0), std::invalid_argument);
}

TEST_CASE("similarity map of an image with itself is one") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor x = random_tensor({3, 24, 20}, rng);
        SimilarityMap m = ssim_map(x, x);
        REQUIRE(m.data.shape() == std::vector<int>{3, 14, 10});
        for (int64_t i = 0; i < m.data.numel(); ++i)
            REQUIRE(std::abs(m.data[i] - 1.0) < 1e-9);
        REQUIRE(ssim_loss(x, x) < 1e-9);
    }
}

TEST_CASE("constant images at opposite range ends: closed form") {
    Tensor black({3, 16, 16}, 0.0);
    Tensor white({3, 16, 16}, 255.0);
    double want = kSsimC1 / (255.0 * 255.0 + kSsimC1);  // sigma terms vanish
    SimilarityMap m = ssim_map(black, white);
    for (int64_t i = 0; i < m.data.numel(); ++i) REQUIRE(std::abs(m.data[i] - want) < 1e-12);
    REQUIRE(std::abs(ssim_loss(black, white) - 0.5 * (1.0 - want)) < 1e-12);
    REQUIRE(std::abs(want - 1.0e-4) < 2e-6);  // about 1e-4
}

TEST_CASE("map mean matches the independent reference implementation") {
    Rng rng(102);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_tensor({3, 20, 20}, rng);
        Tensor y = random_tensor({3, 20, 20}, rng);
        double got = ssim_map(x, y).data.mean();
        REQUIRE(std::abs(got - reference_ssim(x, y)) < 1e-6);
    }
}

TEST_CASE("map symmetry and range") {
    Rng rng(103);
    Tensor x = random_tensor({3, 18, 18}, rng);
    Tensor y = random_tensor({3, 18, 18}, rng);
    SimilarityMap ab = ssim_map(x, y);
    SimilarityMap ba = ssim_map(y, x);
    for (int64_t i = 0; i < ab.data.numel(); ++i) {
        REQUIRE(ab.data[i] == ba.data[i]);
        REQUIRE(ab.data[i] >= -1.0 - 1e-12);
        REQUIRE(ab.data[i] <= 1.0 + 1e-12);
    }
}

TEST_CASE("loss range and flip invariance") {
    Rng rng(104);
    for (int trial = 0; trial < 8; ++trial) {
        Tensor x = random_tensor({3, 16, 16}, rng);
        Tensor y = random_tensor({3, 16, 16}, rng);
        double l = ssim_loss(x, y);
        REQUIRE(l >= 0.0);
        REQUIRE(l <= 1.0);

        Tensor xf({3, 16, 16}), yf({3, 16, 16});
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 16; ++j) {
                    xf.at(c, i, j) = x.at(c, i, 15 - j);
                    yf.at(c, i, j) = y.at(c, i, 15 - j);
                }
        REQUIRE(std::abs(ssim_loss(xf, yf) - l) < 1e-12);
    }
}

TEST_CASE("ssim loss gradient matches central finite differences") {
    Rng rng(105);
    Tensor x = random_tensor({3, 32, 32}, rng);
    Tensor yhat = random_tensor({3, 32, 32}, rng);

    Tape tape;
    Var yv = tape.leaf(yhat, true);
    Var loss = ssim_loss_op(tape, tape.leaf(x), yv);
    tape.backward(loss);

    Tensor fd = fd_gradient(yhat, [&](const Tensor& yt) { return ssim_loss(x, yt); }, 1e-3);
    REQUIRE(max_rel_error(yv.grad(), fd) < 1e-4);
}

TEST_CASE("mse and mae losses") {
    Tensor a({3, 8, 8}, 100.0);
    Tensor b({3, 8, 8}, 116.0);
    REQUIRE(mse_loss(a, a) == 0.0);
    REQUIRE(mae_loss(a, a) == 0.0);
    REQUIRE(std::abs(mse_loss(a, b) - 256.0) < 1e-12);
    REQUIRE(std::abs(mae_loss(a, b) - 16.0) < 1e-12);

    Rng rng(106);
    Tensor x = random_tensor({3, 9, 7}, rng);
    Tensor y = random_tensor({3, 9, 7}, rng);
    double mse = 0.0, mae = 0.0;
    for (int64_t i = 0; i < x.numel(); ++i) {
        double d = y[i] - x[i];
        mse += d * d;
        mae += std::abs(d);
    }
    mse /= static_cast<double>(x.numel());
    mae /= static_cast<double>(x.numel());
    REQUIRE(std::abs(mse_loss(x, y) - mse) < 1e-10);
    REQUIRE(std::abs(mae_loss(x, y) - mae) < 1e-10);

    REQUIRE_THROWS_AS(mse_loss(Tensor({3, 8, 8}), Tensor({3, 8, 9})), std::invalid_argument);
    REQUIRE_THROWS_AS(ssim_loss(Tensor({3, 16, 16}), Tensor({3, 16, 17})),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(ssim_loss(Tensor({3, 8, 8}), Tensor({3, 8, 8})), std::invalid_argument);
}
