// SPDX-License-Identifier: Apache-2.0
//
// dualband: beamforming design toolkit for dual-band reconfigurable arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "dualband/channel.hpp"
#include "dualband/rng.hpp"
#include "oracles.hpp"

using namespace dualband;
using Catch::Approx;

TEST_CASE("steering_gamma entries", "[channel]")
{
    const VectorXcd z = steering_gamma(5, 0.0, 1.0 / 6.0);
    CHECK((z.array() - cx(1.0, 0.0)).abs().maxCoeff() < 1e-15);
    const VectorXcd g = steering_gamma(2, 1.0, 1.0 / 6.0);
    CHECK(std::abs(g(1) - std::polar(1.0, std::numbers::pi / 6.0)) < 1e-15);
    for (double a : {-1.0, -0.3, 0.2, 0.9}) CHECK(steering_gamma(7, a, 0.4).squaredNorm() == Approx(7.0).epsilon(1e-14));
}

TEST_CASE("steering_alpha entries", "[channel]")
{
    const VectorXcd a = steering_alpha(4, 0.5);
    CHECK(std::abs(a(1) - cx(0.0, 1.0)) < 1e-15);
    CHECK(a.squaredNorm() == Approx(4.0));
    CHECK((steering_alpha(3, 0.0).array() - cx(1.0, 0.0)).abs().maxCoeff() < 1e-15);
}

TEST_CASE("steering_beta matches a double loop and has unit-modulus entries", "[channel][property]")
{
    ArrayConfig cfg;
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const double el = rng.uniform(-1, 1), az = rng.uniform(-1, 1);
        const VectorXcd b = steering_beta(cfg, el, az);
        REQUIRE(b.size() == cfg.n_p());
        const VectorXcd o = oracle::beta(cfg.grid_rows(), cfg.grid_cols(), el, az, cfg.lambda_ratio);
        CHECK((b - o).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((b.array().abs() - 1.0).abs().maxCoeff() < 1e-12);
        const VectorXcd m = steering_mm(cfg, el, az);
        REQUIRE(m.size() == cfg.n_m());
        CHECK((m - oracle::beta(cfg.n_row, cfg.n_col, el, az, 1.0)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK((steering_beta(cfg, 0, 0).array() - cx(1.0, 0.0)).abs().maxCoeff() < 1e-15);
}

TEST_CASE("gen_channels is deterministic and satisfies the reconstruction identity", "[channel]")
{
    ArrayConfig cfg;
    const ChannelSet a = gen_channels(cfg, 4, 4, 5, 3, 42);
    const ChannelSet b = gen_channels(cfg, 4, 4, 5, 3, 42);
    CHECK(a.h_sub == b.h_sub);
    CHECK(a.h_mm == b.h_mm);
    CHECK(a.h_sub.rows() == cfg.n_p());
    CHECK(a.h_mm.rows() == cfg.n_m());
    CHECK(reconstruction_error(a) < 1e-12);
    CHECK(gen_channels(cfg, 4, 4, 5, 3, 43).h_mm != a.h_mm);

    for (int k = 0; k < 4; ++k) {
        VectorXcd col = VectorXcd::Zero(cfg.n_p());
        for (const auto& p : a.paths_sub[k])
            col += p.gain * oracle::beta(cfg.grid_rows(), cfg.grid_cols(), p.el, p.az, cfg.lambda_ratio);
        col /= std::sqrt(5.0);
        CHECK((col - a.h_sub.col(k)).norm() <= 1e-12 * col.norm());
        for (const auto& p : a.paths_mm[k]) {
            CHECK(std::abs(p.el) <= 1.0);
            CHECK(std::abs(p.az) <= 1.0);
        }
    }
}

TEST_CASE("single path with unit gain reproduces the steering vector", "[channel]")
{
    ArrayConfig cfg;
    const std::vector<PathParams> one{{cx(1.0, 0.0), 0.3, -0.6}};
    CHECK((synthesize_sub(cfg, one) - steering_beta(cfg, 0.3, -0.6)).norm() < 1e-12);
    CHECK((synthesize_mm(cfg, one) - steering_mm(cfg, 0.3, -0.6)).norm() < 1e-12);
}

TEST_CASE("mean mmWave channel energy is N_m", "[channel][montecarlo]")
{
    ArrayConfig cfg;
    cfg.n_row = cfg.n_col = 4;
    double acc = 0.0;
    const int trials = 10000;
    for (int s = 0; s < trials; ++s) acc += gen_channels(cfg, 1, 1, 1, 3, static_cast<std::uint64_t>(s)).h_mm.squaredNorm();
    CHECK(acc / trials == Approx(cfg.n_m()).epsilon(0.05));
}

TEST_CASE("channel file round-trip verifies the reconstruction identity", "[channel]")
{
    ArrayConfig cfg;
    const ChannelSet a = gen_channels(cfg, 3, 2, 5, 3, 7);
    const auto path = std::filesystem::temp_directory_path() / "dualband_channel_roundtrip.json";
    save_channels(a, path);
    const ChannelSet b = load_channels(path);
    CHECK(b.h_sub == a.h_sub);
    CHECK(b.h_mm == a.h_mm);
    CHECK(b.seed == 7);

    auto j = channel_to_json(a);
    j["paths_mm"][0][0]["az"] = 0.123456; // no longer matches the stored matrix
    CHECK_THROWS(channel_from_json(j));
    std::filesystem::remove(path);
}

TEST_CASE("Rng draws are fixed for a given seed", "[channel][rng]")
{
    Rng a(1), b(1);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(2);
    double mean = 0.0, var = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = c.normal();
        mean += z;
        var += z * z;
    }
    CHECK(std::abs(mean / n) < 0.03);
    CHECK(var / n == Approx(1.0).epsilon(0.03));
    for (int i = 0; i < 1000; ++i) {
        const int v = c.below(7);
        CHECK((v >= 0 && v < 7));
    }
    CHECK(derive_seed(5, 1) != derive_seed(5, 2));
}
