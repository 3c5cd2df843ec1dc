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

#include <algorithm>
#include <random>

#include "dualband/channel.hpp"
#include "dualband/fsjbas.hpp"
#include "dualband/sub6g.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dualband;
using Catch::Approx;

namespace {

Sub6gDesign design_from(const MatrixXcd& f, const SelectionState& s)
{
    return {f, s, selection_power(f, s)};
}

SelectionState all_coarse(const ArrayConfig& cfg)
{
    const auto cells = coarse_positions(cfg);
    return positions_to_selection(cells, cfg);
}

} // namespace

TEST_CASE("matched filter without interference gives SINR P |h|^2 / sigma^2", "[sub6g]")
{
    auto cfg = testfix::panel(3, 1, 4);
    const auto scen = testfix::sub_scenario(cfg, 1, 1.0, {}, 0.0, 3, 0.5);
    const SelectionState sel = all_coarse(cfg);
    const double p = 2.0;
    const MatrixXcd f = scen.h / scen.h.norm() * std::sqrt(p);
    CHECK(sinr_sub6g(design_from(f, sel), scen, 0) == Approx(p * scen.h.squaredNorm() / 0.5).epsilon(1e-12));
    CHECK(sinr_sub6g(design_from(MatrixXcd::Zero(4, 1), sel), scen, 0) == 0.0);
    CHECK_THROWS_AS(sinr_sub6g(design_from(f, sel), scen, 1), std::invalid_argument);
}

TEST_CASE("gain of a steering-matched single column is sqrt(P) |beta|", "[sub6g]")
{
    auto cfg = testfix::panel(3, 1, 4);
    const std::vector<Direction> t{{0.2, 0.7}};
    const auto scen = testfix::sub_scenario(cfg, 1, 1.0, t, 1.0, 3);
    const SelectionState sel = all_coarse(cfg);
    const VectorXcd b = steering_beta(cfg, 0.2, 0.7);
    const double p = 3.0;
    const MatrixXcd f = b / b.norm() * std::sqrt(p);
    CHECK(gain_sub6g(design_from(f, sel), scen, 0) == Approx(std::sqrt(p) * b.norm()).epsilon(1e-12));
    CHECK(gain_sub6g(design_from(MatrixXcd::Zero(4, 1), sel), scen, 0) == 0.0);
}

TEST_CASE("sub-6G metrics agree with scalar-loop recomputation", "[sub6g][property]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    std::mt19937_64 gen(8);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        const auto scen = testfix::sub_scenario(cfg, 3, 1.0, testfix::two_targets(), 1.0, 100 + trial, 0.7);
        const std::vector<int> x{1, 7, 13, 7}, y{1, 7, 1, 13};
        const SelectionState sel = indices_to_selection(x, y, cfg);
        MatrixXcd f(cfg.n_p(), 3);
        for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = {nd(gen), nd(gen)};
        const Sub6gDesign d = design_from(f, sel);
        const MatrixXcd hm = testfix::masked(scen.h, sel);
        const MatrixXcd fm = testfix::masked(f, sel);
        for (int k = 0; k < 3; ++k) CHECK(sinr_sub6g(d, scen, k) == Approx(oracle::sinr(hm, f, k, 0.7)).epsilon(1e-10));
        for (int t = 0; t < 2; ++t) {
            const VectorXcd b = oracle::beta(13, 13, scen.targets[t].el, scen.targets[t].az, cfg.lambda_ratio);
            CHECK(gain_sub6g(d, scen, t) == Approx(oracle::gain(fm, b)).epsilon(1e-10));
        }
        CHECK(d.power == Approx(fm.squaredNorm()).epsilon(1e-12));
    }
}

TEST_CASE("abas_init columns and relaxed selection", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const Sub6gOptions opts;
    SECTION("without targets each column is kappa h_k")
    {
        const auto scen = testfix::sub_scenario(cfg, 4, 10.0, {}, 0.0, 1);
        const RelaxedState st = abas_init(scen, opts);
        CHECK((st.f_s - 10.0 * scen.h).norm() < 1e-12);
    }
    SECTION("14x14 panel gives nine cells valued 4/9")
    {
        const auto scen = testfix::sub_scenario(cfg, 4, 10.0, testfix::two_targets(), 10.0, 1);
        const RelaxedState st = abas_init(scen, opts);
        REQUIRE(st.q.size() == 9);
        CHECK((st.q.array() - 4.0 / 9.0).abs().maxCoeff() < 1e-15);
        CHECK(st.q.sum() == Approx(4.0));
        const VectorXd p = relaxed_p(st.q, cfg);
        CHECK(p.sum() == Approx(4.0));
        CHECK(p(vec_index({7, 13}, 13)) == Approx(4.0 / 9.0));
    }
}

TEST_CASE("F-step for one user without targets reaches the matched-filter power", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const Sub6gOptions opts;
    for (std::uint64_t seed : {2u, 3u, 4u}) {
        const double gamma = 5.0, noise = 0.8;
        const auto scen = testfix::sub_scenario(cfg, 1, gamma, {}, 0.0, seed, noise);
        // Binary q: cells 0, 2, 4, 8 on.
        VectorXd q = VectorXd::Zero(9);
        q(0) = q(2) = q(4) = q(8) = 1.0;
        const VectorXd p = relaxed_p(q, cfg);
        const MatrixXcd f = abas_step_fs(scen, q, abas_init(scen, opts).f_s, opts);
        const double power = (p.cast<cx>().asDiagonal() * f).squaredNorm();
        const double closed = gamma * noise / (p.cast<cx>().asDiagonal() * scen.h).squaredNorm();
        CHECK(power == Approx(closed).epsilon(1e-4));
    }
}

TEST_CASE("F-step output is feasible and beats the scaled initial point", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const Sub6gOptions opts;
    const auto scen = testfix::sub_scenario(cfg, 4, 10.0, testfix::two_targets(), 10.0, 5);
    const RelaxedState st = abas_init(scen, opts);
    const MatrixXcd f = abas_step_fs(scen, st.q, st.f_s, opts);
    const VectorXd p = relaxed_p(st.q, cfg);
    const MatrixXcd hp = p.cast<cx>().asDiagonal() * scen.h;
    const MatrixXcd g = p.cast<cx>().asDiagonal() * f;
    for (int k = 0; k < 4; ++k) CHECK(oracle::sinr(hp, f, k, 1.0) >= 10.0 * (1.0 - 1e-4));
    for (int t = 0; t < 2; ++t) CHECK(std::pow(oracle::gain(g, scen.steering.col(t)), 2) >= 10.0 * (1.0 - 1e-4));

    // Scale the initial point until every constraint holds; the F-step cannot be worse.
    const MatrixXcd g0 = p.cast<cx>().asDiagonal() * st.f_s;
    double scale = 1e-3;
    auto ok = [&](double s) {
        for (int k = 0; k < 4; ++k)
            if (oracle::sinr(hp, s * st.f_s, k, 1.0) < 10.0) return false;
        for (int t = 0; t < 2; ++t)
            if (std::pow(oracle::gain(s * g0, scen.steering.col(t)), 2) < 10.0) return false;
        return true;
    };
    while (!ok(scale) && scale < 1e6) scale *= 1.01;
    if (ok(scale)) CHECK(g.squaredNorm() <= (scale * g0).squaredNorm() * (1.0 + 1e-6));
}

TEST_CASE("P-step decreases both the surrogate and the penalized objective", "[sub6g][property]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    Sub6gOptions opts;
    for (std::uint64_t seed : {6u, 7u}) {
        const auto scen = testfix::sub_scenario(cfg, 4, 10.0, testfix::two_targets(), 10.0, seed);
        RelaxedState st = abas_init(scen, opts);
        double mu = opts.mu_init;
        for (int it = 0; it < 4; ++it) {
            st.f_s = abas_step_fs(scen, st.q, st.f_s, opts);
            const VectorXd q = abas_step_p(scen, st.f_s, st.q, mu, opts);
            CHECK(q.sum() == Approx(4.0).epsilon(1e-6));
            CHECK(q.minCoeff() >= -1e-6);
            CHECK(q.maxCoeff() <= 1.0 + 1e-6);
            const double tol = 1e-5 * (1.0 + std::abs(surrogate_objective(scen, st.f_s, st.q, st.q, mu)));
            CHECK(surrogate_objective(scen, st.f_s, q, st.q, mu) <= surrogate_objective(scen, st.f_s, st.q, st.q, mu) + tol);
            CHECK(penalized_objective(scen, st.f_s, q, mu) <= penalized_objective(scen, st.f_s, st.q, mu) + tol);
            st.q = q;
            mu = std::min(mu * opts.mu_growth, opts.mu_max);
        }
    }
}

TEST_CASE("P-step with loose thresholds and no penalty keeps the previous objective bound", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const Sub6gOptions opts;
    const auto scen = testfix::sub_scenario(cfg, 2, 1e-6, testfix::two_targets(), 1e-6, 9);
    const RelaxedState st = abas_init(scen, opts);
    const VectorXd q = abas_step_p(scen, st.f_s, st.q, 0.0, opts);
    CHECK(q.sum() == Approx(4.0).epsilon(1e-6));
    CHECK(penalized_objective(scen, st.f_s, q, 0.0) <= penalized_objective(scen, st.f_s, st.q, 0.0) * (1 + 1e-6));
}

TEST_CASE("rounding always returns a valid selection", "[sub6g][property]")
{
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n : {8, 14, 16}) {
        for (int s : {2, 3, 6}) {
            const int cap = build_coarse_grid(testfix::panel(n, s, 1)).c_matrix.sum();
            const auto cfg = testfix::panel(n, s, std::min(4, cap));
            const auto cells = coarse_positions(cfg);
            std::vector<GridPos> full_grid;
            for (int c = 1; c <= cfg.grid_cols(); ++c)
                for (int r = 1; r <= cfg.grid_rows(); ++r) full_grid.push_back({r, c});
            auto valid = [&](const SelectionState& sel) {
                CHECK(sel.size() == cfg.n_s);
                CHECK(sel.p_matrix.sum() == cfg.n_s);
                CHECK(spacing_feasible(sel, cfg));
                CHECK(((sel.p_matrix.array() == 0) || (sel.p_matrix.array() == 1)).all());
            };
            for (int trial = 0; trial < 20; ++trial) {
                VectorXd v(static_cast<Eigen::Index>(cells.size()));
                for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(gen);
                valid(round_selection(v, cells, cfg));
                // Over the full grid greedy picks can block completion; that must surface as an error.
                VectorXd w(static_cast<Eigen::Index>(full_grid.size()));
                for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = u(gen);
                try {
                    valid(round_selection(w, full_grid, cfg));
                } catch (const InfeasibleError&) {
                }
            }
        }
    }
}

TEST_CASE("rounding keeps an already binary valid pattern", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const auto cells = coarse_positions(cfg);
    VectorXd v = VectorXd::Zero(9);
    v(1) = v(3) = v(5) = v(7) = 0.9;
    const SelectionState sel = round_selection(v, cells, cfg);
    for (int i : {1, 3, 5, 7}) CHECK(sel.p_matrix(cells[i].row - 1, cells[i].col - 1) == 1);
}

TEST_CASE("ABAS on the 14x14 example picks four coarse cells and is no better than exhaustive search", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    Sub6gOptions opts;
    const auto scen = testfix::sub_scenario(cfg, 4, 10.0, testfix::two_targets(), 10.0, 11);
    const AbasResult res = abas(scen, opts);
    const auto cells = coarse_positions(cfg);
    for (auto p : extract_positions(res.design.selection.p_matrix))
        CHECK(std::find(cells.begin(), cells.end(), p) != cells.end());
    CHECK(spacing_feasible(res.design.selection, cfg));
    CHECK(check_sub6g(res.design, scen).ok);
    CHECK(res.design.power == Approx(selection_power(res.design.f_s, res.design.selection)).epsilon(1e-9));
    for (const auto& it : res.trace) CHECK(it.penalized_after <= it.penalized_before * (1.0 + 1e-5) + 1e-6);

    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << 9); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) != 4) continue;
        std::vector<GridPos> pick;
        for (int i = 0; i < 9; ++i)
            if (mask & (1 << i)) pick.push_back(cells[static_cast<std::size_t>(i)]);
        const SelectionSolve s = solve_fixed_selection(scen, positions_to_selection(pick, cfg), opts);
        if (s.feasible) best = std::min(best, s.power);
    }
    REQUIRE(std::isfinite(best));
    CHECK(res.design.power >= best * (1.0 - 1e-4));
}

TEST_CASE("near-zero thresholds give a near-zero power design", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const auto scen = testfix::sub_scenario(cfg, 2, 1e-8, testfix::two_targets(), 1e-8, 12);
    const AbasResult res = abas(scen, Sub6gOptions{});
    CHECK(res.design.power < 1e-5);
}

TEST_CASE("more users than antennas with high SINR targets is infeasible", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 1);
    const auto scen = testfix::sub_scenario(cfg, 2, 10.0, {}, 0.0, 13);
    const std::vector<int> x{7}, y{7};
    CHECK_FALSE(solve_fixed_selection(scen, indices_to_selection(x, y, cfg), Sub6gOptions{}).feasible);
    CHECK_THROWS_AS(abas(scen, Sub6gOptions{}), InfeasibleError);
}

TEST_CASE("fixed-selection solve meets every constraint under both conventions", "[sub6g][property]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const std::vector<int> x{1, 7, 13, 7}, y{1, 7, 1, 13};
    const SelectionState sel = indices_to_selection(x, y, cfg);
    for (GainConvention conv : {GainConvention::Squared, GainConvention::Norm}) {
        for (std::uint64_t seed = 20; seed < 26; ++seed) {
            auto scen = testfix::sub_scenario(cfg, 3, 4.0, testfix::two_targets(), 6.0, seed);
            scen.convention = conv;
            const SelectionSolve s = solve_fixed_selection(scen, sel, Sub6gOptions{});
            REQUIRE(s.feasible);
            const Sub6gDesign d{s.f_s, sel, s.power};
            const MatrixXcd hm = testfix::masked(scen.h, sel), fm = testfix::masked(s.f_s, sel);
            for (int k = 0; k < 3; ++k) CHECK(oracle::sinr(hm, s.f_s, k, 1.0) >= 4.0 * (1.0 - 1e-4));
            for (int t = 0; t < 2; ++t) {
                const double g = oracle::gain(fm, scen.steering.col(t));
                CHECK((conv == GainConvention::Squared ? g * g : g) >= 6.0 * (1.0 - 1e-4));
            }
            CHECK(check_sub6g(d, scen).ok);
            // Rows outside the selection stay zero.
            CHECK((s.f_s - fm).norm() == 0.0);
        }
    }
}

TEST_CASE("feasibility pre-check warns on thresholds above the bounds", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    auto scen = testfix::sub_scenario(cfg, 2, 10.0, testfix::two_targets(), 10.0, 14);
    CHECK(precheck_sub6g(scen, 60.0).warnings.empty());
    scen.gamma(0) = 1e9;
    scen.upsilon(1) = 1e9;
    const auto pc = precheck_sub6g(scen, 60.0);
    CHECK(pc.warnings.size() == 2);
    CHECK(pc.gain_bound[0] == Approx(240.0));
}

TEST_CASE("scenario validation rejects inconsistent inputs", "[sub6g]")
{
    const auto cfg = testfix::panel(14, 6, 4);
    const auto ch = gen_channels(cfg, 2, 1, 5, 3, 1);
    CHECK_THROWS_AS(Sub6gScenario::make(cfg, ch.h_sub, VectorXd::Constant(3, 1.0), {}, VectorXd(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Sub6gScenario::make(cfg, ch.h_sub, VectorXd::Constant(2, -1.0), {}, VectorXd(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Sub6gScenario::make(cfg, ch.h_sub, VectorXd::Constant(2, 1.0), testfix::two_targets(),
                                        VectorXd::Constant(1, 1.0)),
                    std::invalid_argument);
}
