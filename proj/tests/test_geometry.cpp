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

#include "dualband/geometry.hpp"
#include "oracles.hpp"

using namespace dualband;

namespace {

ArrayConfig panel(int n, int s, int n_s = 4)
{
    ArrayConfig c;
    c.n_row = c.n_col = n;
    c.h_s = c.v_s = s;
    c.n_s = n_s;
    return c;
}

std::vector<std::pair<int, int>> pairs(const SelectionState& s)
{
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < s.size(); ++i) out.emplace_back(s.x_idx[i], s.y_idx[i]);
    return out;
}

// Random spacing-feasible selection drawn by rejection.
SelectionState random_feasible(const ArrayConfig& cfg, std::mt19937& gen)
{
    std::uniform_int_distribution<int> r(1, cfg.grid_rows()), c(1, cfg.grid_cols());
    while (true) {
        std::vector<std::pair<int, int>> pos;
        for (int tries = 0; tries < 200 && static_cast<int>(pos.size()) < cfg.n_s; ++tries) {
            std::pair<int, int> p{r(gen), c(gen)};
            auto cand = pos;
            cand.push_back(p);
            if (oracle::selection_ok(cand, cfg.v_s, cfg.h_s)) pos = cand;
        }
        if (static_cast<int>(pos.size()) < cfg.n_s) continue;
        std::vector<int> x, y;
        for (auto& p : pos) {
            x.push_back(p.first);
            y.push_back(p.second);
        }
        return indices_to_selection(x, y, cfg);
    }
}

} // namespace

TEST_CASE("coarse grid of a 14x14 panel has nine candidates at rows/cols 1, 7, 13", "[geometry]")
{
    const CoarseGrid g = build_coarse_grid(panel(14, 6));
    CHECK(g.m_row == 3);
    CHECK(g.m_col == 3);
    CHECK(g.c_matrix.sum() == 9);
    for (int m : {1, 7, 13})
        for (int n : {1, 7, 13}) CHECK(g.c_matrix(m - 1, n - 1) == 1);
    CHECK(g.q_matrix.isZero());
}

TEST_CASE("coarse grid with unit spacing is the whole grid", "[geometry]")
{
    const CoarseGrid g = build_coarse_grid(panel(9, 1));
    CHECK(g.c_matrix.sum() == 64);
}

TEST_CASE("coarse grid of an 8x8 panel has four candidates", "[geometry]")
{
    const CoarseGrid g = build_coarse_grid(panel(8, 6));
    CHECK(g.c_matrix.sum() == 4);
    for (int m : {1, 7})
        for (int n : {1, 7}) CHECK(g.c_matrix(m - 1, n - 1) == 1);
}

TEST_CASE("coarse grid ones are pairwise spacing compatible", "[geometry][property]")
{
    for (int n : {5, 8, 13, 14, 16})
        for (int s : {1, 2, 3, 6}) {
            const auto cfg = panel(n, s, 1);
            const auto cells = coarse_positions(cfg);
            std::vector<std::pair<int, int>> pos;
            for (auto c : cells) pos.emplace_back(c.row, c.col);
            CHECK(oracle::selection_ok(pos, s, s));
            // m = b*v_s + 1 rule
            for (auto c : cells) {
                CHECK((c.row - 1) % s == 0);
                CHECK((c.col - 1) % s == 0);
            }
        }
}

TEST_CASE("coarse_to_full places values only on the candidate mask", "[geometry]")
{
    const auto cfg = panel(14, 6);
    const CoarseGrid g = build_coarse_grid(cfg);
    CHECK(coarse_to_full(MatrixXd::Zero(3, 3), cfg).isZero());

    MatrixXd q = MatrixXd::Zero(3, 3);
    q(0, 0) = 1.0;
    const MatrixXd p = coarse_to_full(q, cfg);
    CHECK(p(0, 0) == 1.0);
    CHECK(p.sum() == 1.0);

    std::mt19937 gen(3);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 20; ++trial) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) q(i, j) = coin(gen);
        const MatrixXd full = coarse_to_full(q, cfg);
        for (int i = 0; i < full.rows(); ++i)
            for (int j = 0; j < full.cols(); ++j)
                if (full(i, j) != 0.0) CHECK(g.c_matrix(i, j) == 1);
        CHECK(full.sum() == q.sum());
    }
    CHECK_THROWS_AS(coarse_to_full(MatrixXd::Zero(2, 3), cfg), std::invalid_argument);
}

TEST_CASE("indices_to_selection builds the binary matrix and round-trips", "[geometry]")
{
    auto cfg = panel(14, 6, 1);
    const std::vector<int> one{1};
    SelectionState s = indices_to_selection(one, one, cfg);
    CHECK(s.p_matrix(0, 0) == 1);
    CHECK(s.p_matrix.sum() == 1);

    cfg.n_s = 4;
    const std::vector<int> x{1, 7, 13, 7}, y{7, 1, 7, 13};
    s = indices_to_selection(x, y, cfg);
    CHECK(s.p_matrix.sum() == 4);
    CHECK(spacing_feasible(s, cfg));

    std::mt19937 gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const SelectionState r = random_feasible(cfg, gen);
        auto expected = pairs(r);
        std::sort(expected.begin(), expected.end());
        std::vector<std::pair<int, int>> got;
        for (auto p : extract_positions(r.p_matrix)) got.emplace_back(p.row, p.col);
        std::sort(got.begin(), got.end());
        CHECK(got == expected);
    }

    const std::vector<int> dup_x{1, 1, 7, 13}, dup_y{1, 1, 7, 13};
    CHECK_THROWS_AS(indices_to_selection(dup_x, dup_y, cfg), std::invalid_argument);
    const std::vector<int> bad_x{0, 1, 7, 13};
    CHECK_THROWS_AS(indices_to_selection(bad_x, y, cfg), std::invalid_argument);
}

TEST_CASE("spacing_feasible on simple pairs", "[geometry]")
{
    auto cfg = panel(14, 6, 2);
    const std::vector<int> x{1, 1};
    CHECK(spacing_feasible(indices_to_selection(x, std::vector<int>{1, 7}, cfg), cfg));
    CHECK_FALSE(spacing_feasible(indices_to_selection(x, std::vector<int>{1, 6}, cfg), cfg));
}

TEST_CASE("candidate_set with one antenna is the whole grid", "[geometry]")
{
    const auto cfg = panel(14, 6, 1);
    const std::vector<int> x{5}, y{9};
    const auto cand = candidate_set(indices_to_selection(x, y, cfg), 1, cfg);
    CHECK(static_cast<int>(cand.size()) == cfg.n_p());
}

TEST_CASE("candidate_set matches a brute-force double loop", "[geometry][property]")
{
    std::mt19937 gen(5);
    for (int n : {8, 11, 14}) {
        for (int s : {2, 3, 6}) {
            auto cfg = panel(n, s, std::min(4, build_coarse_grid(panel(n, s)).c_matrix.sum()));
            for (int trial = 0; trial < 8; ++trial) {
                const SelectionState st = random_feasible(cfg, gen);
                for (int k = 1; k <= cfg.n_s; ++k) {
                    const auto got_pos = candidate_set(st, k, cfg);
                    std::vector<std::pair<int, int>> got;
                    for (auto p : got_pos) got.emplace_back(p.row, p.col);
                    std::sort(got.begin(), got.end());
                    auto want = oracle::candidates(pairs(st), k - 1, cfg.grid_rows(), cfg.grid_cols(), s, s);
                    std::sort(want.begin(), want.end());
                    CHECK(got == want);
                    // Current position always present; every member keeps the selection feasible.
                    CHECK(std::find(got.begin(), got.end(), pairs(st)[static_cast<std::size_t>(k - 1)]) != got.end());
                    for (auto p : got) {
                        auto moved = pairs(st);
                        moved[static_cast<std::size_t>(k - 1)] = p;
                        CHECK(oracle::selection_ok(moved, s, s));
                    }
                }
            }
        }
    }
}

TEST_CASE("corner selection excludes a neighbourhood around the other antennas", "[geometry]")
{
    const auto cfg = panel(14, 6, 4);
    const std::vector<int> x{1, 1, 13, 13}, y{1, 13, 1, 13};
    const SelectionState st = indices_to_selection(x, y, cfg);
    const auto cand = candidate_set(st, 1, cfg);
    for (auto p : cand) {
        // Antenna (1,13) forbids rows 1..6 x cols 8..13 etc.
        CHECK_FALSE((p.row <= 6 && p.col >= 8));
        CHECK_FALSE((p.row >= 8 && p.col <= 6));
        CHECK_FALSE((p.row >= 8 && p.col >= 8));
    }
    CHECK(std::find(cand.begin(), cand.end(), GridPos{1, 1}) != cand.end());
}

TEST_CASE("vec index is column-major and 1-based", "[geometry]")
{
    CHECK(vec_index({1, 1}, 13) == 0);
    CHECK(vec_index({2, 1}, 13) == 1);
    CHECK(vec_index({1, 2}, 13) == 13);
    for (int i = 0; i < 169; ++i) CHECK(vec_index(grid_pos(i, 13), 13) == i);
    const auto cfg = panel(14, 6, 2);
    const std::vector<int> x{2, 9}, y{3, 11};
    const VectorXd p = selection_vector(indices_to_selection(x, y, cfg));
    CHECK(p.sum() == 2.0);
    CHECK(p(vec_index({2, 3}, 13)) == 1.0);
    CHECK(p(vec_index({9, 11}, 13)) == 1.0);
}

TEST_CASE("selection JSON round-trip", "[geometry]")
{
    const auto cfg = panel(14, 6, 3);
    const std::vector<int> x{1, 7, 13}, y{4, 12, 2};
    const SelectionState s = indices_to_selection(x, y, cfg);
    const auto j = selection_to_json(s, cfg);
    CHECK(j.at("n_row") == 14);
    const SelectionState t = selection_from_json(j, cfg);
    CHECK(t.p_matrix == s.p_matrix);
    CHECK(t.x_idx == s.x_idx);
}

TEST_CASE("ArrayConfig validation", "[geometry]")
{
    ArrayConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_row = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.n_rf = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.lambda_ratio = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
