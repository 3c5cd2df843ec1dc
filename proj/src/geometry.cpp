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

#include "dualband/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>

namespace dualband {

GainConvention parse_gain_convention(const std::string& name)
{
    if (name == "squared")
        return GainConvention::Squared;
    if (name == "norm")
        return GainConvention::Norm;
    throw std::invalid_argument("unknown gain convention '" + name + "' (expected squared|norm)");
}

std::string to_string(GainConvention c)
{
    return c == GainConvention::Squared ? "squared" : "norm";
}

void ArrayConfig::validate() const
{
    if (n_row < 2 || n_col < 2)
        throw std::invalid_argument("ArrayConfig: n_row and n_col must be >= 2");
    if (n_s < 1)
        throw std::invalid_argument("ArrayConfig: n_s must be >= 1");
    if (n_rf < 1)
        throw std::invalid_argument("ArrayConfig: n_rf must be >= 1");
    if (h_s < 1 || v_s < 1)
        throw std::invalid_argument("ArrayConfig: spacing thresholds must be >= 1");
    if (!(lambda_ratio > 0.0))
        throw std::invalid_argument("ArrayConfig: lambda_ratio must be positive");
    if (n_s > n_p())
        throw std::invalid_argument("ArrayConfig: n_s exceeds the candidate grid size");
}

GridPos grid_pos(int linear, int grid_rows)
{
    return {linear % grid_rows + 1, linear / grid_rows + 1};
}

bool spacing_ok(GridPos a, GridPos b, const ArrayConfig& cfg)
{
    return std::abs(a.row - b.row) >= cfg.v_s || std::abs(a.col - b.col) >= cfg.h_s;
}

bool spacing_feasible(const SelectionState& state, const ArrayConfig& cfg)
{
    const int n = state.size();
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
            if (!spacing_ok(state.position(p), state.position(q), cfg))
                return false;
    return true;
}

CoarseGrid build_coarse_grid(const ArrayConfig& cfg)
{
    cfg.validate();
    CoarseGrid grid;
    grid.m_row = (cfg.grid_rows() + cfg.v_s - 1) / cfg.v_s;
    grid.m_col = (cfg.grid_cols() + cfg.h_s - 1) / cfg.h_s;
    grid.c_matrix = MatrixXi::Zero(cfg.grid_rows(), cfg.grid_cols());
    for (int b = 0; b < grid.m_row; ++b)
        for (int d = 0; d < grid.m_col; ++d)
            grid.c_matrix(b * cfg.v_s, d * cfg.h_s) = 1;
    grid.q_matrix = MatrixXd::Zero(grid.m_row, grid.m_col);
    return grid;
}

std::vector<GridPos> coarse_positions(const ArrayConfig& cfg)
{
    const int m_row = (cfg.grid_rows() + cfg.v_s - 1) / cfg.v_s;
    const int m_col = (cfg.grid_cols() + cfg.h_s - 1) / cfg.h_s;
    std::vector<GridPos> out;
    out.reserve(static_cast<std::size_t>(m_row * m_col));
    for (int d = 0; d < m_col; ++d)
        for (int b = 0; b < m_row; ++b)
            out.push_back({b * cfg.v_s + 1, d * cfg.h_s + 1});
    return out;
}

MatrixXd coarse_to_full(const MatrixXd& q, const ArrayConfig& cfg)
{
    const int m_row = (cfg.grid_rows() + cfg.v_s - 1) / cfg.v_s;
    const int m_col = (cfg.grid_cols() + cfg.h_s - 1) / cfg.h_s;
    if (q.rows() != m_row || q.cols() != m_col)
        throw std::invalid_argument("coarse_to_full: Q is " + std::to_string(q.rows()) + "x" +
                                    std::to_string(q.cols()) + ", expected " + std::to_string(m_row) + "x" +
                                    std::to_string(m_col));
    MatrixXd p = MatrixXd::Zero(cfg.grid_rows(), cfg.grid_cols());
    for (int b = 0; b < m_row; ++b)
        for (int d = 0; d < m_col; ++d)
            p(b * cfg.v_s, d * cfg.h_s) = q(b, d);
    return p;
}

SelectionState indices_to_selection(std::span<const int> x, std::span<const int> y, const ArrayConfig& cfg)
{
    if (x.size() != y.size())
        throw std::invalid_argument("indices_to_selection: x and y differ in length");
    if (static_cast<int>(x.size()) != cfg.n_s)
        throw std::invalid_argument("indices_to_selection: expected " + std::to_string(cfg.n_s) + " antennas");
    SelectionState s;
    s.p_matrix = MatrixXi::Zero(cfg.grid_rows(), cfg.grid_cols());
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (x[p] < 1 || x[p] > cfg.grid_rows() || y[p] < 1 || y[p] > cfg.grid_cols())
            throw std::invalid_argument("indices_to_selection: index out of grid bounds");
        int& cell = s.p_matrix(x[p] - 1, y[p] - 1);
        if (cell != 0)
            throw std::invalid_argument("indices_to_selection: duplicate antenna position (" + std::to_string(x[p]) +
                                        "," + std::to_string(y[p]) + ")");
        cell = 1;
    }
    s.x_idx.assign(x.begin(), x.end());
    s.y_idx.assign(y.begin(), y.end());
    return s;
}

SelectionState positions_to_selection(std::span<const GridPos> positions, const ArrayConfig& cfg)
{
    std::vector<int> x, y;
    x.reserve(positions.size());
    y.reserve(positions.size());
    for (const GridPos& g : positions) {
        x.push_back(g.row);
        y.push_back(g.col);
    }
    return indices_to_selection(x, y, cfg);
}

std::vector<GridPos> extract_positions(const MatrixXi& p_matrix)
{
    std::vector<GridPos> out;
    for (int r = 0; r < p_matrix.rows(); ++r)
        for (int c = 0; c < p_matrix.cols(); ++c)
            if (p_matrix(r, c) != 0)
                out.push_back({r + 1, c + 1});
    return out;
}

VectorXd selection_vector(const SelectionState& state)
{
    return state.p_matrix.cast<double>().reshaped();
}

std::vector<GridPos> candidate_set(const SelectionState& state, int antenna_order, const ArrayConfig& cfg)
{
    if (antenna_order < 1 || antenna_order > state.size())
        throw std::invalid_argument("candidate_set: antenna_order out of range");
    std::vector<GridPos> out;
    for (int r = 1; r <= cfg.grid_rows(); ++r) {
        for (int c = 1; c <= cfg.grid_cols(); ++c) {
            const GridPos g{r, c};
            bool ok = true;
            for (int p = 0; p < state.size() && ok; ++p)
                if (p != antenna_order - 1)
                    ok = spacing_ok(g, state.position(p), cfg);
            if (ok)
                out.push_back(g);
        }
    }
    return out;
}

nlohmann::json selection_to_json(const SelectionState& state, const ArrayConfig& cfg)
{
    return {{"rows", state.x_idx}, {"cols", state.y_idx}, {"n_row", cfg.n_row}, {"n_col", cfg.n_col}};
}

SelectionState selection_from_json(const nlohmann::json& j, const ArrayConfig& cfg)
{
    if (j.at("n_row").get<int>() != cfg.n_row || j.at("n_col").get<int>() != cfg.n_col)
        throw std::invalid_argument("selection_from_json: array dimensions do not match");
    const auto rows = j.at("rows").get<std::vector<int>>();
    const auto cols = j.at("cols").get<std::vector<int>>();
    return indices_to_selection(rows, cols, cfg);
}

} // namespace dualband
