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

#pragma once

#include <compare>
#include <span>
#include <vector>

#include <json.hpp>

#include "dualband/types.hpp"

namespace dualband {

/// Layout of the shared-aperture panel.
///
/// The mmWave array is an n_row x n_col half-wavelength grid. Every 2x2 group of
/// neighbouring mmWave elements can be combined into one sub-6G element, so the
/// candidate sub-6G grid is (n_row-1) x (n_col-1). Spacing thresholds h_s / v_s
/// are in units of the candidate pitch (lambda_m / 2).
struct ArrayConfig {
    int n_row = 14;
    int n_col = 14;
    int n_s = 4;
    int n_rf = 4;
    int h_s = 6;
    int v_s = 6;
    double lambda_ratio = 1.0 / 6.0; // lambda_m / lambda_s

    int grid_rows() const { return n_row - 1; }
    int grid_cols() const { return n_col - 1; }
    int n_p() const { return grid_rows() * grid_cols(); }
    int n_m() const { return n_row * n_col; }

    // Throws std::invalid_argument on a malformed layout.
    void validate() const;
};

/// 1-based position on the candidate grid.
struct GridPos {
    int row = 1;
    int col = 1;
    auto operator<=>(const GridPos&) const = default;
};

/// Column-major linear index (0-based) of a 1-based grid position; this is the
/// vec() convention used for every grid-shaped quantity in the library.
inline int vec_index(GridPos pos, int grid_rows) { return (pos.col - 1) * grid_rows + (pos.row - 1); }
GridPos grid_pos(int linear, int grid_rows);

struct SelectionState {
    MatrixXi p_matrix;      // (n_row-1) x (n_col-1), entries 0/1
    std::vector<int> x_idx; // rows, 1-based, one per selected antenna
    std::vector<int> y_idx; // cols, 1-based

    GridPos position(int antenna) const { return {x_idx[antenna], y_idx[antenna]}; }
    int size() const { return static_cast<int>(x_idx.size()); }
};

struct CoarseGrid {
    MatrixXi c_matrix; // candidate mask on the full grid
    int m_row = 0;
    int m_col = 0;
    MatrixXd q_matrix; // m_row x m_col relaxed selection
};

// Two positions may coexist unless they fall inside each other's
// (2 v_s - 1) x (2 h_s - 1) exclusion box.
bool spacing_ok(GridPos a, GridPos b, const ArrayConfig& cfg);
bool spacing_feasible(const SelectionState& state, const ArrayConfig& cfg);

CoarseGrid build_coarse_grid(const ArrayConfig& cfg);

// Positions of the coarse cells in vec(Q) (column-major) order.
std::vector<GridPos> coarse_positions(const ArrayConfig& cfg);

// Embeds Q (m_row x m_col) into the full candidate grid.
MatrixXd coarse_to_full(const MatrixXd& q, const ArrayConfig& cfg);

SelectionState indices_to_selection(std::span<const int> x, std::span<const int> y, const ArrayConfig& cfg);
SelectionState positions_to_selection(std::span<const GridPos> positions, const ArrayConfig& cfg);

// Nonzero coordinates of a binary grid, sorted lexicographically by (row, col).
std::vector<GridPos> extract_positions(const MatrixXi& p_matrix);

// vec(P) as a real vector of length n_p.
VectorXd selection_vector(const SelectionState& state);

// Every grid position that keeps the spacing rule against all selected
// antennas other than `antenna_order` (1-based). Row-major scan order.
std::vector<GridPos> candidate_set(const SelectionState& state, int antenna_order, const ArrayConfig& cfg);

nlohmann::json selection_to_json(const SelectionState& state, const ArrayConfig& cfg);
SelectionState selection_from_json(const nlohmann::json& j, const ArrayConfig& cfg);

} // namespace dualband
