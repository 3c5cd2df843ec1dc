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

// Independent reference implementations used only by the tests. Nothing here
// calls into the library's numerical code paths.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dualband/conic.hpp"
#include "dualband/geometry.hpp"

namespace oracle {

using cx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// ---- geometry --------------------------------------------------------------

// Conflict iff both offsets are short.
bool positions_compatible(int r1, int c1, int r2, int c2, int v_s, int h_s);
bool selection_ok(const std::vector<std::pair<int, int>>& pos, int v_s, int h_s);
// Positions (1-based) where antenna `k` may move given the others.
std::vector<std::pair<int, int>> candidates(const std::vector<std::pair<int, int>>& pos, int k, int grid_rows,
                                            int grid_cols, int v_s, int h_s);
// Every spacing-feasible n-subset of the grid, positions sorted.
std::vector<std::vector<std::pair<int, int>>> feasible_subsets(int grid_rows, int grid_cols, int n, int v_s, int h_s);

// ---- steering and metrics (plain loops) ----------------------------------

cx steer(int i, double angle, double ratio); // exp(j pi i ratio angle), 0-based i
// Entry for grid position (row m, col n), both 1-based, in column-major order.
VectorXcd beta(int rows, int cols, double el, double az, double ratio);

double sinr(const MatrixXcd& h, const MatrixXcd& f, int k, double noise);
double gain(const MatrixXcd& f, const VectorXcd& a); // ||F^H a||
double sumrate(const MatrixXcd& h, const MatrixXcd& f, double noise);

// ---- conic ------------------------------------------------------------------

struct KktCheck {
    double primal = 0.0; // ||A x + s - b||_inf / (1 + ||b||_inf)
    double dual = 0.0;   // ||A'y + c||_inf / (1 + ||c||_inf)
    double gap = 0.0;    // |c'x + b'y| / (1 + |c'x|)
    double cone = 0.0;   // worst violation of s in K, y in K*
    double worst() const;
};
KktCheck kkt(const dualband::conic::ConicProblem& p, const VectorXd& x, const VectorXd& s, const VectorXd& y);

// Largest violation of A x + s = b, s in K when s is chosen as b - A x.
double infeasibility(const dualband::conic::ConicProblem& p, const VectorXd& x);

// Central-cut ellipsoid method over the affine set {x : rows of Zero blocks
// hold} intersected with the box [-box, box]^n. Returns the best feasible
// objective seen (+inf if no feasible centre was ever found).
double ellipsoid_minimum(const dualband::conic::ConicProblem& p, double box, int max_iters = 20000);

// ---- mmWave row search ----------------------------------------------------

// min over switch patterns and phases exp(j 2 pi q / steps) of
// ||f_k_row^T - phase * F_bb^T s||^2.
double row_bruteforce(const VectorXcd& fk_row, const MatrixXcd& f_bb, int steps);
double row_cost(const VectorXcd& fk_row, const MatrixXcd& f_bb, cx phase, const Eigen::RowVectorXi& s);

} // namespace oracle
