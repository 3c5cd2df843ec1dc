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

#include <limits>
#include <string>
#include <vector>

#include "dualband/conic.hpp"
#include "dualband/geometry.hpp"
#include "dualband/types.hpp"

namespace dualband {

struct Sub6gScenario {
    ArrayConfig cfg;
    MatrixXcd h;      // N_p x K_s
    VectorXd gamma;   // linear SINR thresholds, one per user
    std::vector<Direction> targets;
    VectorXd upsilon; // gain thresholds, one per target
    double noise_power = 1.0;
    GainConvention convention = GainConvention::Squared;
    MatrixXcd steering; // N_p x T_s, filled by make()

    int users() const { return static_cast<int>(h.cols()); }
    int num_targets() const { return static_cast<int>(targets.size()); }
    double sigma() const;
    // Threshold applied to the quadratic form inside the optimizers.
    double quad_threshold(int t) const { return quadratic_threshold(upsilon(t), convention); }

    void validate() const;
    static Sub6gScenario make(const ArrayConfig& cfg, const MatrixXcd& h, const VectorXd& gamma,
                              const std::vector<Direction>& targets, const VectorXd& upsilon,
                              double noise_power = 1.0, GainConvention convention = GainConvention::Squared);
};

struct Sub6gDesign {
    MatrixXcd f_s; // N_p x K_s; rows of unselected positions are zero
    SelectionState selection;
    double power = 0.0;
};

struct Sub6gOptions {
    double kappa = 10.0;
    int abas_iters = 10;
    double mu_init = 1.0;
    double mu_growth = 2.0;
    double mu_max = 1e3;
    int fs_iters = 0;          // 0 selects 3 * n_s
    double power_floor = 0.0;  // stop FS-JBAS once the power drops to this value
    int sca_iters = 30;
    double sca_tol = 1e-6;
    double support_tol = 1e-6; // relaxed entries below this are treated as off
    bool parallel = true;
    conic::Settings solver;

    int fs_iteration_cap(int n_s) const { return fs_iters > 0 ? fs_iters : 3 * n_s; }
};

// ---- metrics -------------------------------------------------------------

double sinr_sub6g(const Sub6gDesign& design, const Sub6gScenario& scen, int user);
// l2-norm gain ||F^H diag(p) beta_t||.
double gain_sub6g(const Sub6gDesign& design, const Sub6gScenario& scen, int target);
double selection_power(const MatrixXcd& f_s, const SelectionState& selection);

struct ConstraintCheck {
    double worst_sinr_ratio = std::numeric_limits<double>::infinity(); // min_k SINR_k / Gamma_k
    double worst_gain_ratio = std::numeric_limits<double>::infinity(); // min_t value / threshold
    bool ok = false;
};

// Re-checks every SINR and gain constraint with the metric functions above.
ConstraintCheck check_sub6g(const Sub6gDesign& design, const Sub6gScenario& scen, double rel_tol = 1e-4);

// Interference-free SINR and total-power gain bounds for a power budget.
struct Sub6gPrecheck {
    std::vector<double> sinr_bound;
    std::vector<double> gain_bound;
    std::vector<std::string> warnings;
};
Sub6gPrecheck precheck_sub6g(const Sub6gScenario& scen, double power_budget);

// ---- per-selection beamforming -----------------------------------------

struct SelectionSolve {
    MatrixXcd f_s; // N_p x K_s
    double power = std::numeric_limits<double>::infinity();
    bool feasible = false;
    int sca_iters = 0;
};

// Minimum-power beamformer for a fixed binary selection: SINR-only solve,
// scaling to gain feasibility, then successive convex approximation.
SelectionSolve solve_fixed_selection(const Sub6gScenario& scen, const SelectionState& selection,
                                     const Sub6gOptions& opts);

// ---- ABAS ------------------------------------------------------------------

struct RelaxedState {
    MatrixXcd f_s; // N_p x K_s
    VectorXd q;    // relaxed selection over coarse cells, vec(Q) order
};

RelaxedState abas_init(const Sub6gScenario& scen, const Sub6gOptions& opts);

// Relaxed selection on the full grid from coarse-cell values.
VectorXd relaxed_p(const VectorXd& q, const ArrayConfig& cfg);

// F-step at fixed relaxed selection; throws InfeasibleError.
MatrixXcd abas_step_fs(const Sub6gScenario& scen, const VectorXd& q, const MatrixXcd& f_bar, const Sub6gOptions& opts);

// P-step (majorization-minimization surrogate) at fixed F; throws InfeasibleError.
VectorXd abas_step_p(const Sub6gScenario& scen, const MatrixXcd& f_bar, const VectorXd& q_bar, double mu,
                     const Sub6gOptions& opts);

// ||diag(p) F||^2 + mu q'(1 - q).
double penalized_objective(const Sub6gScenario& scen, const MatrixXcd& f, const VectorXd& q, double mu);
// ||diag(p) F||^2 - 2 mu q_bar' q.
double surrogate_objective(const Sub6gScenario& scen, const MatrixXcd& f, const VectorXd& q, const VectorXd& q_bar,
                           double mu);

// Entrywise rounding of relaxed values over `cells`, repaired greedily
// (largest value first, skipping spacing conflicts, ties to the smaller
// (row, col)) whenever the rounded pattern is not a valid selection.
SelectionState round_selection(const VectorXd& values, const std::vector<GridPos>& cells, const ArrayConfig& cfg);

struct AbasIteration {
    int iteration = 0;
    double mu = 0.0;
    double power = 0.0;                // ||diag(p) F||^2 after the F-step
    double penalized_before = 0.0;     // at (F, q_bar)
    double penalized_after = 0.0;      // at (F, q)
    VectorXd q;
};

struct AbasResult {
    Sub6gDesign design;
    VectorXd q;
    std::vector<AbasIteration> trace;
};

// Algorithm on the coarse grid followed by rounding and a final fixed-selection
// solve; throws InfeasibleError when no feasible design is found.
AbasResult abas(const Sub6gScenario& scen, const Sub6gOptions& opts);

} // namespace dualband
