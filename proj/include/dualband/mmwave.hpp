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

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "dualband/conic.hpp"
#include "dualband/geometry.hpp"
#include "dualband/types.hpp"

namespace dualband {

// Hybrid precoder structures. FD has no analog stage; FCHB uses a dense
// unit-modulus analog matrix; PCHB, DHB and RHB use diag(f_p) * S.
enum class MmStructure { FD, FCHB, PCHB, DHB, RHB };

MmStructure parse_mm_structure(const std::string& name);
std::string to_string(MmStructure s);

struct MmWaveScenario {
    ArrayConfig cfg;
    MatrixXcd h; // N_m x K_m
    std::vector<Direction> targets;
    VectorXd upsilon; // one per target
    double noise_power = 1.0;
    double power = 1.0; // P_m
    GainConvention convention = GainConvention::Squared;
    MatrixXcd steering; // N_m x T_m, filled by make()

    int users() const { return static_cast<int>(h.cols()); }
    int num_targets() const { return static_cast<int>(targets.size()); }
    double quad_threshold(int t) const { return quadratic_threshold(upsilon(t), convention); }

    void validate() const;
    static MmWaveScenario make(const ArrayConfig& cfg, const MatrixXcd& h, const std::vector<Direction>& targets,
                               const VectorXd& upsilon, double noise_power, double power,
                               GainConvention convention = GainConvention::Squared);
};

struct RhbDesign {
    MmStructure kind = MmStructure::RHB;
    VectorXcd f_p;      // N_m, unit modulus
    MatrixXi s_matrix;  // N_m x N_RF, binary
    MatrixXcd f_rf_dense; // FCHB only: N_m x N_RF unit-modulus entries
    MatrixXcd f_bb;     // N_RF x K_m (FD: N_m x K_m, the full precoder)
    MatrixXcd f_m;      // auxiliary fully digital variable
    MatrixXcd duals;    // D
    VectorXcd u;
    VectorXd w;

    MatrixXcd f_rf() const;
    // F_RF * F_BB.
    MatrixXcd precoder() const;
};

struct MmWaveOptions {
    double rho = 1.0;
    double rho_decay = 0.7;
    int rho_decay_every = 10; // 0 disables the schedule
    int max_iters = 100;      // I_M
    double eps = 0.0;         // absolute; 0 selects eps_rel * P_m
    double eps_rel = 1e-4;
    int sca_iters = 10;       // I_S
    double sca_tol = 1e-6;
    int init_rounds = 20;
    int refine_rounds = 200;
    bool fast_path = true;
    bool parallel = true;
    conic::Settings solver;

    double stop_eps(double power) const { return eps > 0.0 ? eps : eps_rel * power; }
};

// Metrics on F = F_RF F_BB.
double sumrate(const MatrixXcd& f, const MmWaveScenario& scen);
double sumrate(const RhbDesign& design, const MmWaveScenario& scen);
double gain_mm(const MatrixXcd& f, const MmWaveScenario& scen, int target);
double gain_mm(const RhbDesign& design, const MmWaveScenario& scen, int target);
VectorXd sinr_mm(const MatrixXcd& f, const MmWaveScenario& scen);

struct MmCheck {
    double power = 0.0;
    double worst_gain_ratio = std::numeric_limits<double>::infinity();
    bool power_ok = false;
    bool gain_ok = false;
    bool hardware_ok = false;
    bool ok() const { return power_ok && gain_ok && hardware_ok; }
};

// Re-verifies the power budget, the sensing thresholds under the scenario
// convention and the structural constraints of the analog stage.
MmCheck check_mm(const RhbDesign& design, const MmWaveScenario& scen, double gain_rel_tol = 1e-3);
bool hardware_valid(const RhbDesign& design, int n_rf);

// MSE of user k for receive weight u_k.
double mse_user(const MatrixXcd& f_m, const MmWaveScenario& scen, int k, cx u_k);

// Penalised objective with explicit rho.
double lagrangian(const RhbDesign& design, const MmWaveScenario& scen, double rho);

// Initial fully digital beamformer kappa * (h_k + sum_t a_t), scaled to P_m.
MatrixXcd initial_fm(const MmWaveScenario& scen);
RhbDesign rhb_init(const MmWaveScenario& scen, const MmWaveOptions& opts, MmStructure kind = MmStructure::RHB);

VectorXcd update_u(const MatrixXcd& f_m, const MmWaveScenario& scen);
VectorXd update_w(const MatrixXcd& f_m, const VectorXcd& u, const MmWaveScenario& scen);

struct FmSolve {
    MatrixXcd f_m;
    std::vector<double> objective; // inner objective per accepted SCA iterate, starting at the input
    int solves = 0;
    int fast = 0;
};

// WMMSE objective plus (1/(2 rho)) ||F - G||^2 with G = F_RF F_BB - rho D.
// rho = +inf drops the proximity term.
double fm_objective(const MatrixXcd& f, const MmWaveScenario& scen, const VectorXcd& u, const VectorXd& w,
                    const MatrixXcd& g, double rho);

FmSolve update_fm(const MmWaveScenario& scen, const VectorXcd& u, const VectorXd& w, const MatrixXcd& f_start,
                  const MatrixXcd& g, double rho, const MmWaveOptions& opts);

// One linearised subproblem, solved through the conic back end (no fast path).
MatrixXcd solve_fm_conic(const MmWaveScenario& scen, const VectorXcd& u, const VectorXd& w, const MatrixXcd& f_lin,
                         const MatrixXcd& g, double rho, const conic::Settings& st);

// Per-row analog update against F_k. Returns the new (f_p, S); for FCHB the
// dense matrix is updated in place of f_rf_dense.
struct AnalogUpdate {
    VectorXcd f_p;
    MatrixXi s_matrix;
    MatrixXcd f_rf_dense;
};
AnalogUpdate update_fp_s(const RhbDesign& design, const MatrixXcd& f_k, int n_rf, bool parallel = true);

// Row kernels: for every row m choose the switch pattern and phase that
// minimise ||F_k[m,:]^T - f_p[m] F_BB^T s_m||. `mode` restricts the patterns.
enum class PatternSet { All, OneHot, Fixed };
void fp_s_rows_serial(const MatrixXcd& f_k, const MatrixXcd& f_bb, PatternSet mode, VectorXcd& f_p, MatrixXi& s);
void fp_s_rows_omp(const MatrixXcd& f_k, const MatrixXcd& f_bb, PatternSet mode, VectorXcd& f_p, MatrixXi& s);
// Per-row cost C_m for the given phase and pattern.
double row_residual(const MatrixXcd& f_k, const MatrixXcd& f_bb, int m, cx f_p, const Eigen::Ref<const Eigen::RowVectorXi>& s_row);

// Exact coordinate sweep over the entries of a dense unit-modulus F_RF.
void fchb_rows_serial(const MatrixXcd& f_k, const MatrixXcd& f_bb, MatrixXcd& f_rf);
void fchb_rows_omp(const MatrixXcd& f_k, const MatrixXcd& f_bb, MatrixXcd& f_rf);

// Least squares F_BB = (F_RF^H F_RF)^{-1} F_RF^H F_k. Throws RankDeficientError.
MatrixXcd update_fbb(const MatrixXcd& f_rf, const MatrixXcd& f_k);
// Switches on the best antenna for every RF chain that has none.
// Returns the number of repaired chains.
int repair_switches(RhbDesign& design, const MatrixXcd& f_k);

MatrixXcd update_dual(const MatrixXcd& duals, const MatrixXcd& f_m, const MatrixXcd& hybrid, double rho);

// Block-wise record of one ADMM iteration; l[0] is L before the u step and
// l[1..5] follow the u, w, F_m, (f_p, S) and F_BB steps, all with D frozen.
struct MmIteration {
    int iteration = 0;
    double rho = 0.0;
    std::array<double, 6> l{};
    double primal_res = 0.0; // ||F_m - F_RF F_BB||_F
    double change = 0.0;     // ||F^{(i)} - F^{(i-1)}||_F^2
    double sumrate = 0.0;
    double min_gain = 0.0;
    int repaired = 0;
};

struct MmResult {
    RhbDesign design;
    std::vector<MmIteration> trace;
    int iterations = 0;
    bool converged = false;
    double final_primal_res = 0.0;
};

MmResult admm_rhb(const MmWaveScenario& scen, const MmWaveOptions& opts, MmStructure kind = MmStructure::RHB);

// Final F_BB pass with F_RF fixed: WMMSE rounds with power and linearised gain
// constraints over F_BB, then a power rescale. Returns false when no
// gain-feasible F_BB was found (the design keeps the least-squares F_BB).
bool refine_fbb(RhbDesign& design, const MmWaveScenario& scen, const MmWaveOptions& opts);

struct BeampatternCell {
    double el = 0.0;
    double az = 0.0;
    double gain = 0.0; // ||F^H a||
};
std::vector<BeampatternCell> beampattern(const MatrixXcd& f, const ArrayConfig& cfg, int resolution);

} // namespace dualband
