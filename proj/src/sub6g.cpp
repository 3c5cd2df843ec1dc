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

#include "dualband/sub6g.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "dualband/channel.hpp"
#include "dualband/lift.hpp"

namespace dualband {

namespace {

using conic::ComplexSocpBuilder;
using conic::RealAffine;

// Beamforming subproblem over an explicit antenna subset (rows of h / beta).
struct BfProblem {
    MatrixXcd h;    // n x K
    MatrixXcd beta; // n x T
    VectorXd gamma;
    double sigma = 1.0;
    VectorXd ups_q;
};

bool usable(const conic::ConicSolution& sol)
{
    if (sol.status == conic::Status::Optimal)
        return true;
    return sol.status == conic::Status::MaxIters && sol.primal_res <= 1e-5 && sol.dual_res <= 1e-4 &&
           sol.gap <= 1e-4;
}

VectorXd gains_sq(const MatrixXcd& g, const MatrixXcd& beta)
{
    VectorXd out(beta.cols());
    for (Eigen::Index t = 0; t < beta.cols(); ++t)
        out(t) = (g.adjoint() * beta.col(t)).squaredNorm();
    return out;
}

// Minimises ||G||_F subject to the SOC SINR constraints and, when `lin` is
// given, the gain constraints linearised at `lin`.
std::optional<MatrixXcd> solve_bf(const BfProblem& bp, const MatrixXcd* lin, const conic::Settings& st)
{
    const Eigen::Index n = bp.h.rows();
    const Eigen::Index k_users = bp.h.cols();
    ComplexSocpBuilder b;
    const auto g = b.add_complex(static_cast<int>(n * k_users));

    for (Eigen::Index k = 0; k < k_users; ++k) {
        // Row i holds h_k^H g_i.
        MatrixXcd e = MatrixXcd::Zero(k_users, n * k_users);
        for (Eigen::Index i = 0; i < k_users; ++i)
            e.block(i, i * n, 1, n) = bp.h.col(k).adjoint();
        const auto expr = b.mul(e, g);
        const RealAffine signal = expr.re.row(static_cast<int>(k));
        const double scale = std::sqrt(1.0 + 1.0 / bp.gamma(k));
        b.add_soc(signal.scaled(scale), conic::vstack({expr.re, expr.im, b.real_constant(VectorXd::Constant(1, bp.sigma))}));
        b.add_nonneg(signal);
    }
    if (lin != nullptr) {
        for (Eigen::Index t = 0; t < bp.beta.cols(); ++t) {
            const VectorXcd xbar = (bp.beta.col(t).adjoint() * *lin).transpose(); // beta^H g_bar_i
            MatrixXcd r = MatrixXcd::Zero(1, n * k_users);
            // |beta^H g_i|^2 >= 2 Re{conj(x_i) beta^H g_i} - |x_i|^2 with x_i = beta^H g_bar_i.
            for (Eigen::Index i = 0; i < k_users; ++i)
                r.block(0, i * n, 1, n) = std::conj(xbar(i)) * bp.beta.col(t).adjoint();
            const RealAffine lin_gain = b.mul(r, g).re.scaled(2.0);
            const double offset = -xbar.squaredNorm() - bp.ups_q(t);
            b.add_nonneg(lin_gain + b.real_constant(VectorXd::Constant(1, offset)));
        }
    }
    b.minimize_norm(b.realify(b.mul(MatrixXcd::Identity(n * k_users, n * k_users), g)));

    const conic::ConicSolution sol = conic::solve(b.lift(), st);
    if (!usable(sol))
        return std::nullopt;
    return b.unlift(sol.x, g).reshaped(n, k_users).eval();
}

// SINR-only optimum scaled until every gain constraint holds.
std::optional<MatrixXcd> feasible_start(const BfProblem& bp, const conic::Settings& st)
{
    auto g = solve_bf(bp, nullptr, st);
    if (!g)
        return std::nullopt;
    if (bp.beta.cols() == 0)
        return g;
    VectorXd gs = gains_sq(*g, bp.beta);
    // A gain of exactly zero cannot be scaled up; nudge toward the target first.
    const double ref = std::max(g->norm(), 1e-9);
    for (Eigen::Index t = 0; t < bp.beta.cols(); ++t)
        if (gs(t) < 1e-12 * std::max(bp.ups_q(t), 1.0) && bp.ups_q(t) > 0.0)
            g->col(0) += 1e-3 * ref * bp.beta.col(t) / bp.beta.col(t).norm();
    gs = gains_sq(*g, bp.beta);
    double c = 1.0;
    for (Eigen::Index t = 0; t < bp.beta.cols(); ++t)
        if (gs(t) < bp.ups_q(t))
            c = std::max(c, std::sqrt(bp.ups_q(t) / gs(t)));
    *g *= c * (1.0 + 1e-9);
    return g;
}

bool gains_met(const MatrixXcd& g, const BfProblem& bp)
{
    const VectorXd gs = gains_sq(g, bp.beta);
    for (Eigen::Index t = 0; t < gs.size(); ++t)
        if (gs(t) < bp.ups_q(t))
            return false;
    return true;
}

BfProblem restrict(const Sub6gScenario& scen, const std::vector<int>& rows)
{
    BfProblem bp;
    const auto n = static_cast<Eigen::Index>(rows.size());
    bp.h.resize(n, scen.users());
    bp.beta.resize(n, scen.num_targets());
    for (Eigen::Index i = 0; i < n; ++i) {
        bp.h.row(i) = scen.h.row(rows[static_cast<std::size_t>(i)]);
        bp.beta.row(i) = scen.steering.row(rows[static_cast<std::size_t>(i)]);
    }
    bp.gamma = scen.gamma;
    bp.sigma = scen.sigma();
    bp.ups_q.resize(scen.num_targets());
    for (int t = 0; t < scen.num_targets(); ++t)
        bp.ups_q(t) = scen.quad_threshold(t);
    return bp;
}

std::vector<int> selection_rows(const SelectionState& sel, const ArrayConfig& cfg)
{
    std::vector<int> rows;
    for (int a = 0; a < sel.size(); ++a)
        rows.push_back(vec_index(sel.position(a), cfg.grid_rows()));
    return rows;
}

std::vector<int> coarse_rows(const ArrayConfig& cfg)
{
    std::vector<int> rows;
    for (const GridPos& g : coarse_positions(cfg))
        rows.push_back(vec_index(g, cfg.grid_rows()));
    return rows;
}

} // namespace

// ---- scenario --------------------------------------------------------------

double Sub6gScenario::sigma() const
{
    return std::sqrt(noise_power);
}

void Sub6gScenario::validate() const
{
    cfg.validate();
    if (h.rows() != cfg.n_p())
        throw std::invalid_argument("Sub6gScenario: channel rows do not match the candidate grid");
    if (gamma.size() != h.cols())
        throw std::invalid_argument("Sub6gScenario: one SINR threshold per user is required");
    if ((gamma.array() <= 0.0).any())
        throw std::invalid_argument("Sub6gScenario: SINR thresholds must be positive");
    if (upsilon.size() != static_cast<Eigen::Index>(targets.size()))
        throw std::invalid_argument("Sub6gScenario: one gain threshold per target is required");
    if ((upsilon.array() < 0.0).any())
        throw std::invalid_argument("Sub6gScenario: gain thresholds must be non-negative");
    if (!(noise_power > 0.0))
        throw std::invalid_argument("Sub6gScenario: noise power must be positive");
}

Sub6gScenario Sub6gScenario::make(const ArrayConfig& cfg, const MatrixXcd& h, const VectorXd& gamma,
                                  const std::vector<Direction>& targets, const VectorXd& upsilon, double noise_power,
                                  GainConvention convention)
{
    Sub6gScenario s{cfg, h, gamma, targets, upsilon, noise_power, convention, {}};
    s.validate();
    s.steering = steering_beta_matrix(cfg, targets);
    return s;
}

// ---- metrics -----------------------------------------------------------------

double sinr_sub6g(const Sub6gDesign& design, const Sub6gScenario& scen, int user)
{
    if (user < 0 || user >= scen.users())
        throw std::invalid_argument("sinr_sub6g: user index out of range");
    const VectorXd p = selection_vector(design.selection);
    const VectorXcd eff = p.cast<cx>().cwiseProduct(scen.h.col(user));
    const VectorXcd resp = design.f_s.adjoint() * eff; // conj of h^H diag(p) f_i
    double interference = 0.0;
    for (Eigen::Index i = 0; i < resp.size(); ++i)
        if (i != user)
            interference += std::norm(resp(i));
    return std::norm(resp(user)) / (interference + scen.noise_power);
}

double gain_sub6g(const Sub6gDesign& design, const Sub6gScenario& scen, int target)
{
    if (target < 0 || target >= scen.num_targets())
        throw std::invalid_argument("gain_sub6g: target index out of range");
    const VectorXd p = selection_vector(design.selection);
    return (design.f_s.adjoint() * p.cast<cx>().cwiseProduct(scen.steering.col(target))).norm();
}

double selection_power(const MatrixXcd& f_s, const SelectionState& selection)
{
    const VectorXd p = selection_vector(selection);
    return (p.cast<cx>().asDiagonal() * f_s).squaredNorm();
}

ConstraintCheck check_sub6g(const Sub6gDesign& design, const Sub6gScenario& scen, double rel_tol)
{
    ConstraintCheck c;
    for (int k = 0; k < scen.users(); ++k)
        c.worst_sinr_ratio = std::min(c.worst_sinr_ratio, sinr_sub6g(design, scen, k) / scen.gamma(k));
    bool gains_ok = true;
    for (int t = 0; t < scen.num_targets(); ++t) {
        const double g = gain_sub6g(design, scen, t);
        if (scen.upsilon(t) > 0.0) {
            const double value = scen.convention == GainConvention::Squared ? g * g : g;
            c.worst_gain_ratio = std::min(c.worst_gain_ratio, value / scen.upsilon(t));
        }
        gains_ok = gains_ok && gain_meets(g, scen.upsilon(t), scen.convention, rel_tol);
    }
    c.ok = c.worst_sinr_ratio >= 1.0 - rel_tol && gains_ok;
    return c;
}

Sub6gPrecheck precheck_sub6g(const Sub6gScenario& scen, double power_budget)
{
    Sub6gPrecheck r;
    // Best case: all power on one user through its N_s strongest candidates.
    for (int k = 0; k < scen.users(); ++k) {
        VectorXd mag = scen.h.col(k).cwiseAbs2();
        std::sort(mag.data(), mag.data() + mag.size(), std::greater<>());
        const double best = mag.head(std::min<Eigen::Index>(scen.cfg.n_s, mag.size())).sum();
        r.sinr_bound.push_back(power_budget * best / scen.noise_power);
        if (scen.gamma(k) > r.sinr_bound.back())
            r.warnings.push_back("user " + std::to_string(k) + ": SINR threshold exceeds the interference-free bound");
    }
    for (int t = 0; t < scen.num_targets(); ++t) {
        // |beta| = 1 per entry, so ||F^H diag(p) beta||^2 <= P * N_s.
        const double bound_sq = power_budget * scen.cfg.n_s;
        const double bound = scen.convention == GainConvention::Squared ? bound_sq : std::sqrt(bound_sq);
        r.gain_bound.push_back(bound);
        if (scen.upsilon(t) > bound)
            r.warnings.push_back("target " + std::to_string(t) + ": gain threshold exceeds the total-power bound");
    }
    return r;
}

// ---- per-selection ---------------------------------------------------------

SelectionSolve solve_fixed_selection(const Sub6gScenario& scen, const SelectionState& selection,
                                     const Sub6gOptions& opts)
{
    SelectionSolve out;
    out.f_s = MatrixXcd::Zero(scen.cfg.n_p(), scen.users());
    const std::vector<int> rows = selection_rows(selection, scen.cfg);
    const BfProblem bp = restrict(scen, rows);

    auto start = feasible_start(bp, opts.solver);
    if (!start)
        return out;
    MatrixXcd g = *start;
    double power = g.squaredNorm();
    const bool needs_sca = bp.beta.cols() > 0 && (bp.ups_q.array() > 0.0).any();
    if (needs_sca) {
        for (int it = 0; it < opts.sca_iters; ++it) {
            auto next = solve_bf(bp, &g, opts.solver);
            if (!next || !gains_met(*next, bp)) {
                // Solver tolerance can leave a gain a hair short; scale it back.
                if (next) {
                    const VectorXd gs = gains_sq(*next, bp.beta);
                    double c = 1.0;
                    for (Eigen::Index t = 0; t < gs.size(); ++t)
                        if (gs(t) < bp.ups_q(t))
                            c = std::max(c, std::sqrt(bp.ups_q(t) / std::max(gs(t), 1e-300)));
                    if (c < 1.0 + 1e-4)
                        *next *= c;
                    else
                        next.reset();
                }
                if (!next)
                    break;
            }
            const double np = next->squaredNorm();
            out.sca_iters = it + 1;
            const bool stalled = std::abs(power - np) <= opts.sca_tol * std::max(power, 1e-12);
            if (np <= power) {
                g = *next;
                power = np;
            }
            if (stalled)
                break;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.f_s.row(rows[i]) = g.row(static_cast<Eigen::Index>(i));
    out.power = selection_power(out.f_s, selection);
    out.feasible = true;
    return out;
}

// ---- ABAS ----------------------------------------------------------------------

VectorXd relaxed_p(const VectorXd& q, const ArrayConfig& cfg)
{
    const std::vector<int> rows = coarse_rows(cfg);
    if (q.size() != static_cast<Eigen::Index>(rows.size()))
        throw std::invalid_argument("relaxed_p: q does not match the coarse grid");
    VectorXd p = VectorXd::Zero(cfg.n_p());
    for (std::size_t m = 0; m < rows.size(); ++m)
        p(rows[m]) = q(static_cast<Eigen::Index>(m));
    return p;
}

RelaxedState abas_init(const Sub6gScenario& scen, const Sub6gOptions& opts)
{
    RelaxedState st;
    VectorXcd steer_sum = VectorXcd::Zero(scen.cfg.n_p());
    for (int t = 0; t < scen.num_targets(); ++t)
        steer_sum += scen.steering.col(t);
    st.f_s.resize(scen.cfg.n_p(), scen.users());
    for (int k = 0; k < scen.users(); ++k)
        st.f_s.col(k) = opts.kappa * (scen.h.col(k) + steer_sum);
    const auto cells = coarse_positions(scen.cfg);
    st.q = VectorXd::Constant(static_cast<Eigen::Index>(cells.size()),
                              static_cast<double>(scen.cfg.n_s) / static_cast<double>(cells.size()));
    return st;
}

MatrixXcd abas_step_fs(const Sub6gScenario& scen, const VectorXd& q, const MatrixXcd& f_bar, const Sub6gOptions& opts)
{
    const VectorXd p = relaxed_p(q, scen.cfg);
    std::vector<int> rows;
    for (int i = 0; i < p.size(); ++i)
        if (p(i) > opts.support_tol)
            rows.push_back(i);
    if (rows.empty())
        throw InfeasibleError("abas_step_fs: relaxed selection is empty");
    const BfProblem bp = restrict(scen, rows);
    MatrixXcd g_bar(static_cast<Eigen::Index>(rows.size()), scen.users());
    for (std::size_t i = 0; i < rows.size(); ++i)
        g_bar.row(static_cast<Eigen::Index>(i)) = p(rows[i]) * f_bar.row(rows[i]);

    std::optional<MatrixXcd> g;
    const bool has_gain = bp.beta.cols() > 0;
    g = solve_bf(bp, has_gain ? &g_bar : nullptr, opts.solver);
    if (!g && has_gain) {
        // Linearisation point no longer usable; restart from a feasible point.
        auto start = feasible_start(bp, opts.solver);
        if (!start)
            throw InfeasibleError("abas_step_fs: SINR constraints infeasible on the relaxed selection");
        g = solve_bf(bp, &*start, opts.solver);
        if (!g)
            g = start;
    }
    if (!g)
        throw InfeasibleError("abas_step_fs: SINR constraints infeasible on the relaxed selection");

    MatrixXcd f = f_bar;
    for (std::size_t i = 0; i < rows.size(); ++i)
        f.row(rows[i]) = g->row(static_cast<Eigen::Index>(i)) / p(rows[i]);
    return f;
}

VectorXd abas_step_p(const Sub6gScenario& scen, const MatrixXcd& f_bar, const VectorXd& q_bar, double mu,
                     const Sub6gOptions& opts)
{
    const std::vector<int> rows = coarse_rows(scen.cfg);
    const auto m_cells = static_cast<Eigen::Index>(rows.size());
    if (q_bar.size() != m_cells)
        throw std::invalid_argument("abas_step_p: q_bar does not match the coarse grid");
    const int k_users = scen.users();
    MatrixXcd fc(m_cells, k_users), hc(m_cells, k_users), bc(m_cells, scen.num_targets());
    for (Eigen::Index m = 0; m < m_cells; ++m) {
        fc.row(m) = f_bar.row(rows[static_cast<std::size_t>(m)]);
        hc.row(m) = scen.h.row(rows[static_cast<std::size_t>(m)]);
        bc.row(m) = scen.steering.row(rows[static_cast<std::size_t>(m)]);
    }

    ComplexSocpBuilder b;
    const auto q = b.add_real(static_cast<int>(m_cells));
    b.add_bounds(q, 0.0, 1.0);
    b.add_equal(b.mul(MatrixXd::Ones(1, m_cells), q) -
                b.real_constant(VectorXd::Constant(1, static_cast<double>(scen.cfg.n_s))));

    for (int k = 0; k < k_users; ++k) {
        // C(i, m) = conj(F(m, i)) h_k(m): row i is f_i^H diag(h_k) p.
        const MatrixXcd c = fc.adjoint() * hc.col(k).asDiagonal();
        const RealAffine re = b.mul(MatrixXd(c.real()), q);
        const RealAffine im = b.mul(MatrixXd(c.imag()), q);
        const RealAffine signal = re.row(k);
        b.add_soc(signal.scaled(std::sqrt(1.0 + 1.0 / scen.gamma(k))),
                  conic::vstack({re, im, b.real_constant(VectorXd::Constant(1, scen.sigma()))}));
        b.add_nonneg(signal);
    }
    for (int t = 0; t < scen.num_targets(); ++t) {
        const MatrixXcd bt = fc.adjoint() * bc.col(t).asDiagonal(); // K x M
        const VectorXcd vbar = bt * q_bar;
        const Eigen::RowVectorXcd coeff = vbar.adjoint() * bt;
        const RealAffine lin = b.mul(MatrixXd(coeff.real()), q).scaled(2.0);
        b.add_nonneg(lin + b.real_constant(VectorXd::Constant(1, -vbar.squaredNorm() - scen.quad_threshold(t))));
    }
    const VectorXd row_norm = fc.rowwise().norm();
    const auto t_var = b.square_epigraph(b.mul(MatrixXd(row_norm.asDiagonal()), q));
    b.minimize(b.var(t_var));
    b.minimize(b.mul(MatrixXd((-2.0 * mu * q_bar).transpose()), q));

    const conic::ConicSolution sol = conic::solve(b.lift(), opts.solver);
    if (!usable(sol))
        throw InfeasibleError("abas_step_p: selection subproblem failed (" + conic::to_string(sol.status) + ")");
    return b.unlift(sol.x, q).cwiseMax(0.0).cwiseMin(1.0);
}

double penalized_objective(const Sub6gScenario& scen, const MatrixXcd& f, const VectorXd& q, double mu)
{
    const VectorXd p = relaxed_p(q, scen.cfg);
    return (p.cast<cx>().asDiagonal() * f).squaredNorm() + mu * q.dot(VectorXd::Ones(q.size()) - q);
}

double surrogate_objective(const Sub6gScenario& scen, const MatrixXcd& f, const VectorXd& q, const VectorXd& q_bar,
                           double mu)
{
    const VectorXd p = relaxed_p(q, scen.cfg);
    return (p.cast<cx>().asDiagonal() * f).squaredNorm() - 2.0 * mu * q_bar.dot(q);
}

SelectionState round_selection(const VectorXd& values, const std::vector<GridPos>& cells, const ArrayConfig& cfg)
{
    if (values.size() != static_cast<Eigen::Index>(cells.size()))
        throw std::invalid_argument("round_selection: one value per cell is required");
    std::vector<GridPos> picked;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (values(static_cast<Eigen::Index>(i)) >= 0.5)
            picked.push_back(cells[i]);
    if (static_cast<int>(picked.size()) == cfg.n_s) {
        bool ok = true;
        for (std::size_t a = 0; a < picked.size() && ok; ++a)
            for (std::size_t c = a + 1; c < picked.size() && ok; ++c)
                ok = spacing_ok(picked[a], picked[c], cfg);
        if (ok) {
            std::sort(picked.begin(), picked.end());
            return positions_to_selection(picked, cfg);
        }
    }

    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        const double vl = values(static_cast<Eigen::Index>(l));
        const double vr = values(static_cast<Eigen::Index>(r));
        if (vl != vr)
            return vl > vr;
        return cells[l] < cells[r];
    });
    picked.clear();
    for (std::size_t idx : order) {
        if (static_cast<int>(picked.size()) == cfg.n_s)
            break;
        bool ok = true;
        for (const GridPos& g : picked)
            ok = ok && spacing_ok(g, cells[idx], cfg);
        if (ok)
            picked.push_back(cells[idx]);
    }
    if (static_cast<int>(picked.size()) < cfg.n_s) {
        // Coarse cells are mutually compatible, so they always complete the set.
        for (const GridPos& g : coarse_positions(cfg)) {
            if (static_cast<int>(picked.size()) == cfg.n_s)
                break;
            bool ok = std::find(picked.begin(), picked.end(), g) == picked.end();
            for (const GridPos& o : picked)
                ok = ok && spacing_ok(o, g, cfg);
            if (ok)
                picked.push_back(g);
        }
    }
    if (static_cast<int>(picked.size()) < cfg.n_s)
        throw InfeasibleError("round_selection: cannot place n_s spacing-feasible antennas");
    std::sort(picked.begin(), picked.end());
    return positions_to_selection(picked, cfg);
}

AbasResult abas(const Sub6gScenario& scen, const Sub6gOptions& opts)
{
    scen.validate();
    const auto cells = coarse_positions(scen.cfg);
    if (static_cast<int>(cells.size()) < scen.cfg.n_s)
        throw InfeasibleError("abas: the coarse grid holds fewer than n_s antennas");

    RelaxedState st = abas_init(scen, opts);
    AbasResult res;
    double mu = opts.mu_init;
    for (int it = 1; it <= opts.abas_iters; ++it) {
        AbasIteration rec;
        rec.iteration = it;
        rec.mu = mu;
        st.f_s = abas_step_fs(scen, st.q, st.f_s, opts);
        rec.power = (relaxed_p(st.q, scen.cfg).cast<cx>().asDiagonal() * st.f_s).squaredNorm();
        rec.penalized_before = penalized_objective(scen, st.f_s, st.q, mu);
        try {
            st.q = abas_step_p(scen, st.f_s, st.q, mu, opts);
        } catch (const InfeasibleError&) {
            // Keep the previous relaxed selection; it remains feasible.
        }
        rec.penalized_after = penalized_objective(scen, st.f_s, st.q, mu);
        rec.q = st.q;
        res.trace.push_back(std::move(rec));
        mu = std::min(mu * opts.mu_growth, opts.mu_max);
    }

    const SelectionState sel = round_selection(st.q, cells, scen.cfg);
    const SelectionSolve fin = solve_fixed_selection(scen, sel, opts);
    if (!fin.feasible)
        throw InfeasibleError("abas: the rounded selection admits no feasible beamformer");
    res.design = {fin.f_s, sel, fin.power};
    res.q = st.q;
    return res;
}

} // namespace dualband
