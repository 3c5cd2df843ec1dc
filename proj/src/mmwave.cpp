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

#include "dualband/mmwave.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dualband/channel.hpp"
#include "dualband/lift.hpp"

namespace dualband {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool usable(const conic::ConicSolution& sol)
{
    if (sol.status == conic::Status::Optimal)
        return true;
    return sol.status == conic::Status::MaxIters && sol.primal_res <= 1e-5 && sol.dual_res <= 1e-4 &&
           sol.gap <= 1e-4;
}

VectorXd quad_gains(const MatrixXcd& f, const MatrixXcd& steering)
{
    VectorXd out(steering.cols());
    for (Eigen::Index t = 0; t < steering.cols(); ++t)
        out(t) = (f.adjoint() * steering.col(t)).squaredNorm();
    return out;
}

bool gains_feasible(const MatrixXcd& f, const MmWaveScenario& scen, double rel_tol)
{
    const VectorXd g = quad_gains(f, scen.steering);
    for (int t = 0; t < scen.num_targets(); ++t)
        if (g(t) < scen.quad_threshold(t) * (1.0 - rel_tol))
            return false;
    return true;
}

// Orthonormal basis of range(m), rank decided relative to the largest pivot.
MatrixXcd orth(const MatrixXcd& m)
{
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(m);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(m.rows(), rank);
    return q;
}

// Problem in coordinates F = Q C: WMMSE terms, optional proximity to G,
// power ||C||^2 <= P and gains linearised at f_lin.
struct Subspace {
    MatrixXcd q;  // N x r
    MatrixXcd hr; // r x K
    MatrixXcd ar; // r x T
    MatrixXcd gr; // r x K (empty without proximity)
    double prox = 0.0; // 1 / (2 rho)
};

struct LinearGains {
    std::vector<MatrixXcd> per_target; // r x K each, Re(coef^H C) >= rhs
    VectorXd rhs;
};

LinearGains linearise(const Subspace& sp, const MatrixXcd& f_lin, const MmWaveScenario& scen)
{
    LinearGains lg;
    std::vector<double> rhs;
    for (int t = 0; t < scen.num_targets(); ++t) {
        if (scen.quad_threshold(t) <= 0.0)
            continue; // vacuous constraint
        const VectorXcd abar = f_lin.adjoint() * scen.steering.col(t); // conj(a^H f_j)
        // 2 Re(sum_j conj(a^H fbar_j) a^H f_j) = Re(sum_j coef_j^H c_j), coef_j = 2 (a^H fbar_j) ar
        MatrixXcd coef(sp.ar.rows(), f_lin.cols());
        for (Eigen::Index j = 0; j < f_lin.cols(); ++j)
            coef.col(j) = 2.0 * std::conj(abar(j)) * sp.ar.col(t);
        lg.per_target.push_back(coef);
        rhs.push_back(scen.quad_threshold(t) + abar.squaredNorm());
    }
    lg.rhs = Eigen::Map<const VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    return lg;
}

double linear_value(const MatrixXcd& coef, const MatrixXcd& c)
{
    return (coef.adjoint() * c).trace().real();
}

// min 0.5 v'Qv - q'v over v >= 0 by a Lawson-Hanson style active set.
VectorXd nonneg_qp(const MatrixXd& qm, const VectorXd& q)
{
    const Eigen::Index n = q.size();
    VectorXd v = VectorXd::Zero(n);
    std::vector<bool> free(static_cast<std::size_t>(n), false);
    const double tol = 1e-13 * (1.0 + qm.diagonal().cwiseAbs().maxCoeff()) * (1.0 + q.cwiseAbs().maxCoeff());
    for (int outer = 0; outer < 4 * static_cast<int>(n) + 10; ++outer) {
        const VectorXd grad = qm * v - q;
        Eigen::Index add = -1;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!free[static_cast<std::size_t>(i)] && grad(i) < -tol && (add < 0 || grad(i) < grad(add)))
                add = i;
        if (add < 0)
            break;
        free[static_cast<std::size_t>(add)] = true;
        for (int inner = 0; inner < static_cast<int>(n) + 2; ++inner) {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = 0; i < n; ++i)
                if (free[static_cast<std::size_t>(i)])
                    idx.push_back(i);
            const auto f = static_cast<Eigen::Index>(idx.size());
            MatrixXd sub(f, f);
            VectorXd rhs(f);
            for (Eigen::Index a = 0; a < f; ++a) {
                rhs(a) = q(idx[static_cast<std::size_t>(a)]);
                for (Eigen::Index b = 0; b < f; ++b)
                    sub(a, b) = qm(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
            }
            sub.diagonal().array() += 1e-14 * (1.0 + sub.diagonal().cwiseAbs().maxCoeff());
            const VectorXd z = sub.ldlt().solve(rhs);
            if ((z.array() > 0.0).all()) {
                v.setZero();
                for (Eigen::Index a = 0; a < f; ++a)
                    v(idx[static_cast<std::size_t>(a)]) = z(a);
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index a = 0; a < f; ++a) {
                const Eigen::Index i = idx[static_cast<std::size_t>(a)];
                if (z(a) <= 0.0)
                    alpha = std::min(alpha, v(i) / std::max(v(i) - z(a), 1e-300));
            }
            for (Eigen::Index a = 0; a < f; ++a) {
                const Eigen::Index i = idx[static_cast<std::size_t>(a)];
                v(i) += alpha * (z(a) - v(i));
                if (v(i) <= 1e-300) {
                    v(i) = 0.0;
                    free[static_cast<std::size_t>(i)] = false;
                }
            }
        }
    }
    return v;
}

// Exact solution through the dual: for a power multiplier lambda the gain
// multipliers solve a small non-negative QP, and the power used by the
// resulting primal point decreases in lambda, so lambda is found by bisection.
// Returns nullopt when the linearised problem looks infeasible.
std::optional<MatrixXcd> fast_solve(const Subspace& sp, const VectorXcd& u, const VectorXd& w, double power,
                                    const LinearGains& lg)
{
    const Eigen::Index r = sp.q.cols();
    const Eigen::Index k = sp.hr.cols();
    const auto nt = static_cast<Eigen::Index>(lg.per_target.size());
    MatrixXcd m = sp.prox * MatrixXcd::Identity(r, r);
    MatrixXcd b = MatrixXcd::Zero(r, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        m += w(i) * std::norm(u(i)) * sp.hr.col(i) * sp.hr.col(i).adjoint();
        b.col(i) = w(i) * std::conj(u(i)) * sp.hr.col(i);
    }
    if (sp.gr.size() > 0)
        b += sp.prox * sp.gr;
    if (sp.prox == 0.0) {
        // Without the proximity term the objective is flat on part of the
        // subspace; a tiny ridge selects the least-power optimum.
        m.diagonal().array() += 1e-8 * (1.0 + m.diagonal().real().maxCoeff());
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    const VectorXd e = es.eigenvalues().cwiseMax(0.0);
    const MatrixXcd& vecs = es.eigenvectors();
    // Everything in the eigenbasis.
    const MatrixXcd by = vecs.adjoint() * b;
    std::vector<MatrixXcd> cy;
    for (const auto& c : lg.per_target)
        cy.push_back(vecs.adjoint() * c);
    const double emax = e.maxCoeff();
    const double lambda_min = 1e-12 * (1.0 + emax);

    MatrixXcd best;
    auto primal_at = [&](double lambda) {
        VectorXd kd(r);
        for (Eigen::Index i = 0; i < r; ++i)
            kd(i) = 1.0 / std::max(e(i) + lambda, lambda_min);
        VectorXd p(nt);
        MatrixXd hq(nt, nt);
        for (Eigen::Index t = 0; t < nt; ++t) {
            const MatrixXcd kc = kd.asDiagonal() * cy[static_cast<std::size_t>(t)];
            p(t) = (kc.adjoint() * by).trace().real();
            for (Eigen::Index s = 0; s <= t; ++s) {
                hq(t, s) = (cy[static_cast<std::size_t>(s)].adjoint() * kc).trace().real();
                hq(s, t) = hq(t, s);
            }
        }
        // dual in nu: maximise nu'(rhs - p) - nu' H nu / 4
        VectorXd nu = nt > 0 ? nonneg_qp(0.5 * hq, lg.rhs - p) : VectorXd();
        MatrixXcd d = by;
        for (Eigen::Index t = 0; t < nt; ++t)
            d += 0.5 * nu(t) * cy[static_cast<std::size_t>(t)];
        best = kd.asDiagonal() * d;
        return best.squaredNorm();
    };

    double lambda = 0.0;
    if (primal_at(0.0) > power) {
        double lo = 0.0;
        double hi = std::max(1.0, emax);
        int grow = 0;
        while (primal_at(hi) > power) {
            hi *= 8.0;
            if (++grow > 40)
                return std::nullopt;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            if (primal_at(mid) > power)
                lo = mid;
            else
                hi = mid;
        }
        lambda = hi;
        primal_at(lambda);
    }
    const MatrixXcd c = vecs * best;
    for (Eigen::Index t = 0; t < nt; ++t)
        if (linear_value(lg.per_target[static_cast<std::size_t>(t)], c) < lg.rhs(t) * (1.0 - 1e-9))
            return std::nullopt;
    return c;
}

std::optional<MatrixXcd> conic_solve(const Subspace& sp, const VectorXcd& u, const VectorXd& w, double power,
                                     const LinearGains& lg, const conic::Settings& st)
{
    const Eigen::Index r = sp.q.cols();
    const Eigen::Index k = sp.hr.cols();
    conic::ComplexSocpBuilder b;
    const auto c = b.add_complex(static_cast<int>(r * k));

    // Residual stack whose squared norm is the objective up to a constant.
    std::vector<conic::RealAffine> parts;
    MatrixXcd e = MatrixXcd::Zero(k * k, r * k);
    VectorXcd target = VectorXcd::Zero(k * k);
    for (Eigen::Index kk = 0; kk < k; ++kk) {
        const double sw = std::sqrt(w(kk));
        for (Eigen::Index i = 0; i < k; ++i) {
            e.block(kk * k + i, i * r, 1, r) = sw * u(kk) * sp.hr.col(kk).adjoint();
            if (i == kk)
                target(kk * k + i) = sw;
        }
    }
    parts.push_back(b.realify(b.mul(e, c) + b.constant(-target)));
    if (sp.prox > 0.0) {
        const double sp2 = std::sqrt(sp.prox);
        MatrixXcd id = sp2 * MatrixXcd::Identity(r * k, r * k);
        VectorXcd g = VectorXcd::Zero(r * k);
        if (sp.gr.size() > 0)
            g = -sp2 * Eigen::Map<const VectorXcd>(sp.gr.data(), r * k);
        parts.push_back(b.realify(b.mul(id, c) + b.constant(g)));
    }
    const auto t = b.square_epigraph(conic::vstack(parts));
    b.minimize(b.var(t));

    b.add_soc(b.real_constant(VectorXd::Constant(1, std::sqrt(power))),
              b.mul(MatrixXcd::Identity(r * k, r * k), c));
    for (std::size_t ti = 0; ti < lg.per_target.size(); ++ti) {
        // Re(coef^H c) - rhs >= 0
        const MatrixXcd row = Eigen::Map<const VectorXcd>(lg.per_target[ti].data(), r * k).adjoint();
        const conic::ComplexAffine expr = b.mul(row, c);
        conic::RealAffine lin = expr.re;
        lin.a0(0) -= lg.rhs(static_cast<Eigen::Index>(ti));
        b.add_nonneg(lin);
    }
    const conic::ConicSolution sol = conic::solve(b.lift(), st);
    if (!usable(sol))
        return std::nullopt;
    const VectorXcd x = b.unlift(sol.x, c);
    return MatrixXcd(Eigen::Map<const MatrixXcd>(x.data(), r, k));
}

Subspace make_subspace(const MatrixXcd& basis, const MmWaveScenario& scen, const MatrixXcd* g, double rho)
{
    Subspace sp;
    sp.q = basis;
    sp.hr = basis.adjoint() * scen.h;
    sp.ar = basis.adjoint() * scen.steering;
    sp.prox = std::isfinite(rho) ? 0.5 / rho : 0.0;
    if (g != nullptr && sp.prox > 0.0)
        sp.gr = basis.adjoint() * *g;
    return sp;
}

MatrixXcd fm_basis(const MmWaveScenario& scen, const MatrixXcd* g)
{
    const Eigen::Index cols = scen.h.cols() + scen.steering.cols() + (g ? g->cols() : 0);
    MatrixXcd span(scen.h.rows(), cols);
    span.leftCols(scen.h.cols()) = scen.h;
    span.middleCols(scen.h.cols(), scen.steering.cols()) = scen.steering;
    if (g)
        span.rightCols(g->cols()) = *g;
    return orth(span);
}

// One linearised solve in the given subspace.
std::optional<MatrixXcd> subspace_step(const Subspace& sp, const MmWaveScenario& scen, const VectorXcd& u,
                                       const VectorXd& w, const MatrixXcd& f_lin, bool fast,
                                       const conic::Settings& st, bool& used_fast)
{
    const LinearGains lg = linearise(sp, f_lin, scen);
    used_fast = false;
    if (fast) {
        if (auto c = fast_solve(sp, u, w, scen.power, lg)) {
            used_fast = true;
            return MatrixXcd(sp.q * *c);
        }
    }
    if (auto c = conic_solve(sp, u, w, scen.power, lg, st))
        return MatrixXcd(sp.q * *c);
    return std::nullopt;
}

void clip_power(MatrixXcd& f, double power)
{
    const double p = f.squaredNorm();
    if (p > power)
        f *= std::sqrt(power / p);
}

// Scales f up until the gain thresholds hold, if the budget allows it.
void lift_to_gains(MatrixXcd& f, const MmWaveScenario& scen)
{
    const VectorXd g = quad_gains(f, scen.steering);
    double c = 1.0;
    for (int t = 0; t < scen.num_targets(); ++t) {
        if (g(t) <= 0.0)
            return;
        c = std::max(c, std::sqrt(scen.quad_threshold(t) / g(t)));
    }
    if (c > 1.0 && c * c * f.squaredNorm() <= scen.power)
        f *= c * (1.0 + 1e-9);
}

// Gain restoration inside span(sp.q): ascent on sum_t w_t ||F^H a_t||^2 at
// full power, reweighting toward the targets furthest below threshold.
// Returns true once every threshold holds.
bool restore_gains(MatrixXcd& f, const Subspace& sp, const MmWaveScenario& scen, int max_steps = 200)
{
    if (scen.num_targets() == 0)
        return true;
    MatrixXcd c = sp.q.adjoint() * f;
    const MatrixXcd a = sp.q.adjoint() * scen.steering; // r x T
    for (int step = 0; step < max_steps; ++step) {
        const MatrixXcd resp = a.adjoint() * c; // T x K
        VectorXd w(scen.num_targets());
        bool ok = true;
        for (int t = 0; t < scen.num_targets(); ++t) {
            const double th = scen.quad_threshold(t);
            const double g = resp.row(t).squaredNorm();
            if (th <= 0.0) {
                w(t) = 0.0;
                continue;
            }
            ok = ok && g >= th * (1.0 + 1e-6);
            const double ratio = th / std::max(g, 1e-12 * th);
            w(t) = ratio * ratio * ratio * ratio;
        }
        if (ok) {
            f = sp.q * c;
            return true;
        }
        MatrixXcd grad = a * w.asDiagonal() * resp;
        const double n = grad.norm();
        if (n <= 0.0)
            break;
        c = (std::sqrt(scen.power) / n) * grad;
    }
    return false;
}

MatrixXi pchb_mask(Eigen::Index n_m, int n_rf)
{
    MatrixXi s = MatrixXi::Zero(n_m, n_rf);
    for (Eigen::Index m = 0; m < n_m; ++m)
        s(m, static_cast<Eigen::Index>(m * n_rf / n_m)) = 1;
    return s;
}

MatrixXcd solve_fbb_any(const MatrixXcd& f_rf, const MatrixXcd& f_k)
{
    try {
        return update_fbb(f_rf, f_k);
    } catch (const RankDeficientError&) {
        return f_rf.completeOrthogonalDecomposition().solve(f_k);
    }
}

double min_gain(const MatrixXcd& f, const MmWaveScenario& scen)
{
    double g = kInf;
    for (int t = 0; t < scen.num_targets(); ++t)
        g = std::min(g, gain_mm(f, scen, t));
    return scen.num_targets() > 0 ? g : 0.0;
}

} // namespace

MmStructure parse_mm_structure(const std::string& name)
{
    if (name == "fd")
        return MmStructure::FD;
    if (name == "fchb")
        return MmStructure::FCHB;
    if (name == "pchb")
        return MmStructure::PCHB;
    if (name == "dhb")
        return MmStructure::DHB;
    if (name == "rhb")
        return MmStructure::RHB;
    throw std::invalid_argument("unknown mmWave structure '" + name + "'");
}

std::string to_string(MmStructure s)
{
    switch (s) {
    case MmStructure::FD:
        return "fd";
    case MmStructure::FCHB:
        return "fchb";
    case MmStructure::PCHB:
        return "pchb";
    case MmStructure::DHB:
        return "dhb";
    case MmStructure::RHB:
        return "rhb";
    }
    return "rhb";
}

void MmWaveScenario::validate() const
{
    cfg.validate();
    if (h.rows() != cfg.n_m())
        throw std::invalid_argument("MmWaveScenario: channel rows do not match the mmWave array");
    if (h.cols() < 1)
        throw std::invalid_argument("MmWaveScenario: at least one user is required");
    if (upsilon.size() != static_cast<Eigen::Index>(targets.size()))
        throw std::invalid_argument("MmWaveScenario: one gain threshold per target is required");
    if ((upsilon.array() < 0.0).any())
        throw std::invalid_argument("MmWaveScenario: gain thresholds must be non-negative");
    if (!(noise_power > 0.0))
        throw std::invalid_argument("MmWaveScenario: noise power must be positive");
    if (!(power > 0.0))
        throw std::invalid_argument("MmWaveScenario: power budget must be positive");
}

MmWaveScenario MmWaveScenario::make(const ArrayConfig& cfg, const MatrixXcd& h, const std::vector<Direction>& targets,
                                    const VectorXd& upsilon, double noise_power, double power,
                                    GainConvention convention)
{
    MmWaveScenario s{cfg, h, targets, upsilon, noise_power, power, convention, {}};
    s.validate();
    s.steering = steering_mm_matrix(cfg, targets);
    return s;
}

MatrixXcd RhbDesign::f_rf() const
{
    switch (kind) {
    case MmStructure::FD:
        return MatrixXcd::Identity(f_bb.rows(), f_bb.rows());
    case MmStructure::FCHB:
        return f_rf_dense;
    default:
        return f_p.asDiagonal() * s_matrix.cast<cx>();
    }
}

MatrixXcd RhbDesign::precoder() const
{
    if (kind == MmStructure::FD)
        return f_bb;
    if (kind == MmStructure::FCHB)
        return f_rf_dense * f_bb;
    return f_p.asDiagonal() * (s_matrix.cast<cx>() * f_bb);
}

// ---- metrics -----------------------------------------------------------------

VectorXd sinr_mm(const MatrixXcd& f, const MmWaveScenario& scen)
{
    if (f.rows() != scen.h.rows() || f.cols() != scen.h.cols())
        throw std::invalid_argument("sinr_mm: beamformer shape does not match the channel");
    const MatrixXcd resp = scen.h.adjoint() * f; // (k, i) = h_k^H f_i
    VectorXd out(resp.rows());
    for (Eigen::Index k = 0; k < resp.rows(); ++k) {
        double interference = 0.0;
        for (Eigen::Index i = 0; i < resp.cols(); ++i)
            if (i != k)
                interference += std::norm(resp(k, i));
        out(k) = std::norm(resp(k, k)) / (interference + scen.noise_power);
    }
    return out;
}

double sumrate(const MatrixXcd& f, const MmWaveScenario& scen)
{
    return (1.0 + sinr_mm(f, scen).array()).log().sum() / std::log(2.0);
}

double sumrate(const RhbDesign& design, const MmWaveScenario& scen)
{
    return sumrate(design.precoder(), scen);
}

double gain_mm(const MatrixXcd& f, const MmWaveScenario& scen, int target)
{
    if (target < 0 || target >= scen.num_targets())
        throw std::invalid_argument("gain_mm: target index out of range");
    return (f.adjoint() * scen.steering.col(target)).norm();
}

double gain_mm(const RhbDesign& design, const MmWaveScenario& scen, int target)
{
    return gain_mm(design.precoder(), scen, target);
}

bool hardware_valid(const RhbDesign& design, int n_rf)
{
    auto unit = [](const auto& m) { return ((m.array().abs() - 1.0).abs() <= 1e-9).all(); };
    auto binary = [](const MatrixXi& s) { return ((s.array() == 0) || (s.array() == 1)).all(); };
    switch (design.kind) {
    case MmStructure::FD:
        return true;
    case MmStructure::FCHB:
        return design.f_rf_dense.cols() == n_rf && unit(design.f_rf_dense);
    case MmStructure::PCHB:
        return unit(design.f_p) && design.s_matrix == pchb_mask(design.f_p.size(), n_rf);
    case MmStructure::DHB:
        return unit(design.f_p) && binary(design.s_matrix) && design.s_matrix.cols() == n_rf &&
               (design.s_matrix.rowwise().sum().array() == 1).all();
    case MmStructure::RHB:
        return unit(design.f_p) && binary(design.s_matrix) && design.s_matrix.cols() == n_rf;
    }
    return false;
}

MmCheck check_mm(const RhbDesign& design, const MmWaveScenario& scen, double gain_rel_tol)
{
    MmCheck c;
    const MatrixXcd f = design.precoder();
    c.power = f.squaredNorm();
    c.power_ok = c.power <= scen.power * (1.0 + 1e-6);
    c.gain_ok = true;
    for (int t = 0; t < scen.num_targets(); ++t) {
        const double g = gain_mm(f, scen, t);
        const double value = scen.convention == GainConvention::Squared ? g * g : g;
        if (scen.upsilon(t) > 0.0)
            c.worst_gain_ratio = std::min(c.worst_gain_ratio, value / scen.upsilon(t));
        c.gain_ok = c.gain_ok && gain_meets(g, scen.upsilon(t), scen.convention, gain_rel_tol);
    }
    c.hardware_ok = hardware_valid(design, scen.cfg.n_rf);
    return c;
}

double mse_user(const MatrixXcd& f_m, const MmWaveScenario& scen, int k, cx u_k)
{
    const VectorXcd resp = f_m.adjoint() * scen.h.col(k); // conj(h_k^H f_i)
    double e = std::norm(u_k * std::conj(resp(k)) - 1.0);
    for (Eigen::Index i = 0; i < resp.size(); ++i)
        if (i != k)
            e += std::norm(u_k * std::conj(resp(i)));
    return e + scen.noise_power * std::norm(u_k);
}

double lagrangian(const RhbDesign& design, const MmWaveScenario& scen, double rho)
{
    double l = 0.0;
    for (int k = 0; k < scen.users(); ++k)
        l += design.w(k) * mse_user(design.f_m, scen, k, design.u(k)) - std::log(design.w(k));
    if (design.kind != MmStructure::FD && std::isfinite(rho))
        l += 0.5 / rho * (design.f_m - design.precoder() + rho * design.duals).squaredNorm();
    return l;
}

// ---- ADMM blocks -------------------------------------------------------------

MatrixXcd initial_fm(const MmWaveScenario& scen)
{
    VectorXcd sum_a = VectorXcd::Zero(scen.h.rows());
    for (Eigen::Index t = 0; t < scen.steering.cols(); ++t)
        sum_a += scen.steering.col(t);
    MatrixXcd f = scen.h.colwise() + sum_a;
    const double norm2 = f.squaredNorm();
    if (norm2 <= 0.0)
        throw std::invalid_argument("initial_fm: zero initial beamformer");
    return f * std::sqrt(scen.power / norm2);
}

VectorXcd update_u(const MatrixXcd& f_m, const MmWaveScenario& scen)
{
    const MatrixXcd resp = scen.h.adjoint() * f_m; // (k, i) = h_k^H f_i
    VectorXcd u(resp.rows());
    for (Eigen::Index k = 0; k < resp.rows(); ++k)
        u(k) = std::conj(resp(k, k)) / (resp.row(k).squaredNorm() + scen.noise_power);
    return u;
}

VectorXd update_w(const MatrixXcd& f_m, const VectorXcd& u, const MmWaveScenario& scen)
{
    VectorXd w(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k)
        w(k) = 1.0 / mse_user(f_m, scen, static_cast<int>(k), u(k));
    return w;
}

double fm_objective(const MatrixXcd& f, const MmWaveScenario& scen, const VectorXcd& u, const VectorXd& w,
                    const MatrixXcd& g, double rho)
{
    double obj = 0.0;
    for (int k = 0; k < scen.users(); ++k)
        obj += w(k) * mse_user(f, scen, k, u(k));
    if (std::isfinite(rho) && g.size() > 0)
        obj += 0.5 / rho * (f - g).squaredNorm();
    return obj;
}

MatrixXcd solve_fm_conic(const MmWaveScenario& scen, const VectorXcd& u, const VectorXd& w, const MatrixXcd& f_lin,
                         const MatrixXcd& g, double rho, const conic::Settings& st)
{
    const MatrixXcd* gp = std::isfinite(rho) && g.size() > 0 ? &g : nullptr;
    const Subspace sp = make_subspace(fm_basis(scen, gp), scen, gp, rho);
    const LinearGains lg = linearise(sp, f_lin, scen);
    if (auto c = conic_solve(sp, u, w, scen.power, lg, st))
        return sp.q * *c;
    throw InfeasibleError("solve_fm_conic: linearised subproblem has no solution");
}

FmSolve update_fm(const MmWaveScenario& scen, const VectorXcd& u, const VectorXd& w, const MatrixXcd& f_start,
                  const MatrixXcd& g, double rho, const MmWaveOptions& opts)
{
    const MatrixXcd* gp = std::isfinite(rho) && g.size() > 0 ? &g : nullptr;
    const Subspace sp = make_subspace(fm_basis(scen, gp), scen, gp, rho);

    FmSolve out;
    out.f_m = f_start;
    bool feasible = gains_feasible(out.f_m, scen, 1e-9) && out.f_m.squaredNorm() <= scen.power * (1.0 + 1e-9);
    if (!feasible) {
        lift_to_gains(out.f_m, scen);
        clip_power(out.f_m, scen.power);
        feasible = gains_feasible(out.f_m, scen, 1e-9);
    }
    // A zero start gives no usable linearisation; any nonzero point in the
    // span keeps the inner approximation valid.
    if (out.f_m.squaredNorm() == 0.0)
        out.f_m = initial_fm(scen);
    double obj = fm_objective(out.f_m, scen, u, w, g, rho);
    out.objective.push_back(obj);

    for (int s = 0; s < opts.sca_iters; ++s) {
        bool used_fast = false;
        auto next = subspace_step(sp, scen, u, w, out.f_m, opts.fast_path, opts.solver, used_fast);
        ++out.solves;
        out.fast += used_fast ? 1 : 0;
        if (!next) {
            if (s == 0 && !feasible)
                throw InfeasibleError("update_fm: gain thresholds cannot be met within the power budget");
            break;
        }
        clip_power(*next, scen.power);
        const double cand = fm_objective(*next, scen, u, w, g, rho);
        if (feasible && cand > obj)
            break;
        const double change = (*next - out.f_m).squaredNorm() / std::max(1.0, out.f_m.squaredNorm());
        out.f_m = std::move(*next);
        obj = cand;
        out.objective.push_back(obj);
        feasible = true;
        if (change < opts.sca_tol)
            break;
    }
    return out;
}

AnalogUpdate update_fp_s(const RhbDesign& design, const MatrixXcd& f_k, int n_rf, bool parallel)
{
    AnalogUpdate out{design.f_p, design.s_matrix, design.f_rf_dense};
    switch (design.kind) {
    case MmStructure::FD:
        throw std::invalid_argument("update_fp_s: the fully digital structure has no analog stage");
    case MmStructure::FCHB:
        if (out.f_rf_dense.cols() != n_rf)
            throw std::invalid_argument("update_fp_s: analog matrix does not match n_rf");
        if (parallel)
            fchb_rows_omp(f_k, design.f_bb, out.f_rf_dense);
        else
            fchb_rows_serial(f_k, design.f_bb, out.f_rf_dense);
        return out;
    default:
        break;
    }
    const PatternSet mode = design.kind == MmStructure::RHB   ? PatternSet::All
                            : design.kind == MmStructure::DHB ? PatternSet::OneHot
                                                              : PatternSet::Fixed;
    if (parallel)
        fp_s_rows_omp(f_k, design.f_bb, mode, out.f_p, out.s_matrix);
    else
        fp_s_rows_serial(f_k, design.f_bb, mode, out.f_p, out.s_matrix);
    return out;
}

MatrixXcd update_fbb(const MatrixXcd& f_rf, const MatrixXcd& f_k)
{
    if (f_rf.rows() != f_k.rows())
        throw std::invalid_argument("update_fbb: row mismatch");
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(f_rf);
    qr.setThreshold(1e-10);
    if (qr.rank() < f_rf.cols())
        throw RankDeficientError("update_fbb: F_RF does not have full column rank");
    return qr.solve(f_k);
}

int repair_switches(RhbDesign& design, const MatrixXcd& f_k)
{
    if (design.kind != MmStructure::RHB && design.kind != MmStructure::DHB)
        return 0;
    int repaired = 0;
    const VectorXd energy = f_k.rowwise().squaredNorm();
    for (Eigen::Index r = 0; r < design.s_matrix.cols(); ++r) {
        if (design.s_matrix.col(r).sum() > 0)
            continue;
        Eigen::Index best = -1;
        for (Eigen::Index m = 0; m < design.s_matrix.rows(); ++m) {
            if (design.kind == MmStructure::DHB) {
                // Only move antennas whose chain keeps at least one other antenna.
                Eigen::Index cur = 0;
                design.s_matrix.row(m).maxCoeff(&cur);
                if (design.s_matrix.col(cur).sum() < 2)
                    continue;
            }
            if (best < 0 || energy(m) > energy(best))
                best = m;
        }
        if (best < 0)
            continue;
        if (design.kind == MmStructure::DHB)
            design.s_matrix.row(best).setZero();
        design.s_matrix(best, r) = 1;
        ++repaired;
    }
    return repaired;
}

MatrixXcd update_dual(const MatrixXcd& duals, const MatrixXcd& f_m, const MatrixXcd& hybrid, double rho)
{
    return duals + (f_m - hybrid) / rho;
}

namespace {

void apply_analog(RhbDesign& d, AnalogUpdate&& a)
{
    d.f_p = std::move(a.f_p);
    d.s_matrix = std::move(a.s_matrix);
    d.f_rf_dense = std::move(a.f_rf_dense);
}

void analog_and_baseband(RhbDesign& d, const MatrixXcd& f_k, const MmWaveScenario& scen, bool parallel, int* repaired,
                         double* l_after_analog, double rho)
{
    apply_analog(d, update_fp_s(d, f_k, scen.cfg.n_rf, parallel));
    if (l_after_analog)
        *l_after_analog = lagrangian(d, scen, rho);
    const int fixed = repair_switches(d, f_k);
    if (repaired)
        *repaired = fixed;
    d.f_bb = solve_fbb_any(d.f_rf(), f_k);
}

} // namespace

RhbDesign rhb_init(const MmWaveScenario& scen, const MmWaveOptions& opts, MmStructure kind)
{
    if (kind == MmStructure::FD)
        throw std::invalid_argument("rhb_init: use the fully digital design for FD");
    scen.validate();
    const Eigen::Index n_m = scen.h.rows();
    const Eigen::Index k = scen.h.cols();
    const int n_rf = scen.cfg.n_rf;
    if (n_rf < k)
        throw std::invalid_argument("rhb_init: n_rf must be at least the number of users");

    RhbDesign d;
    d.kind = kind;
    d.f_m = initial_fm(scen);
    d.duals = MatrixXcd::Zero(n_m, k);
    d.f_p = VectorXcd::Ones(n_m);
    d.s_matrix = kind == MmStructure::PCHB ? pchb_mask(n_m, n_rf) : MatrixXi::Zero(n_m, n_rf);
    if (kind == MmStructure::FCHB)
        d.f_rf_dense = MatrixXcd::Ones(n_m, n_rf);
    const double beta = std::sqrt(scen.power / static_cast<double>(n_m * k));
    d.f_bb = MatrixXcd::Zero(n_rf, k);
    d.f_bb.topLeftCorner(k, k).diagonal().setConstant(beta);

    for (int round = 0; round < opts.init_rounds; ++round)
        analog_and_baseband(d, d.f_m, scen, opts.parallel, nullptr, nullptr, opts.rho);
    d.u = update_u(d.f_m, scen);
    d.w = update_w(d.f_m, d.u, scen);
    return d;
}

bool refine_fbb(RhbDesign& design, const MmWaveScenario& scen, const MmWaveOptions& opts)
{
    MatrixXcd f = design.precoder();
    clip_power(f, scen.power);
    if (!gains_feasible(f, scen, 1e-9))
        lift_to_gains(f, scen);

    const MatrixXcd rf = design.f_rf();
    const MatrixXcd basis = design.kind == MmStructure::FD ? fm_basis(scen, nullptr) : orth(rf);
    const Subspace sp = make_subspace(basis, scen, nullptr, kInf);
    const MatrixXcd none;

    bool feasible = gains_feasible(f, scen, 1e-9);
    if (!feasible) {
        MatrixXcd g = f;
        if (restore_gains(g, sp, scen)) {
            f = g;
            feasible = true;
        }
    }
    for (int round = 0; round < opts.refine_rounds; ++round) {
        const VectorXcd u = update_u(f, scen);
        const VectorXd w = update_w(f, u, scen);
        const double before = fm_objective(f, scen, u, w, none, kInf);
        MatrixXcd cur = f;
        bool progressed = false;
        for (int s = 0; s < opts.sca_iters; ++s) {
            bool used_fast = false;
            auto next = subspace_step(sp, scen, u, w, cur, opts.fast_path, opts.solver, used_fast);
            if (!next)
                break;
            clip_power(*next, scen.power);
            const double obj = fm_objective(*next, scen, u, w, none, kInf);
            if (feasible && obj > fm_objective(cur, scen, u, w, none, kInf))
                break;
            const double change = (*next - cur).squaredNorm() / std::max(1.0, cur.squaredNorm());
            cur = std::move(*next);
            feasible = true;
            progressed = true;
            if (change < opts.sca_tol)
                break;
        }
        if (!progressed)
            break;
        const double after = fm_objective(cur, scen, u, w, none, kInf);
        f = cur;
        if (before - after <= 1e-9 * std::max(1.0, std::abs(before)))
            break;
    }

    if (design.kind == MmStructure::FD)
        design.f_bb = f;
    else
        design.f_bb = solve_fbb_any(rf, f);
    MatrixXcd out = design.precoder();
    const double p = out.squaredNorm();
    if (p > scen.power)
        design.f_bb *= std::sqrt(scen.power / p);
    return gains_feasible(design.precoder(), scen, 1e-6);
}

MmResult admm_rhb(const MmWaveScenario& scen, const MmWaveOptions& opts, MmStructure kind)
{
    MmResult res;
    RhbDesign& d = res.design;
    d = rhb_init(scen, opts, kind);
    const double eps = opts.stop_eps(scen.power);
    double rho = opts.rho;
    MatrixXcd prev = d.precoder();

    for (int it = 1; it <= opts.max_iters; ++it) {
        if (opts.rho_decay_every > 0 && it > 1 && (it - 1) % opts.rho_decay_every == 0)
            rho *= opts.rho_decay;
        MmIteration rec;
        rec.iteration = it;
        rec.rho = rho;
        rec.l[0] = lagrangian(d, scen, rho);

        d.u = update_u(d.f_m, scen);
        rec.l[1] = lagrangian(d, scen, rho);
        d.w = update_w(d.f_m, d.u, scen);
        rec.l[2] = lagrangian(d, scen, rho);

        const MatrixXcd g = d.precoder() - rho * d.duals;
        d.f_m = update_fm(scen, d.u, d.w, d.f_m, g, rho, opts).f_m;
        rec.l[3] = lagrangian(d, scen, rho);

        const MatrixXcd f_k = d.f_m + rho * d.duals;
        analog_and_baseband(d, f_k, scen, opts.parallel, &rec.repaired, &rec.l[4], rho);
        rec.l[5] = lagrangian(d, scen, rho);

        const MatrixXcd hybrid = d.precoder();
        d.duals = update_dual(d.duals, d.f_m, hybrid, rho);

        rec.primal_res = (d.f_m - hybrid).norm();
        rec.change = (hybrid - prev).squaredNorm();
        rec.sumrate = sumrate(hybrid, scen);
        rec.min_gain = min_gain(hybrid, scen);
        prev = hybrid;
        res.trace.push_back(rec);
        res.iterations = it;
        if (rec.change <= eps) {
            res.converged = true;
            break;
        }
    }
    res.final_primal_res = res.trace.empty() ? 0.0 : res.trace.back().primal_res;
    refine_fbb(d, scen, opts);
    return res;
}

std::vector<BeampatternCell> beampattern(const MatrixXcd& f, const ArrayConfig& cfg, int resolution)
{
    if (resolution < 2)
        throw std::invalid_argument("beampattern: resolution must be at least 2");
    if (f.rows() != cfg.n_m())
        throw std::invalid_argument("beampattern: beamformer rows do not match the array");
    std::vector<BeampatternCell> out;
    out.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        const double el = -1.0 + 2.0 * i / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            const double az = -1.0 + 2.0 * j / (resolution - 1);
            out.push_back({el, az, (f.adjoint() * steering_mm(cfg, el, az)).norm()});
        }
    }
    return out;
}

} // namespace dualband
