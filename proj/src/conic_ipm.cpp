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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "conic_detail.hpp"
#include "dualband/conic.hpp"

namespace dualband::conic {

namespace {

constexpr double kStepFraction = 0.99;
constexpr double kRegularization = 1e-11;
constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const VectorXd& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Cone rows (everything except Zero blocks) in the form G x + s = h.
struct ConeLayout {
    std::vector<ConeBlock> blocks;
    int rows = 0;
    int degree = 0;
};

// Nesterov-Todd scaling for the cone product. For a nonnegative block
// W = diag(d); for a second-order block W = beta (2 v v' - J), J = diag(1, -I).
class NtScaling {
public:
    explicit NtScaling(const ConeLayout& layout) : layout_(layout)
    {
        d_.resize(layout.rows);
        w_.resize(layout.rows);
        beta_.assign(layout.blocks.size(), 1.0);
    }

    void set_identity()
    {
        d_.setOnes();
        w_.setZero();
        int off = 0;
        for (std::size_t k = 0; k < layout_.blocks.size(); ++k) {
            const ConeBlock& blk = layout_.blocks[k];
            if (blk.kind == ConeKind::SecondOrder) {
                w_(off) = 1.0;
                beta_[k] = 1.0;
            }
            off += blk.dim;
        }
    }

    // Returns false if s or z has left the interior.
    bool update(const VectorXd& s, const VectorXd& z)
    {
        int off = 0;
        for (std::size_t k = 0; k < layout_.blocks.size(); ++k) {
            const ConeBlock& blk = layout_.blocks[k];
            if (blk.kind == ConeKind::NonNeg) {
                for (int i = off; i < off + blk.dim; ++i) {
                    if (!(s(i) > 0.0) || !(z(i) > 0.0))
                        return false;
                    d_(i) = std::sqrt(s(i) / z(i));
                }
            } else {
                const auto sb = s.segment(off, blk.dim);
                const auto zb = z.segment(off, blk.dim);
                const double sj = jnorm_sq(sb);
                const double zj = jnorm_sq(zb);
                if (!(sj > 0.0) || !(zj > 0.0) || sb(0) <= 0.0 || zb(0) <= 0.0)
                    return false;
                const double sn = std::sqrt(sj);
                const double zn = std::sqrt(zj);
                const VectorXd s_bar = sb / sn;
                VectorXd z_bar = zb / zn;
                const double gamma = std::sqrt(0.5 * (1.0 + s_bar.dot(z_bar)));
                z_bar.tail(blk.dim - 1) *= -1.0; // J z_bar
                VectorXd w = (s_bar + z_bar) / (2.0 * gamma);
                // W uses the Jordan square root of w, which keeps v'Jv = 1.
                w(0) += 1.0;
                w /= std::sqrt(2.0 * w(0));
                w_.segment(off, blk.dim) = w;
                beta_[k] = std::sqrt(sn / zn);
            }
            off += blk.dim;
        }
        return true;
    }

    // v <- W v (inverse = false) or v <- W^{-1} v.
    void apply(Eigen::Ref<VectorXd> v, bool inverse) const
    {
        int off = 0;
        for (std::size_t k = 0; k < layout_.blocks.size(); ++k) {
            const ConeBlock& blk = layout_.blocks[k];
            auto seg = v.segment(off, blk.dim);
            if (blk.kind == ConeKind::NonNeg) {
                if (inverse)
                    seg.array() /= d_.segment(off, blk.dim).array();
                else
                    seg.array() *= d_.segment(off, blk.dim).array();
            } else {
                const auto w = w_.segment(off, blk.dim);
                if (!inverse) {
                    // beta (2 w (w'v) - J v)
                    const double wv = w.dot(seg);
                    seg.tail(blk.dim - 1) *= -1.0;
                    seg = beta_[k] * (2.0 * wv * w - seg);
                } else {
                    // (1/beta) (2 J w (w' J v) - J v)
                    seg.tail(blk.dim - 1) *= -1.0; // J v
                    const double wjv = w.dot(seg);
                    seg(0) = (2.0 * wjv * w(0) - seg(0)) / beta_[k];
                    seg.tail(blk.dim - 1) = (-2.0 * wjv * w.tail(blk.dim - 1) - seg.tail(blk.dim - 1)) / beta_[k];
                }
            }
            off += blk.dim;
        }
    }

    // Applies W^{-1} to every column of m.
    void apply_inverse_rows(MatrixXd& m) const
    {
        int off = 0;
        for (std::size_t k = 0; k < layout_.blocks.size(); ++k) {
            const ConeBlock& blk = layout_.blocks[k];
            auto rows = m.middleRows(off, blk.dim);
            if (blk.kind == ConeKind::NonNeg) {
                rows = d_.segment(off, blk.dim).cwiseInverse().asDiagonal() * rows;
            } else {
                const auto w = w_.segment(off, blk.dim);
                rows.bottomRows(blk.dim - 1) *= -1.0; // J m
                const Eigen::RowVectorXd wjm = w.transpose() * rows;
                rows.row(0) = (2.0 * w(0) * wjm - rows.row(0)) / beta_[k];
                rows.bottomRows(blk.dim - 1) =
                    (-2.0 * w.tail(blk.dim - 1) * wjm - rows.bottomRows(blk.dim - 1)) / beta_[k];
            }
            off += blk.dim;
        }
    }

    static double jnorm_sq(const Eigen::Ref<const VectorXd>& v)
    {
        return v(0) * v(0) - v.tail(v.size() - 1).squaredNorm();
    }

private:
    const ConeLayout& layout_;
    VectorXd d_;
    VectorXd w_;
    std::vector<double> beta_;
};

// Jordan product u o v.
VectorXd jordan(const ConeLayout& L, const VectorXd& u, const VectorXd& v)
{
    VectorXd out(u.size());
    int off = 0;
    for (const ConeBlock& blk : L.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            out.segment(off, blk.dim) = u.segment(off, blk.dim).cwiseProduct(v.segment(off, blk.dim));
        } else {
            const auto ub = u.segment(off, blk.dim);
            const auto vb = v.segment(off, blk.dim);
            out(off) = ub.dot(vb);
            out.segment(off + 1, blk.dim - 1) = ub(0) * vb.tail(blk.dim - 1) + vb(0) * ub.tail(blk.dim - 1);
        }
        off += blk.dim;
    }
    return out;
}

// Solves lambda o w = v for w.
VectorXd jordan_solve(const ConeLayout& L, const VectorXd& lambda, const VectorXd& v)
{
    VectorXd out(v.size());
    int off = 0;
    for (const ConeBlock& blk : L.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            out.segment(off, blk.dim) = v.segment(off, blk.dim).cwiseQuotient(lambda.segment(off, blk.dim));
        } else {
            const auto l = lambda.segment(off, blk.dim);
            const auto vb = v.segment(off, blk.dim);
            const double l0 = l(0);
            const auto l1 = l.tail(blk.dim - 1);
            const double w0 = (l0 * vb(0) - l1.dot(vb.tail(blk.dim - 1))) / (l0 * l0 - l1.squaredNorm());
            out(off) = w0;
            out.segment(off + 1, blk.dim - 1) = (vb.tail(blk.dim - 1) - w0 * l1) / l0;
        }
        off += blk.dim;
    }
    return out;
}

VectorXd identity_element(const ConeLayout& L)
{
    VectorXd e = VectorXd::Zero(L.rows);
    int off = 0;
    for (const ConeBlock& blk : L.blocks) {
        if (blk.kind == ConeKind::NonNeg)
            e.segment(off, blk.dim).setOnes();
        else
            e(off) = 1.0;
        off += blk.dim;
    }
    return e;
}

// Largest alpha with v + alpha dv still in the cone.
double max_step(const ConeLayout& L, const VectorXd& v, const VectorXd& dv)
{
    double alpha = kInf;
    int off = 0;
    for (const ConeBlock& blk : L.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = off; i < off + blk.dim; ++i)
                if (dv(i) < 0.0)
                    alpha = std::min(alpha, -v(i) / dv(i));
        } else {
            const auto x = v.segment(off, blk.dim);
            const auto d = dv.segment(off, blk.dim);
            const double a = d(0) * d(0) - d.tail(blk.dim - 1).squaredNorm();
            const double b = x(0) * d(0) - x.tail(blk.dim - 1).dot(d.tail(blk.dim - 1));
            const double c = std::max(x(0) * x(0) - x.tail(blk.dim - 1).squaredNorm(), 0.0);
            const double disc = b * b - a * c;
            if (a < 0.0 || (b < 0.0 && disc >= 0.0)) {
                const double denom = -b + std::sqrt(std::max(disc, 0.0));
                alpha = std::min(alpha, denom > 0.0 ? c / denom : 0.0);
            }
            if (d(0) < 0.0)
                alpha = std::min(alpha, -x(0) / d(0));
        }
        off += blk.dim;
    }
    return alpha;
}

// Smallest t with v + t e in the cone (negative when v is interior).
double shift_needed(const ConeLayout& L, const VectorXd& v)
{
    double t = -kInf;
    int off = 0;
    for (const ConeBlock& blk : L.blocks) {
        if (blk.kind == ConeKind::NonNeg)
            t = std::max(t, -v.segment(off, blk.dim).minCoeff());
        else
            t = std::max(t, v.segment(off + 1, blk.dim - 1).norm() - v(off));
        off += blk.dim;
    }
    return t;
}

// Dense reduced KKT system for [0 A' G'; A 0 0; G 0 -W'W].
class KktSystem {
public:
    KktSystem(const MatrixXd& a, const MatrixXd& g) : a_(a), g_(g) {}

    void factor(const NtScaling& w)
    {
        w_ = &w;
        gs_ = g_;
        w.apply_inverse_rows(gs_);
        const Eigen::Index n = g_.cols();
        const Eigen::Index p = a_.rows();
        k_ = MatrixXd::Zero(n + p, n + p);
        k_.topLeftCorner(n, n).selfadjointView<Eigen::Lower>().rankUpdate(gs_.transpose());
        k_.topLeftCorner(n, n).triangularView<Eigen::StrictlyUpper>() =
            k_.topLeftCorner(n, n).transpose();
        k_.topRightCorner(n, p) = a_.transpose();
        k_.bottomLeftCorner(p, n) = a_;
        MatrixXd reg = k_;
        const double scale = 1.0 + (n > 0 ? k_.topLeftCorner(n, n).diagonal().cwiseAbs().maxCoeff() : 0.0);
        reg.topLeftCorner(n, n).diagonal().array() += kRegularization * scale;
        reg.bottomRightCorner(p, p).diagonal().array() -= kRegularization * scale;
        lu_.compute(reg);
    }

    void solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd& dx, VectorXd& dy,
               VectorXd& dz) const
    {
        const Eigen::Index n = g_.cols();
        const Eigen::Index p = a_.rows();
        VectorXd wbz = bz;
        w_->apply(wbz, true);
        VectorXd rhs(n + p);
        rhs.head(n) = bx + gs_.transpose() * wbz;
        rhs.tail(p) = by;
        VectorXd sol = lu_.solve(rhs);
        for (int r = 0; r < 2; ++r)
            sol += lu_.solve(rhs - k_ * sol);
        dx = sol.head(n);
        dy = sol.tail(p);
        dz = gs_ * dx - wbz;
        w_->apply(dz, true);
    }

private:
    const MatrixXd& a_;
    const MatrixXd& g_;
    const NtScaling* w_ = nullptr;
    MatrixXd gs_;
    MatrixXd k_;
    Eigen::PartialPivLU<MatrixXd> lu_;
};

} // namespace

ConicSolution solve_ipm(const ConicProblem& prob, const Settings& st)
{
    prob.validate();
    const detail::Scaled sc = detail::equilibrate(prob, st.scaling_iters);
    const int n = prob.num_vars();

    // Split rows into equalities (A x = b) and cone rows (G x + s = h).
    std::vector<int> eq_rows, cone_rows;
    ConeLayout layout;
    {
        int off = 0;
        for (const ConeBlock& blk : prob.cones) {
            if (blk.kind == ConeKind::Zero) {
                for (int i = 0; i < blk.dim; ++i)
                    eq_rows.push_back(off + i);
            } else {
                for (int i = 0; i < blk.dim; ++i)
                    cone_rows.push_back(off + i);
                layout.blocks.push_back(blk);
                layout.degree += blk.kind == ConeKind::NonNeg ? blk.dim : 1;
            }
            off += blk.dim;
        }
        layout.rows = static_cast<int>(cone_rows.size());
    }
    const int p = static_cast<int>(eq_rows.size());
    const int mg = layout.rows;
    MatrixXd a(p, n), g(mg, n);
    VectorXd b(p), h(mg);
    for (int i = 0; i < p; ++i) {
        a.row(i) = sc.a.row(eq_rows[i]);
        b(i) = sc.b(eq_rows[i]);
    }
    for (int i = 0; i < mg; ++i) {
        g.row(i) = sc.a.row(cone_rows[i]);
        h(i) = sc.b(cone_rows[i]);
    }
    const VectorXd& c = sc.c;

    NtScaling W(layout);
    KktSystem kkt(a, g);
    const VectorXd e = identity_element(layout);

    // Starting point from two least-norm solves with W = I.
    W.set_identity();
    kkt.factor(W);
    VectorXd x, y, z, s, tmp_x, tmp_y, tmp_z;
    kkt.solve(VectorXd::Zero(n), b, h, x, tmp_y, tmp_z);
    s = -tmp_z;
    kkt.solve(-c, VectorXd::Zero(p), VectorXd::Zero(mg), tmp_x, y, z);
    if (mg > 0) {
        const double ts = shift_needed(layout, s);
        if (ts >= 0.0)
            s += (1.0 + ts) * e;
        const double tz = shift_needed(layout, z);
        if (tz >= 0.0)
            z += (1.0 + tz) * e;
    }
    double tau = 1.0, kappa = 1.0;

    ConicSolution sol;
    sol.status = Status::MaxIters;
    auto export_point = [&](double scale) {
        VectorXd s_full = VectorXd::Zero(prob.num_rows());
        VectorXd y_full = VectorXd::Zero(prob.num_rows());
        for (int i = 0; i < p; ++i)
            y_full(eq_rows[i]) = y(i) / scale;
        for (int i = 0; i < mg; ++i) {
            s_full(cone_rows[i]) = s(i) / scale;
            y_full(cone_rows[i]) = z(i) / scale;
        }
        sol.x = sc.d.cwiseProduct(x) / scale;
        sol.s = s_full.cwiseQuotient(sc.e);
        sol.y = sc.e.cwiseProduct(y_full) / sc.k;
        const KktResiduals r = kkt_residuals(prob, sol.x, sol.s, sol.y);
        sol.primal_res = r.primal;
        sol.dual_res = r.dual;
        sol.gap = r.gap;
        sol.objective = prob.c.dot(sol.x);
    };

    const double bnorm = std::max(1.0, std::max(inf_norm(b), inf_norm(h)));
    const double cnorm = std::max(1.0, inf_norm(c));

    VectorXd x1, y1, z1, x2, y2, z2;
    for (int it = 0; it <= st.ipm_max_iters; ++it) {
        sol.iterations = it;
        export_point(tau);
        if (sol.primal_res <= st.tol && sol.dual_res <= st.tol && sol.gap <= st.tol) {
            sol.status = Status::Optimal;
            return sol;
        }
        const double by_hz = b.dot(y) + h.dot(z);
        const double cx = c.dot(x);
        if (by_hz < 0.0) {
            const double res = inf_norm(a.transpose() * y + g.transpose() * z) / cnorm;
            if (res <= st.tol * -by_hz) {
                sol.status = Status::Infeasible;
                return sol;
            }
        }
        if (cx < 0.0) {
            const double res = std::max(inf_norm(a * x), inf_norm(g * x + s)) / bnorm;
            if (res <= st.tol * -cx) {
                sol.status = Status::Unbounded;
                return sol;
            }
        }
        if (it == st.ipm_max_iters)
            break;

        const VectorXd r1 = a.transpose() * y + g.transpose() * z + c * tau;
        const VectorXd r2 = -a * x + b * tau;
        const VectorXd r3 = -g * x + h * tau - s;
        const double r4 = -c.dot(x) - b.dot(y) - h.dot(z) - kappa;
        const double mu = (s.dot(z) + tau * kappa) / (layout.degree + 1);

        if (!W.update(s, z))
            break;
        VectorXd lambda = z;
        W.apply(lambda, false);
        kkt.factor(W);
        kkt.solve(-c, b, h, x1, y1, z1);
        const double denom_base = -c.dot(x1) - b.dot(y1) - h.dot(z1);

        struct Direction {
            VectorXd dx, dy, dz, ds;
            double dtau = 0.0, dkappa = 0.0;
        };
        auto direction = [&](double gamma, const VectorXd& bs, double bk) {
            Direction d;
            const VectorXd ls = jordan_solve(layout, lambda, bs);
            VectorXd wls = ls;
            W.apply(wls, false);
            kkt.solve(-(1.0 - gamma) * r1, (1.0 - gamma) * r2, -wls + (1.0 - gamma) * r3, x2, y2, z2);
            d.dtau = (-(1.0 - gamma) * r4 + c.dot(x2) + b.dot(y2) + h.dot(z2) + bk / tau) /
                     (kappa / tau + denom_base);
            d.dx = x2 + d.dtau * x1;
            d.dy = y2 + d.dtau * y1;
            d.dz = z2 + d.dtau * z1;
            VectorXd wdz = d.dz;
            W.apply(wdz, false);
            d.ds = ls - wdz;
            W.apply(d.ds, false);
            d.dkappa = (bk - kappa * d.dtau) / tau;
            return d;
        };
        auto step_length = [&](const Direction& d) {
            double alpha = std::min(max_step(layout, s, d.ds), max_step(layout, z, d.dz));
            if (d.dtau < 0.0)
                alpha = std::min(alpha, -tau / d.dtau);
            if (d.dkappa < 0.0)
                alpha = std::min(alpha, -kappa / d.dkappa);
            return alpha;
        };

        const VectorXd ll = jordan(layout, lambda, lambda);
        const Direction aff = direction(0.0, -ll, -tau * kappa);
        const double alpha_aff = std::min(1.0, step_length(aff));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

        VectorXd ws = aff.ds, wz = aff.dz;
        W.apply(ws, true);
        W.apply(wz, false);
        const VectorXd bs = -ll + sigma * mu * e - jordan(layout, ws, wz);
        const double bk = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
        const Direction dir = direction(sigma, bs, bk);
        const double alpha = std::min(1.0, kStepFraction * step_length(dir));
        if (!(alpha > 1e-12))
            break;

        x += alpha * dir.dx;
        y += alpha * dir.dy;
        z += alpha * dir.dz;
        s += alpha * dir.ds;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        if (!(tau > 0.0) || !(kappa > 0.0) || !x.allFinite())
            break;
    }
    export_point(tau);
    sol.status = Status::MaxIters;
    return sol;
}

} // namespace dualband::conic
