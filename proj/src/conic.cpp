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

#include "dualband/conic.hpp"

#include "conic_detail.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dualband::conic {

namespace {

constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;
constexpr double kEqualityRhoFactor = 1e3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kDivisionFloor = 1e-30;

double inf_norm(const VectorXd& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

template <typename Fn> void for_each_block(const std::vector<ConeBlock>& cones, Fn&& fn)
{
    int offset = 0;
    for (const ConeBlock& blk : cones) {
        fn(blk, offset);
        offset += blk.dim;
    }
}

void project_soc_inplace(Eigen::Ref<VectorXd> v)
{
    const double t = v(0);
    if (v.size() == 1) {
        v(0) = std::max(t, 0.0);
        return;
    }
    const double nu = v.tail(v.size() - 1).norm();
    if (nu <= t)
        return;
    if (nu <= -t) {
        v.setZero();
        return;
    }
    const double a = 0.5 * (t + nu);
    v(0) = a;
    v.tail(v.size() - 1) *= a / nu;
}

double cone_distance(const std::vector<ConeBlock>& cones, const VectorXd& v, bool dual)
{
    VectorXd p = v;
    if (dual)
        project_dual_cone(cones, p);
    else
        project_cone(cones, p);
    return inf_norm(v - p);
}

} // namespace

namespace detail {

Scaled equilibrate(const ConicProblem& prob, int iters)
{
    const int m = prob.num_rows();
    const int n = prob.num_vars();
    Scaled sc{prob.a, prob.b, prob.c, VectorXd::Ones(n), VectorXd::Ones(m), 1.0};
    for (int it = 0; it < iters; ++it) {
        VectorXd dc(n), dr(m);
        for (int j = 0; j < n; ++j) {
            const double nrm = m > 0 ? sc.a.col(j).cwiseAbs().maxCoeff() : 0.0;
            dc(j) = nrm < 1e-8 ? 1.0 : std::clamp(1.0 / std::sqrt(nrm), kMinScale, kMaxScale);
        }
        for (int i = 0; i < m; ++i) {
            const double nrm = n > 0 ? sc.a.row(i).cwiseAbs().maxCoeff() : 0.0;
            dr(i) = nrm;
        }
        // Second-order blocks must keep a single row factor to stay a cone.
        for_each_block(prob.cones, [&](const ConeBlock& blk, int off) {
            if (blk.kind == ConeKind::SecondOrder && blk.dim > 0) {
                const double mx = dr.segment(off, blk.dim).maxCoeff();
                dr.segment(off, blk.dim).setConstant(mx);
            }
        });
        for (int i = 0; i < m; ++i)
            dr(i) = dr(i) < 1e-8 ? 1.0 : std::clamp(1.0 / std::sqrt(dr(i)), kMinScale, kMaxScale);
        sc.a = dr.asDiagonal() * sc.a * dc.asDiagonal();
        sc.d = sc.d.cwiseProduct(dc);
        sc.e = sc.e.cwiseProduct(dr);
    }
    sc.b = sc.e.cwiseProduct(prob.b);
    sc.c = sc.d.cwiseProduct(prob.c);
    const double cn = inf_norm(sc.c);
    sc.k = cn < 1e-8 ? 1.0 : std::clamp(1.0 / cn, kMinScale, kMaxScale);
    sc.c *= sc.k;
    return sc;
}

} // namespace detail

std::string to_string(Status s)
{
    switch (s) {
    case Status::Optimal:
        return "optimal";
    case Status::Infeasible:
        return "infeasible";
    case Status::Unbounded:
        return "unbounded";
    case Status::MaxIters:
        return "max_iters";
    }
    return "unknown";
}

std::string to_string(Method m)
{
    return m == Method::InteriorPoint ? "ipm" : "admm";
}

Method parse_method(const std::string& name)
{
    if (name == "ipm")
        return Method::InteriorPoint;
    if (name == "admm")
        return Method::Admm;
    throw std::invalid_argument("unknown conic method '" + name + "' (expected ipm|admm)");
}

ConicSolution solve(const ConicProblem& prob, const Settings& settings, const std::optional<VectorXd>& warm_x)
{
    return settings.method == Method::Admm ? solve_admm(prob, settings, warm_x) : solve_ipm(prob, settings);
}

void ConicProblem::validate() const
{
    if (a.rows() != b.size() || a.cols() != c.size())
        throw std::invalid_argument("ConicProblem: A is " + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " but b has " + std::to_string(b.size()) +
                                    " rows and c has " + std::to_string(c.size()) + " entries");
    int total = 0;
    for (const ConeBlock& blk : cones) {
        if (blk.dim < 1)
            throw std::invalid_argument("ConicProblem: cone blocks must have dim >= 1");
        total += blk.dim;
    }
    if (total != b.size())
        throw std::invalid_argument("ConicProblem: cone dimensions sum to " + std::to_string(total) +
                                    ", expected " + std::to_string(b.size()));
    if (!a.allFinite() || !b.allFinite() || !c.allFinite())
        throw std::invalid_argument("ConicProblem: non-finite data");
}

VectorXd project_soc(const VectorXd& v)
{
    if (v.size() < 1)
        throw std::invalid_argument("project_soc: empty vector");
    VectorXd out = v;
    project_soc_inplace(out);
    return out;
}

void project_cone(const std::vector<ConeBlock>& cones, Eigen::Ref<VectorXd> v)
{
    for_each_block(cones, [&](const ConeBlock& blk, int off) {
        auto seg = v.segment(off, blk.dim);
        switch (blk.kind) {
        case ConeKind::Zero:
            seg.setZero();
            break;
        case ConeKind::NonNeg:
            seg = seg.cwiseMax(0.0);
            break;
        case ConeKind::SecondOrder:
            project_soc_inplace(seg);
            break;
        }
    });
}

void project_dual_cone(const std::vector<ConeBlock>& cones, Eigen::Ref<VectorXd> v)
{
    for_each_block(cones, [&](const ConeBlock& blk, int off) {
        auto seg = v.segment(off, blk.dim);
        switch (blk.kind) {
        case ConeKind::Zero:
            break;
        case ConeKind::NonNeg:
            seg = seg.cwiseMax(0.0);
            break;
        case ConeKind::SecondOrder:
            project_soc_inplace(seg);
            break;
        }
    });
}

KktResiduals kkt_residuals(const ConicProblem& prob, const VectorXd& x, const VectorXd& s, const VectorXd& y)
{
    KktResiduals r;
    const VectorXd ax = prob.a * x;
    const VectorXd aty = prob.a.transpose() * y;
    const double pn = std::max({inf_norm(ax), inf_norm(s), inf_norm(prob.b)});
    const double dn = std::max(inf_norm(aty), inf_norm(prob.c));
    r.primal = inf_norm(ax + s - prob.b) / (1.0 + pn);
    r.dual = inf_norm(aty + prob.c) / (1.0 + dn);
    const double cx_ = prob.c.dot(x);
    const double by = prob.b.dot(y);
    r.gap = std::abs(cx_ + by) / (1.0 + std::abs(cx_) + std::abs(by));
    r.cone = std::max(cone_distance(prob.cones, s, false), cone_distance(prob.cones, y, true));
    return r;
}

ConicSolution solve_admm(const ConicProblem& prob, const Settings& st, const std::optional<VectorXd>& warm_x)
{
    prob.validate();
    const int m = prob.num_rows();
    const int n = prob.num_vars();
    if (warm_x && warm_x->size() != n)
        throw std::invalid_argument("conic::solve: warm start has wrong length");

    const detail::Scaled sc = detail::equilibrate(prob, st.scaling_iters);
    const MatrixXd at = sc.a.transpose();

    VectorXd rho_vec(m);
    double rho = st.rho;
    auto fill_rho = [&] {
        for_each_block(prob.cones, [&](const ConeBlock& blk, int off) {
            const double r = blk.kind == ConeKind::Zero ? kEqualityRhoFactor * rho : rho;
            rho_vec.segment(off, blk.dim).setConstant(r);
        });
    };
    fill_rho();

    Eigen::LLT<MatrixXd> kkt;
    auto factor = [&] {
        MatrixXd mtx = at * rho_vec.asDiagonal() * sc.a;
        mtx.diagonal().array() += st.sigma;
        kkt.compute(mtx);
        if (kkt.info() != Eigen::Success)
            throw std::runtime_error("conic::solve: KKT factorization failed");
    };
    factor();

    auto project_z = [&](VectorXd& v) {
        // Projection onto b - K.
        VectorXd w = sc.b - v;
        project_cone(prob.cones, w);
        v = sc.b - w;
    };

    VectorXd x = warm_x ? VectorXd(warm_x->cwiseQuotient(sc.d)) : VectorXd::Zero(n);
    VectorXd z = sc.a * x;
    project_z(z);
    VectorXd y = VectorXd::Zero(m);

    ConicSolution sol;
    auto unscale_into = [&](ConicSolution& out) {
        out.x = sc.d.cwiseProduct(x);
        out.s = (sc.b - z).cwiseQuotient(sc.e);
        out.y = sc.e.cwiseProduct(y) / sc.k;
        const KktResiduals r = kkt_residuals(prob, out.x, out.s, out.y);
        out.primal_res = r.primal;
        out.dual_res = r.dual;
        out.gap = r.gap;
        out.objective = prob.c.dot(out.x);
    };

    VectorXd x_prev(n), y_prev(m), rhs(n), xt(n), zt(m), w(m);
    int pinf_hits = 0;
    int dinf_hits = 0;
    for (int it = 1; it <= st.max_iters; ++it) {
        x_prev = x;
        y_prev = y;
        rhs = st.sigma * x - sc.c + at * (rho_vec.cwiseProduct(z) - y);
        xt = kkt.solve(rhs);
        zt = sc.a * xt;
        x = st.alpha * xt + (1.0 - st.alpha) * x;
        w = st.alpha * zt + (1.0 - st.alpha) * z;
        z = w + y.cwiseQuotient(rho_vec);
        project_z(z);
        y += rho_vec.cwiseProduct(w - z);

        const bool check = it % st.check_every == 0 || it == st.max_iters;
        if (check) {
            unscale_into(sol);
            sol.iterations = it;
            if (sol.primal_res <= st.tol && sol.dual_res <= st.tol && sol.gap <= st.tol) {
                sol.status = Status::Optimal;
                return sol;
            }

            // Certificates: a dual ray proves primal infeasibility, a primal
            // ray proves unboundedness.
            const VectorXd dy = sc.e.cwiseProduct(y - y_prev);
            const double dyn = inf_norm(dy);
            bool pinf = false;
            if (dyn > kDivisionFloor) {
                const double eps = st.infeasibility_tol * dyn;
                pinf = inf_norm(prob.a.transpose() * dy) <= 1e3 * eps && prob.b.dot(dy) < -eps &&
                       cone_distance(prob.cones, dy, true) <= 1e3 * eps;
            }
            pinf_hits = pinf ? pinf_hits + 1 : 0;
            if (pinf_hits >= 2) {
                sol.status = Status::Infeasible;
                return sol;
            }
            const VectorXd dx = sc.d.cwiseProduct(x - x_prev);
            const double dxn = inf_norm(dx);
            bool dinf = false;
            if (dxn > kDivisionFloor) {
                const double eps = st.infeasibility_tol * dxn;
                const VectorXd neg_adx = -(prob.a * dx);
                dinf = prob.c.dot(dx) < -eps && cone_distance(prob.cones, neg_adx, false) <= 1e3 * eps;
            }
            dinf_hits = dinf ? dinf_hits + 1 : 0;
            if (dinf_hits >= 2) {
                sol.status = Status::Unbounded;
                return sol;
            }
        }

        if (st.adaptive_rho && it % st.adapt_every == 0) {
            const VectorXd ax = sc.a * x;
            const VectorXd aty = at * y;
            const double rp = inf_norm(ax - z) / std::max({inf_norm(ax), inf_norm(z), 1e-10});
            const double rd = inf_norm(aty + sc.c) / std::max({inf_norm(aty), inf_norm(sc.c), 1e-10});
            const double ratio = std::sqrt(rp / std::max(rd, 1e-20));
            const double rho_new = std::clamp(rho * ratio, kRhoMin, kRhoMax);
            if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
                rho = rho_new;
                fill_rho();
                factor();
            }
        }
    }
    unscale_into(sol);
    sol.iterations = st.max_iters;
    sol.status = Status::MaxIters;
    return sol;
}

void dump(const ConicProblem& prob, std::ostream& os)
{
    os << "conic_problem vars " << prob.num_vars() << " rows " << prob.num_rows() << '\n';
    os << "cones " << prob.cones.size() << '\n';
    for (const ConeBlock& blk : prob.cones) {
        const char* tag = blk.kind == ConeKind::Zero ? "Z" : blk.kind == ConeKind::NonNeg ? "L" : "Q";
        os << tag << ' ' << blk.dim << '\n';
    }
    os.precision(17);
    os << "c";
    for (Eigen::Index j = 0; j < prob.c.size(); ++j)
        os << ' ' << prob.c(j);
    os << "\nb";
    for (Eigen::Index i = 0; i < prob.b.size(); ++i)
        os << ' ' << prob.b(i);
    os << '\n';
    for (Eigen::Index j = 0; j < prob.a.cols(); ++j)
        for (Eigen::Index i = 0; i < prob.a.rows(); ++i)
            if (prob.a(i, j) != 0.0)
                os << "A " << i << ' ' << j << ' ' << prob.a(i, j) << '\n';
}

} // namespace dualband::conic
