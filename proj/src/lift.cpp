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

#include "dualband/lift.hpp"

#include <stdexcept>

namespace dualband::conic {

namespace {

MatrixXd padded(const MatrixXd& a, Eigen::Index cols)
{
    if (a.cols() == cols)
        return a;
    MatrixXd out = MatrixXd::Zero(a.rows(), cols);
    out.leftCols(a.cols()) = a;
    return out;
}

RealAffine combine(const RealAffine& l, const RealAffine& r, double sign)
{
    if (l.rows() != r.rows())
        throw std::invalid_argument("affine expressions differ in row count");
    const Eigen::Index cols = std::max(l.a.cols(), r.a.cols());
    return {padded(l.a, cols) + sign * padded(r.a, cols), l.a0 + sign * r.a0};
}

} // namespace

RealAffine RealAffine::row(int i) const
{
    return {a.row(i), a0.segment(i, 1)};
}

RealAffine RealAffine::scaled(double s) const
{
    return {s * a, s * a0};
}

RealAffine operator+(const RealAffine& l, const RealAffine& r)
{
    return combine(l, r, 1.0);
}

RealAffine operator-(const RealAffine& l, const RealAffine& r)
{
    return combine(l, r, -1.0);
}

ComplexAffine operator+(const ComplexAffine& l, const ComplexAffine& r)
{
    return {l.re + r.re, l.im + r.im};
}

RealAffine vstack(const std::vector<RealAffine>& parts)
{
    Eigen::Index rows = 0, cols = 0;
    for (const auto& p : parts) {
        rows += p.rows();
        cols = std::max(cols, p.a.cols());
    }
    RealAffine out{MatrixXd::Zero(rows, cols), VectorXd::Zero(rows)};
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.a.block(r, 0, p.rows(), p.a.cols()) = p.a;
        out.a0.segment(r, p.rows()) = p.a0;
        r += p.rows();
    }
    return out;
}

ComplexSocpBuilder::ComplexVar ComplexSocpBuilder::add_complex(int n)
{
    if (n < 0)
        throw std::invalid_argument("add_complex: negative size");
    ComplexVar v{num_vars_, n};
    num_vars_ += 2 * n;
    return v;
}

ComplexSocpBuilder::RealVar ComplexSocpBuilder::add_real(int n)
{
    if (n < 0)
        throw std::invalid_argument("add_real: negative size");
    RealVar v{num_vars_, n};
    num_vars_ += n;
    return v;
}

ComplexAffine ComplexSocpBuilder::mul(const MatrixXcd& m, ComplexVar v) const
{
    if (m.cols() != v.n)
        throw std::invalid_argument("mul: matrix columns do not match the complex block");
    const Eigen::Index rows = m.rows();
    ComplexAffine e{{MatrixXd::Zero(rows, num_vars_), VectorXd::Zero(rows)},
                    {MatrixXd::Zero(rows, num_vars_), VectorXd::Zero(rows)}};
    const MatrixXd mr = m.real();
    const MatrixXd mi = m.imag();
    e.re.a.middleCols(v.offset, v.n) = mr;
    e.re.a.middleCols(v.offset + v.n, v.n) = -mi;
    e.im.a.middleCols(v.offset, v.n) = mi;
    e.im.a.middleCols(v.offset + v.n, v.n) = mr;
    return e;
}

ComplexAffine ComplexSocpBuilder::constant(const VectorXcd& v) const
{
    const Eigen::Index rows = v.size();
    return {{MatrixXd::Zero(rows, num_vars_), v.real()}, {MatrixXd::Zero(rows, num_vars_), v.imag()}};
}

RealAffine ComplexSocpBuilder::real_constant(const VectorXd& v) const
{
    return {MatrixXd::Zero(v.size(), num_vars_), v};
}

RealAffine ComplexSocpBuilder::var(RealVar v) const
{
    RealAffine e{MatrixXd::Zero(v.n, num_vars_), VectorXd::Zero(v.n)};
    e.a.middleCols(v.offset, v.n).setIdentity();
    return e;
}

RealAffine ComplexSocpBuilder::mul(const MatrixXd& m, RealVar v) const
{
    if (m.cols() != v.n)
        throw std::invalid_argument("mul: matrix columns do not match the real block");
    RealAffine e{MatrixXd::Zero(m.rows(), num_vars_), VectorXd::Zero(m.rows())};
    e.a.middleCols(v.offset, v.n) = m;
    return e;
}

RealAffine ComplexSocpBuilder::realify(const ComplexAffine& e) const
{
    return vstack({e.re, e.im});
}

void ComplexSocpBuilder::add_soc(const RealAffine& t, const RealAffine& u)
{
    if (t.rows() != 1)
        throw std::invalid_argument("add_soc: the bound must be a single row");
    blocks_.push_back({ConeKind::SecondOrder, vstack({t, u})});
}

void ComplexSocpBuilder::add_nonneg(const RealAffine& e)
{
    if (e.rows() > 0)
        blocks_.push_back({ConeKind::NonNeg, e});
}

void ComplexSocpBuilder::add_equal(const RealAffine& e)
{
    if (e.rows() > 0)
        blocks_.push_back({ConeKind::Zero, e});
}

void ComplexSocpBuilder::add_bounds(RealVar v, double lo, double hi)
{
    const RealAffine x = var(v);
    add_nonneg(x - real_constant(VectorXd::Constant(v.n, lo)));
    add_nonneg(real_constant(VectorXd::Constant(v.n, hi)) - x);
}

void ComplexSocpBuilder::minimize(const RealAffine& e)
{
    if (e.rows() != 1)
        throw std::invalid_argument("minimize: objective must be a single row");
    const VectorXd row = e.a.row(0).transpose();
    if (objective_.size() < row.size())
        objective_.conservativeResizeLike(VectorXd::Zero(row.size()));
    objective_.head(row.size()) += row;
    objective_offset_ += e.a0(0);
}

ComplexSocpBuilder::RealVar ComplexSocpBuilder::minimize_norm(const RealAffine& u)
{
    const RealVar t = add_real(1);
    add_soc(var(t), u);
    minimize(var(t));
    return t;
}

ComplexSocpBuilder::RealVar ComplexSocpBuilder::square_epigraph(const RealAffine& u)
{
    // ||u||^2 <= t  <=>  ||(2u, t - 1)|| <= t + 1.
    const RealVar t = add_real(1);
    const RealAffine tv = var(t);
    const RealAffine one = real_constant(VectorXd::Ones(1));
    add_soc(tv + one, vstack({u.scaled(2.0), tv - one}));
    return t;
}

ConicProblem ComplexSocpBuilder::lift() const
{
    ConicProblem p;
    p.c = VectorXd::Zero(num_vars_);
    p.c.head(objective_.size()) = objective_;
    Eigen::Index rows = 0;
    for (const Block& b : blocks_)
        rows += b.expr.rows();
    p.a = MatrixXd::Zero(rows, num_vars_);
    p.b = VectorXd::Zero(rows);
    Eigen::Index r = 0;
    for (const Block& b : blocks_) {
        // s = expr = a x + a0  <=>  (-a) x + s = a0.
        p.a.block(r, 0, b.expr.rows(), b.expr.a.cols()) = -b.expr.a;
        p.b.segment(r, b.expr.rows()) = b.expr.a0;
        p.cones.push_back({b.kind, b.expr.rows()});
        r += b.expr.rows();
    }
    return p;
}

VectorXcd ComplexSocpBuilder::unlift(const VectorXd& x, ComplexVar v) const
{
    VectorXcd z(v.n);
    for (int i = 0; i < v.n; ++i)
        z(i) = {x(v.offset + i), x(v.offset + v.n + i)};
    return z;
}

VectorXd ComplexSocpBuilder::unlift(const VectorXd& x, RealVar v) const
{
    return x.segment(v.offset, v.n);
}

} // namespace dualband::conic
