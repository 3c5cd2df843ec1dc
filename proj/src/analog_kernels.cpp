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

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "dualband/mmwave.hpp"

namespace dualband {

namespace {

struct RowChoice {
    double cost;
    cx phase;
};

// Phase and cost for a fixed combined baseband row v = F_BB^T s.
inline RowChoice evaluate(const Eigen::Ref<const Eigen::RowVectorXcd>& f, double f_norm2,
                          const Eigen::RowVectorXcd& v, cx previous)
{
    // c = f^H v with f the target row as a column vector.
    const cx c = (f.conjugate().array() * v.array()).sum();
    const double mag = std::abs(c);
    const cx phase = mag > 0.0 ? std::conj(c) / mag : previous;
    return {f_norm2 + v.squaredNorm() - 2.0 * mag, phase};
}

void solve_row(const MatrixXcd& f_k, const MatrixXcd& f_bb, PatternSet mode, Eigen::Index m, VectorXcd& f_p,
               MatrixXi& s)
{
    const Eigen::Index n_rf = f_bb.rows();
    const Eigen::Index k = f_bb.cols();
    const auto f = f_k.row(m);
    const double f_norm2 = f.squaredNorm();
    const cx prev = f_p(m);

    if (mode == PatternSet::Fixed) {
        Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Zero(k);
        for (Eigen::Index r = 0; r < n_rf; ++r)
            if (s(m, r) != 0)
                v += f_bb.row(r);
        f_p(m) = evaluate(f, f_norm2, v, prev).phase;
        return;
    }

    if (mode == PatternSet::OneHot) {
        Eigen::Index best_r = 0;
        RowChoice best{std::numeric_limits<double>::infinity(), prev};
        for (Eigen::Index r = 0; r < n_rf; ++r) {
            const RowChoice c = evaluate(f, f_norm2, f_bb.row(r), prev);
            if (c.cost < best.cost) {
                best = c;
                best_r = r;
            }
        }
        s.row(m).setZero();
        s(m, best_r) = 1;
        f_p(m) = best.phase;
        return;
    }

    // All 2^N_RF patterns in Gray-code order; v is updated one row at a time.
    const std::uint32_t count = 1u << n_rf;
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Zero(k);
    std::uint32_t best_pattern = 0;
    RowChoice best{f_norm2, prev};
    std::uint32_t gray = 0;
    for (std::uint32_t b = 1; b < count; ++b) {
        const std::uint32_t next = b ^ (b >> 1);
        const std::uint32_t flipped = next ^ gray;
        const int r = __builtin_ctz(flipped);
        if (next & flipped)
            v += f_bb.row(r);
        else
            v -= f_bb.row(r);
        gray = next;
        const RowChoice c = evaluate(f, f_norm2, v, prev);
        if (c.cost < best.cost) {
            best = c;
            best_pattern = gray;
        }
    }
    for (Eigen::Index r = 0; r < n_rf; ++r)
        s(m, r) = (best_pattern >> r) & 1u ? 1 : 0;
    f_p(m) = best.phase;
}

void check_shapes(const MatrixXcd& f_k, const MatrixXcd& f_bb, const VectorXcd& f_p, const MatrixXi& s)
{
    if (f_bb.cols() != f_k.cols() || f_p.size() != f_k.rows() || s.rows() != f_k.rows() || s.cols() != f_bb.rows())
        throw std::invalid_argument("update_fp_s: inconsistent dimensions");
    if (f_bb.rows() > 16)
        throw std::invalid_argument("update_fp_s: exhaustive switch search supports at most 16 RF chains");
}

// One cyclic coordinate sweep over the entries of row m.
void fchb_row(const MatrixXcd& f_k, const MatrixXcd& f_bb, Eigen::Index m, MatrixXcd& f_rf)
{
    Eigen::RowVectorXcd e = f_k.row(m) - f_rf.row(m) * f_bb;
    for (Eigen::Index r = 0; r < f_bb.rows(); ++r) {
        e += f_rf(m, r) * f_bb.row(r);
        const cx z = (e.array() * f_bb.row(r).conjugate().array()).sum();
        const double mag = std::abs(z);
        if (mag > 0.0)
            f_rf(m, r) = z / mag;
        e -= f_rf(m, r) * f_bb.row(r);
    }
}

} // namespace

double row_residual(const MatrixXcd& f_k, const MatrixXcd& f_bb, int m, cx f_p,
                    const Eigen::Ref<const Eigen::RowVectorXi>& s_row)
{
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Zero(f_bb.cols());
    for (Eigen::Index r = 0; r < f_bb.rows(); ++r)
        if (s_row(r) != 0)
            v += f_bb.row(r);
    return (f_k.row(m) - f_p * v).squaredNorm();
}

void fp_s_rows_serial(const MatrixXcd& f_k, const MatrixXcd& f_bb, PatternSet mode, VectorXcd& f_p, MatrixXi& s)
{
    check_shapes(f_k, f_bb, f_p, s);
    for (Eigen::Index m = 0; m < f_k.rows(); ++m)
        solve_row(f_k, f_bb, mode, m, f_p, s);
}

void fp_s_rows_omp(const MatrixXcd& f_k, const MatrixXcd& f_bb, PatternSet mode, VectorXcd& f_p, MatrixXi& s)
{
    check_shapes(f_k, f_bb, f_p, s);
    const Eigen::Index rows = f_k.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index m = 0; m < rows; ++m)
        solve_row(f_k, f_bb, mode, m, f_p, s);
}

void fchb_rows_serial(const MatrixXcd& f_k, const MatrixXcd& f_bb, MatrixXcd& f_rf)
{
    if (f_rf.rows() != f_k.rows() || f_rf.cols() != f_bb.rows() || f_bb.cols() != f_k.cols())
        throw std::invalid_argument("fchb_rows: inconsistent dimensions");
    for (Eigen::Index m = 0; m < f_k.rows(); ++m)
        fchb_row(f_k, f_bb, m, f_rf);
}

void fchb_rows_omp(const MatrixXcd& f_k, const MatrixXcd& f_bb, MatrixXcd& f_rf)
{
    if (f_rf.rows() != f_k.rows() || f_rf.cols() != f_bb.rows() || f_bb.cols() != f_k.cols())
        throw std::invalid_argument("fchb_rows: inconsistent dimensions");
    const Eigen::Index rows = f_k.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index m = 0; m < rows; ++m)
        fchb_row(f_k, f_bb, m, f_rf);
}

} // namespace dualband
