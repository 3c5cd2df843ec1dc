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

#include <vector>

#include "dualband/conic.hpp"

namespace dualband::conic {

// Real affine expression a * x + a0 over the builder's real variable vector.
// Column counts may lag behind the builder; missing columns are zero.
struct RealAffine {
    MatrixXd a;
    VectorXd a0;

    int rows() const { return static_cast<int>(a0.size()); }
    RealAffine row(int i) const;
    RealAffine scaled(double s) const;
};

// Complex affine expression with realified parts re(x) and im(x).
struct ComplexAffine {
    RealAffine re;
    RealAffine im;

    int rows() const { return re.rows(); }
    ComplexAffine row(int i) const { return {re.row(i), im.row(i)}; }
};

RealAffine operator+(const RealAffine& l, const RealAffine& r);
RealAffine operator-(const RealAffine& l, const RealAffine& r);
ComplexAffine operator+(const ComplexAffine& l, const ComplexAffine& r);

// Stacks expressions vertically.
RealAffine vstack(const std::vector<RealAffine>& parts);

// Builds a real conic program from constraints written over complex and real
// decision blocks. A complex block z of length n occupies 2n real variables
// laid out as (Re z, Im z).
class ComplexSocpBuilder {
public:
    struct ComplexVar {
        int offset = 0;
        int n = 0;
    };
    struct RealVar {
        int offset = 0;
        int n = 0;
    };

    ComplexVar add_complex(int n);
    RealVar add_real(int n);
    int num_vars() const { return num_vars_; }

    // Expression constructors.
    ComplexAffine mul(const MatrixXcd& m, ComplexVar v) const;
    ComplexAffine constant(const VectorXcd& v) const;
    RealAffine real_constant(const VectorXd& v) const;
    RealAffine var(RealVar v) const;
    RealAffine mul(const MatrixXd& m, RealVar v) const;
    RealAffine realify(const ComplexAffine& e) const; // (Re e; Im e)

    // ||u|| <= t, t a single row.
    void add_soc(const RealAffine& t, const RealAffine& u);
    void add_soc(const RealAffine& t, const ComplexAffine& u) { add_soc(t, realify(u)); }
    // Every row of e >= 0.
    void add_nonneg(const RealAffine& e);
    // Every row of e == 0.
    void add_equal(const RealAffine& e);
    void add_bounds(RealVar v, double lo, double hi);

    // Adds a single-row expression to the objective.
    void minimize(const RealAffine& e);
    // New variable t with ||u|| <= t, added to the objective.
    RealVar minimize_norm(const RealAffine& u);
    // New variable t with ||u||^2 <= t (rotated cone); not added to the objective.
    RealVar square_epigraph(const RealAffine& u);

    ConicProblem lift() const;

    VectorXcd unlift(const VectorXd& x, ComplexVar v) const;
    VectorXd unlift(const VectorXd& x, RealVar v) const;

private:
    struct Block {
        ConeKind kind;
        RealAffine expr; // slack = expr
    };
    int num_vars_ = 0;
    VectorXd objective_;
    double objective_offset_ = 0.0;
    std::vector<Block> blocks_;
};

} // namespace dualband::conic
