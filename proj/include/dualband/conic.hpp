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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualband/types.hpp"

namespace dualband::conic {

enum class ConeKind { Zero, NonNeg, SecondOrder };

struct ConeBlock {
    ConeKind kind = ConeKind::NonNeg;
    int dim = 0;
};

/// minimize c'x  subject to  A x + s = b,  s in K_1 x ... x K_p.
///
/// SecondOrder blocks are laid out as (t, u) with membership ||u|| <= t.
struct ConicProblem {
    VectorXd c;
    MatrixXd a;
    VectorXd b;
    std::vector<ConeBlock> cones;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(b.size()); }

    // Throws std::invalid_argument on inconsistent dimensions or cone layout.
    void validate() const;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIters };

std::string to_string(Status s);

struct ConicSolution {
    VectorXd x;
    VectorXd y; // conic dual, y in K*
    VectorXd s;
    Status status = Status::MaxIters;
    double primal_res = 0.0; // relative, see kkt_residuals
    double dual_res = 0.0;
    double gap = 0.0;
    double objective = 0.0;
    int iterations = 0;
};

enum class Method { InteriorPoint, Admm };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct Settings {
    Method method = Method::InteriorPoint;
    double tol = 1e-6;
    int ipm_max_iters = 100;
    int max_iters = 50000;
    double alpha = 1.6; // over-relaxation
    double sigma = 1e-6;
    double rho = 0.1;
    bool adaptive_rho = true;
    int adapt_every = 25;
    int check_every = 5;
    int scaling_iters = 15;
    double infeasibility_tol = 1e-6;
};

struct KktResiduals {
    double primal = 0.0; // ||Ax + s - b||_inf / (1 + max(||Ax||, ||s||, ||b||))
    double dual = 0.0;   // ||A'y + c||_inf / (1 + max(||A'y||, ||c||))
    double gap = 0.0;    // |c'x + b'y| / (1 + |c'x| + |b'y|)
    double cone = 0.0;   // max distance of s to K and of y to K*
};

// Euclidean projection onto {(t, u) : ||u|| <= t}.
VectorXd project_soc(const VectorXd& v);

// Projection onto the cone product described by `cones`.
void project_cone(const std::vector<ConeBlock>& cones, Eigen::Ref<VectorXd> v);

// Projection onto the dual cone product (Zero blocks map to the free cone).
void project_dual_cone(const std::vector<ConeBlock>& cones, Eigen::Ref<VectorXd> v);

KktResiduals kkt_residuals(const ConicProblem& prob, const VectorXd& x, const VectorXd& s, const VectorXd& y);

// Dispatches on settings.method. The interior-point path ignores warm_x.
ConicSolution solve(const ConicProblem& prob, const Settings& settings = {},
                    const std::optional<VectorXd>& warm_x = std::nullopt);

// Operator-splitting solver with per-block projections.
ConicSolution solve_admm(const ConicProblem& prob, const Settings& settings,
                         const std::optional<VectorXd>& warm_x = std::nullopt);

// Homogeneous self-dual primal-dual interior-point solver with
// Nesterov-Todd scaling and a Mehrotra corrector.
ConicSolution solve_ipm(const ConicProblem& prob, const Settings& settings);

// Plain-text dump: dimensions, cone layout, c, b and the nonzero triplets of A.
void dump(const ConicProblem& prob, std::ostream& os);

} // namespace dualband::conic
