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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dualband {

using cx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Surrogate angles: el = sin(psi), az = cos(psi) sin(varpi). Both lie in [-1, 1].
struct Direction {
    double el = 0.0;
    double az = 0.0;
};

// Which quantity a sensing threshold applies to. Squared compares the
// quadratic form |F^H a|^2 against the threshold, Norm compares |F^H a|.
enum class GainConvention { Squared, Norm };

GainConvention parse_gain_convention(const std::string& name);
std::string to_string(GainConvention c);

// Threshold on the quadratic form used inside the optimizers.
inline double quadratic_threshold(double upsilon, GainConvention c)
{
    return c == GainConvention::Squared ? upsilon : upsilon * upsilon;
}

// True when the reported (l2-norm) gain satisfies the threshold within rel_tol.
inline bool gain_meets(double gain_norm, double upsilon, GainConvention c, double rel_tol)
{
    const double value = c == GainConvention::Squared ? gain_norm * gain_norm : gain_norm;
    return value >= upsilon * (1.0 - rel_tol);
}

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RankDeficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dualband
