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

#include "dualband/conic.hpp"

namespace dualband::conic::detail {

// Equilibrated copy of a problem: x = D xs, s = E^{-1} ss, y = E ys / k.
struct Scaled {
    MatrixXd a;
    VectorXd b;
    VectorXd c;
    VectorXd d;
    VectorXd e;
    double k = 1.0;
};

// Ruiz equilibration; row factors are uniform inside each second-order block.
Scaled equilibrate(const ConicProblem& prob, int iters);

} // namespace dualband::conic::detail
