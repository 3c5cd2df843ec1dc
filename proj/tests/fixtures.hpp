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

// Shared scenario builders for the unit and acceptance tests.

#include <vector>

#include "dualband/channel.hpp"
#include "dualband/mmwave.hpp"
#include "dualband/sub6g.hpp"

namespace testfix {

inline dualband::ArrayConfig panel(int n, int spacing, int n_s, int n_rf = 4)
{
    dualband::ArrayConfig c;
    c.n_row = c.n_col = n;
    c.h_s = c.v_s = spacing;
    c.n_s = n_s;
    c.n_rf = n_rf;
    return c;
}

inline std::vector<dualband::Direction> two_targets() { return {{0.3, -0.2}, {-0.4, 0.5}}; }

inline dualband::Sub6gScenario sub_scenario(const dualband::ArrayConfig& cfg, int k_s, double gamma,
                                            const std::vector<dualband::Direction>& targets, double upsilon,
                                            std::uint64_t seed, double noise = 1.0)
{
    const auto ch = dualband::gen_channels(cfg, k_s, 1, 5, 3, seed);
    return dualband::Sub6gScenario::make(cfg, ch.h_sub, Eigen::VectorXd::Constant(k_s, gamma), targets,
                                         Eigen::VectorXd::Constant(static_cast<Eigen::Index>(targets.size()), upsilon),
                                         noise);
}

inline dualband::MmWaveScenario mm_scenario(const dualband::ArrayConfig& cfg, int k_m,
                                            const std::vector<dualband::Direction>& targets, double upsilon,
                                            double noise, double power, std::uint64_t seed,
                                            dualband::GainConvention conv = dualband::GainConvention::Squared)
{
    const auto ch = dualband::gen_channels(cfg, 1, k_m, 5, 3, seed);
    return dualband::MmWaveScenario::make(
        cfg, ch.h_mm, targets, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(targets.size()), upsilon), noise,
        power, conv);
}

// 3x3 grid over [0.5, 0.7]^2.
inline std::vector<dualband::Direction> sensing_region()
{
    std::vector<dualband::Direction> t;
    for (double el : {0.5, 0.6, 0.7})
        for (double az : {0.5, 0.6, 0.7}) t.push_back({el, az});
    return t;
}

// The rows of H kept by a selection, zero elsewhere.
inline Eigen::MatrixXcd masked(const Eigen::MatrixXcd& h, const dualband::SelectionState& s)
{
    return dualband::selection_vector(s).cast<dualband::cx>().asDiagonal() * h;
}

} // namespace testfix
