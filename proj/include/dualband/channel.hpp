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

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "dualband/geometry.hpp"
#include "dualband/types.hpp"

namespace dualband {

struct PathParams {
    cx gain{1.0, 0.0};
    double el = 0.0; // phi, drives the row index
    double az = 0.0; // theta, drives the column index
};

// Priors used by gen_channels. Gains are circularly-symmetric complex Gaussian
// with the given variance; surrogate angles are uniform on [angle_lo, angle_hi].
struct ChannelPriors {
    double gain_variance = 1.0;
    double angle_lo = -1.0;
    double angle_hi = 1.0;
};

struct ChannelSet {
    ArrayConfig cfg;
    MatrixXcd h_sub; // N_p x K_s
    MatrixXcd h_mm;  // N_m x K_m
    std::vector<std::vector<PathParams>> paths_sub;
    std::vector<std::vector<PathParams>> paths_mm;
    std::uint64_t seed = 0;
    ChannelPriors priors;

    int k_s() const { return static_cast<int>(h_sub.cols()); }
    int k_m() const { return static_cast<int>(h_mm.cols()); }
};

// exp(j pi (i-1) lambda_ratio angle), i = 1..n.
VectorXcd steering_gamma(int n, double angle, double lambda_ratio);

// exp(j pi (i-1) angle), i = 1..n.
VectorXcd steering_alpha(int n, double angle);

// Sub-6G steering over the candidate grid, length N_p, in vec (column-major) order:
// the entry of grid position (m, n) is gamma_m(el) * gamma_n(az).
VectorXcd steering_beta(const ArrayConfig& cfg, double el, double az);

// mmWave steering over the full array, length N_m, same ordering convention.
VectorXcd steering_mm(const ArrayConfig& cfg, double el, double az);

// Steering vectors for a list of directions, one column each.
MatrixXcd steering_beta_matrix(const ArrayConfig& cfg, const std::vector<Direction>& dirs);
MatrixXcd steering_mm_matrix(const ArrayConfig& cfg, const std::vector<Direction>& dirs);

// (1/sqrt(L)) sum_l gain_l * steering(el_l, az_l).
VectorXcd synthesize_sub(const ArrayConfig& cfg, const std::vector<PathParams>& paths);
VectorXcd synthesize_mm(const ArrayConfig& cfg, const std::vector<PathParams>& paths);

ChannelSet gen_channels(const ArrayConfig& cfg, int k_s, int k_m, int l_s, int l_m, std::uint64_t seed,
                        const ChannelPriors& priors = {});

// Largest relative deviation between stored matrices and their re-synthesis.
double reconstruction_error(const ChannelSet& ch);

nlohmann::json channel_to_json(const ChannelSet& ch);
// Throws std::runtime_error if the stored matrices fail the reconstruction check.
ChannelSet channel_from_json(const nlohmann::json& j);

void save_channels(const ChannelSet& ch, const std::filesystem::path& path);
ChannelSet load_channels(const std::filesystem::path& path);

} // namespace dualband
