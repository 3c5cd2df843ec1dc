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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualband/baselines.hpp"
#include "dualband/channel.hpp"
#include "dualband/mmwave.hpp"
#include "dualband/sub6g.hpp"

namespace dualband {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FigureConfig {
    std::vector<double> snr_db{-10.0, 0.0, 10.0, 20.0};
    bool reoptimize_per_point = true;
    std::optional<double> reference_snr_db; // design point when not re-optimising
    std::vector<int> array_sizes{13, 14, 15, 16};
    std::vector<int> sub6g_users{2, 3, 4, 5};
    std::vector<double> upsilon_m{0.0, 4.0, 8.0, 11.0, 13.0};
    std::vector<MmStructure> mm_structures{MmStructure::FD, MmStructure::FCHB, MmStructure::RHB, MmStructure::DHB,
                                           MmStructure::PCHB};
    std::vector<Sub6gStructure> sub6g_structures{Sub6gStructure::RAS_FSJBAS, Sub6gStructure::RAS_RS,
                                                 Sub6gStructure::CAS, Sub6gStructure::FixedArray};
    int beampattern_resolution = 41;
};

struct ScenarioConfig {
    ArrayConfig array;
    int k_s = 4;
    int k_m = 4;
    int l_s = 5;
    int l_m = 3;
    ChannelPriors priors;

    std::vector<double> gamma; // linear SINR thresholds, one per sub-6G user
    std::vector<Direction> targets_s;
    std::vector<double> upsilon_s;
    std::vector<Direction> targets_m;
    std::vector<double> upsilon_m;

    double p_t = 60.0;
    std::optional<double> p_m; // overrides P_t - P_s when set
    double noise_s = 1.0;
    double noise_m = 1.0;

    GainConvention convention_s = GainConvention::Squared;
    GainConvention convention_m = GainConvention::Squared;
    Sub6gOptions sub;
    MmWaveOptions mm;

    std::vector<std::uint64_t> seeds{1};
    Sub6gStructure sub_structure = Sub6gStructure::RAS_FSJBAS;
    MmStructure mm_structure = MmStructure::RHB;
    std::string output_dir = "out";
    int beampattern_resolution = 0;
    int threads = 0; // 0 keeps the OpenMP default

    FigureConfig figure;

    void validate() const;
    double mm_power(double p_s) const { return p_m ? *p_m : p_t - p_s; }
};

// Parses and validates; throws ConfigError with the offending key.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
// Canonical form with every field spelled out.
nlohmann::json config_to_json(const ScenarioConfig& cfg);
// FNV-1a over the canonical dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

Sub6gScenario make_sub6g_scenario(const ScenarioConfig& cfg, const ChannelSet& ch);
MmWaveScenario make_mm_scenario(const ScenarioConfig& cfg, const ChannelSet& ch, double power,
                                std::optional<double> noise = std::nullopt);

} // namespace dualband
