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
#include <string>

#include "dualband/fsjbas.hpp"
#include "dualband/mmwave.hpp"
#include "dualband/sub6g.hpp"

namespace dualband {

enum class Sub6gStructure { CAS, FixedArray, RAS_RS, RAS_FSJBAS };

Sub6gStructure parse_sub6g_structure(const std::string& name);
std::string to_string(Sub6gStructure s);

// Fully digital WMMSE + SCA design, F = F_m.
MmResult design_fd(const MmWaveScenario& scen, const MmWaveOptions& opts);

// FD or one of the hybrid structures through the shared ADMM loop.
MmResult design_hybrid_variant(const MmWaveScenario& scen, MmStructure kind, const MmWaveOptions& opts);

// N_s coarse-grid cells closest to the panel centre.
SelectionState fixed_array_selection(const ArrayConfig& cfg);

// Random spacing-feasible selection over the full candidate grid.
SelectionState random_selection(const ArrayConfig& cfg, std::uint64_t seed);

struct Sub6gVariantResult {
    Sub6gDesign design;
    int attempts = 1;      // random draws used by RAS_RS
    int evaluations = 0;   // FS-JBAS selection solves
    double initial_power = 0.0;
};

// CAS solves (P1-S) on the coarse grid with ABAS; RAS_FSJBAS refines that
// selection with FS-JBAS. RAS_RS redraws up to `max_draws` times when a random
// selection admits no feasible beamformer.
Sub6gVariantResult design_sub6g_variant(const Sub6gScenario& scen, Sub6gStructure kind, const Sub6gOptions& opts,
                                        std::uint64_t seed = 0, int max_draws = 20);

} // namespace dualband
