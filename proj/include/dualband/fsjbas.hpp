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

#include <map>
#include <vector>

#include "dualband/sub6g.hpp"

namespace dualband {

struct FsjbasIteration {
    int iteration = 0;
    int antenna_order = 0; // 1-based
    int candidates = 0;
    double best_power = 0.0;
    std::vector<int> rows;
    std::vector<int> cols;
};

struct FsjbasResult {
    Sub6gDesign design;
    double initial_power = 0.0;
    std::vector<FsjbasIteration> trace;
    int evaluations = 0; // distinct selections solved
};

// Sorted positions identify a selection irrespective of antenna labels.
using SelectionKey = std::vector<GridPos>;
SelectionKey selection_key(const SelectionState& s);

// Memo of per-selection solves shared across iterations of one search.
class SelectionCache {
public:
    const SelectionSolve* find(const SelectionKey& key) const;
    const SelectionSolve& insert(const SelectionKey& key, SelectionSolve solve);
    std::size_t size() const { return map_.size(); }

private:
    std::map<SelectionKey, SelectionSolve> map_;
};

// Solves every selection independently. The OpenMP version distributes the
// list over threads; the serial version is the reference implementation.
std::vector<SelectionSolve> evaluate_selections_omp(const Sub6gScenario& scen,
                                                    const std::vector<SelectionState>& selections,
                                                    const Sub6gOptions& opts);
std::vector<SelectionSolve> evaluate_selections_serial(const Sub6gScenario& scen,
                                                       const std::vector<SelectionState>& selections,
                                                       const Sub6gOptions& opts);

// Cyclic single-antenna relocation search starting from `init`.
FsjbasResult fsjbas(const Sub6gScenario& scen, const Sub6gDesign& init, const Sub6gOptions& opts);

// Best spacing-feasible n_s-subset of `universe` by exhaustive enumeration.
Sub6gDesign exhaustive_selection(const Sub6gScenario& scen, const std::vector<GridPos>& universe,
                                 const Sub6gOptions& opts);

} // namespace dualband
