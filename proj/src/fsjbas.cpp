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

#include "dualband/fsjbas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>


namespace dualband {

namespace {

constexpr double kTieTol = 1e-9;

SelectionState replace_antenna(const SelectionState& s, int antenna, GridPos pos, const ArrayConfig& cfg)
{
    std::vector<int> x = s.x_idx, y = s.y_idx;
    x[static_cast<std::size_t>(antenna)] = pos.row;
    y[static_cast<std::size_t>(antenna)] = pos.col;
    return indices_to_selection(x, y, cfg);
}

// Fills the cache for every selection not yet solved.
void solve_missing(const Sub6gScenario& scen, const std::vector<SelectionState>& sels, SelectionCache& cache,
                   const Sub6gOptions& opts, int& evaluations)
{
    std::vector<SelectionState> todo;
    std::vector<SelectionKey> keys;
    for (const SelectionState& s : sels) {
        SelectionKey key = selection_key(s);
        if (cache.find(key) || std::find(keys.begin(), keys.end(), key) != keys.end())
            continue;
        keys.push_back(std::move(key));
        todo.push_back(s);
    }
    if (todo.empty())
        return;
    std::vector<SelectionSolve> solved = opts.parallel ? evaluate_selections_omp(scen, todo, opts)
                                                       : evaluate_selections_serial(scen, todo, opts);
    for (std::size_t i = 0; i < keys.size(); ++i)
        cache.insert(keys[i], std::move(solved[i]));
    evaluations += static_cast<int>(todo.size());
}

} // namespace

SelectionKey selection_key(const SelectionState& s)
{
    SelectionKey key;
    for (int a = 0; a < s.size(); ++a)
        key.push_back(s.position(a));
    std::sort(key.begin(), key.end());
    return key;
}

const SelectionSolve* SelectionCache::find(const SelectionKey& key) const
{
    const auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
}

const SelectionSolve& SelectionCache::insert(const SelectionKey& key, SelectionSolve solve)
{
    return map_.insert_or_assign(key, std::move(solve)).first->second;
}

std::vector<SelectionSolve> evaluate_selections_omp(const Sub6gScenario& scen,
                                                    const std::vector<SelectionState>& selections,
                                                    const Sub6gOptions& opts)
{
    std::vector<SelectionSolve> out(selections.size());
    const auto n = static_cast<long>(selections.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = solve_fixed_selection(scen, selections[static_cast<std::size_t>(i)], opts);
    return out;
}

std::vector<SelectionSolve> evaluate_selections_serial(const Sub6gScenario& scen,
                                                       const std::vector<SelectionState>& selections,
                                                       const Sub6gOptions& opts)
{
    std::vector<SelectionSolve> out;
    out.reserve(selections.size());
    for (const SelectionState& s : selections)
        out.push_back(solve_fixed_selection(scen, s, opts));
    return out;
}

FsjbasResult fsjbas(const Sub6gScenario& scen, const Sub6gDesign& init, const Sub6gOptions& opts)
{
    scen.validate();
    const ArrayConfig& cfg = scen.cfg;
    if (init.selection.size() != cfg.n_s || !spacing_feasible(init.selection, cfg))
        throw std::invalid_argument("fsjbas: the initial selection is not a valid selection");

    FsjbasResult res;
    SelectionCache cache;
    SelectionState state = init.selection;
    solve_missing(scen, {state}, cache, opts, res.evaluations);
    const SelectionSolve* current = cache.find(selection_key(state));
    res.initial_power = current->power;
    double power = current->power;

    const int cap = opts.fs_iteration_cap(cfg.n_s);
    int unchanged = 0;
    for (int it = 1; it <= cap; ++it) {
        const int antenna = (it - 1) % cfg.n_s;
        const std::vector<GridPos> cands = candidate_set(state, antenna + 1, cfg);
        std::vector<SelectionState> sels;
        sels.reserve(cands.size());
        for (const GridPos& g : cands)
            sels.push_back(replace_antenna(state, antenna, g, cfg));
        solve_missing(scen, sels, cache, opts, res.evaluations);

        // Candidates arrive in row-major order, so the first strict winner
        // already has the smallest (row, col) among near-ties.
        int best = -1;
        double best_power = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sels.size(); ++i) {
            const double p = cache.find(selection_key(sels[i]))->power;
            if (!std::isfinite(p))
                continue;
            if (best < 0 || p < best_power - kTieTol * std::abs(best_power)) {
                best = static_cast<int>(i);
                best_power = p;
            }
        }
        const GridPos before = state.position(antenna);
        if (best >= 0 && best_power < power - kTieTol * std::abs(power)) {
            state = sels[static_cast<std::size_t>(best)];
            power = best_power;
        }
        // An antenna that just moved is already optimal given the others, so
        // it starts the run of settled antennas; the initial ones are not.
        const bool moved = state.position(antenna) != before;
        unchanged = moved ? 1 : unchanged + 1;

        res.trace.push_back({it, antenna + 1, static_cast<int>(cands.size()), power, state.x_idx, state.y_idx});
        if (power <= opts.power_floor || unchanged >= cfg.n_s)
            break;
    }

    const SelectionSolve* fin = cache.find(selection_key(state));
    res.design = {fin->f_s, state, fin->power};
    return res;
}

Sub6gDesign exhaustive_selection(const Sub6gScenario& scen, const std::vector<GridPos>& universe,
                                 const Sub6gOptions& opts)
{
    const ArrayConfig& cfg = scen.cfg;
    const int n = static_cast<int>(universe.size());
    const int k = cfg.n_s;
    std::vector<SelectionState> sels;
    std::vector<int> idx(static_cast<std::size_t>(k));
    // Depth-first enumeration of increasing index tuples with spacing pruning.
    auto rec = [&](auto&& self, int depth, int start) -> void {
        if (depth == k) {
            std::vector<GridPos> pos;
            for (int i : idx)
                pos.push_back(universe[static_cast<std::size_t>(i)]);
            sels.push_back(positions_to_selection(pos, cfg));
            return;
        }
        for (int i = start; i < n; ++i) {
            bool ok = true;
            for (int d = 0; d < depth && ok; ++d)
                ok = spacing_ok(universe[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])],
                                universe[static_cast<std::size_t>(i)], cfg);
            if (!ok)
                continue;
            idx[static_cast<std::size_t>(depth)] = i;
            self(self, depth + 1, i + 1);
        }
    };
    rec(rec, 0, 0);
    if (sels.empty())
        throw InfeasibleError("exhaustive_selection: no spacing-feasible subset");
    const std::vector<SelectionSolve> solved =
        opts.parallel ? evaluate_selections_omp(scen, sels, opts) : evaluate_selections_serial(scen, sels, opts);
    std::size_t best = solved.size();
    for (std::size_t i = 0; i < solved.size(); ++i)
        if (solved[i].feasible && (best == solved.size() || solved[i].power < solved[best].power))
            best = i;
    if (best == solved.size())
        throw InfeasibleError("exhaustive_selection: every subset is infeasible");
    return {solved[best].f_s, sels[best], solved[best].power};
}

} // namespace dualband
