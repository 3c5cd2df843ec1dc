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

#include "dualband/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dualband/rng.hpp"

namespace dualband {

Sub6gStructure parse_sub6g_structure(const std::string& name)
{
    if (name == "cas")
        return Sub6gStructure::CAS;
    if (name == "fixed")
        return Sub6gStructure::FixedArray;
    if (name == "ras_rs")
        return Sub6gStructure::RAS_RS;
    if (name == "ras_fsjbas")
        return Sub6gStructure::RAS_FSJBAS;
    throw std::invalid_argument("unknown sub-6G structure '" + name + "'");
}

std::string to_string(Sub6gStructure s)
{
    switch (s) {
    case Sub6gStructure::CAS:
        return "cas";
    case Sub6gStructure::FixedArray:
        return "fixed";
    case Sub6gStructure::RAS_RS:
        return "ras_rs";
    case Sub6gStructure::RAS_FSJBAS:
        return "ras_fsjbas";
    }
    return "cas";
}

MmResult design_fd(const MmWaveScenario& scen, const MmWaveOptions& opts)
{
    scen.validate();
    MmResult res;
    RhbDesign& d = res.design;
    d.kind = MmStructure::FD;
    d.f_m = initial_fm(scen);
    d.f_bb = d.f_m;
    d.duals = MatrixXcd::Zero(d.f_m.rows(), d.f_m.cols());
    d.u = update_u(d.f_m, scen);
    d.w = update_w(d.f_m, d.u, scen);
    const double eps = opts.stop_eps(scen.power);
    const double inf = std::numeric_limits<double>::infinity();
    const MatrixXcd none;

    for (int it = 1; it <= opts.max_iters; ++it) {
        MmIteration rec;
        rec.iteration = it;
        rec.rho = inf;
        rec.l[0] = lagrangian(d, scen, inf);
        d.u = update_u(d.f_m, scen);
        rec.l[1] = lagrangian(d, scen, inf);
        d.w = update_w(d.f_m, d.u, scen);
        rec.l[2] = lagrangian(d, scen, inf);
        const MatrixXcd prev = d.f_m;
        d.f_m = update_fm(scen, d.u, d.w, d.f_m, none, inf, opts).f_m;
        d.f_bb = d.f_m;
        rec.l[3] = rec.l[4] = rec.l[5] = lagrangian(d, scen, inf);
        rec.change = (d.f_m - prev).squaredNorm();
        rec.sumrate = sumrate(d.f_m, scen);
        double g = scen.num_targets() > 0 ? inf : 0.0;
        for (int t = 0; t < scen.num_targets(); ++t)
            g = std::min(g, gain_mm(d.f_m, scen, t));
        rec.min_gain = g;
        res.trace.push_back(rec);
        res.iterations = it;
        if (rec.change <= eps) {
            res.converged = true;
            break;
        }
    }
    refine_fbb(d, scen, opts);
    d.f_m = d.f_bb;
    return res;
}

MmResult design_hybrid_variant(const MmWaveScenario& scen, MmStructure kind, const MmWaveOptions& opts)
{
    if (kind == MmStructure::FD)
        return design_fd(scen, opts);
    return admm_rhb(scen, opts, kind);
}

SelectionState fixed_array_selection(const ArrayConfig& cfg)
{
    std::vector<GridPos> cells = coarse_positions(cfg);
    if (static_cast<int>(cells.size()) < cfg.n_s)
        throw InfeasibleError("fixed_array_selection: the coarse grid holds fewer than n_s antennas");
    const double cr = 0.5 * (cfg.grid_rows() + 1);
    const double cc = 0.5 * (cfg.grid_cols() + 1);
    auto dist = [&](const GridPos& g) { return (g.row - cr) * (g.row - cr) + (g.col - cc) * (g.col - cc); };
    std::stable_sort(cells.begin(), cells.end(), [&](const GridPos& a, const GridPos& b) {
        const double da = dist(a);
        const double db = dist(b);
        return da != db ? da < db : a < b;
    });
    cells.resize(static_cast<std::size_t>(cfg.n_s));
    std::sort(cells.begin(), cells.end());
    return positions_to_selection(cells, cfg);
}

SelectionState random_selection(const ArrayConfig& cfg, std::uint64_t seed)
{
    std::vector<GridPos> all;
    for (int r = 1; r <= cfg.grid_rows(); ++r)
        for (int c = 1; c <= cfg.grid_cols(); ++c)
            all.push_back({r, c});
    Rng rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        // Fisher-Yates shuffle, then greedy spacing-feasible fill.
        std::vector<GridPos> order = all;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
        std::vector<GridPos> picked;
        for (const GridPos& g : order) {
            bool ok = true;
            for (const GridPos& p : picked)
                ok = ok && spacing_ok(p, g, cfg);
            if (ok)
                picked.push_back(g);
            if (static_cast<int>(picked.size()) == cfg.n_s)
                break;
        }
        if (static_cast<int>(picked.size()) == cfg.n_s) {
            std::sort(picked.begin(), picked.end());
            return positions_to_selection(picked, cfg);
        }
    }
    throw InfeasibleError("random_selection: no spacing-feasible selection found");
}

Sub6gVariantResult design_sub6g_variant(const Sub6gScenario& scen, Sub6gStructure kind, const Sub6gOptions& opts,
                                        std::uint64_t seed, int max_draws)
{
    Sub6gVariantResult out;
    switch (kind) {
    case Sub6gStructure::CAS:
        out.design = abas(scen, opts).design;
        break;
    case Sub6gStructure::FixedArray: {
        const SelectionState sel = fixed_array_selection(scen.cfg);
        const SelectionSolve s = solve_fixed_selection(scen, sel, opts);
        if (!s.feasible)
            throw InfeasibleError("fixed array admits no feasible beamformer");
        out.design = {s.f_s, sel, s.power};
        break;
    }
    case Sub6gStructure::RAS_RS: {
        for (int draw = 0; draw < max_draws; ++draw) {
            const SelectionState sel = random_selection(scen.cfg, derive_seed(seed, static_cast<std::uint64_t>(draw)));
            const SelectionSolve s = solve_fixed_selection(scen, sel, opts);
            out.attempts = draw + 1;
            if (s.feasible) {
                out.design = {s.f_s, sel, s.power};
                out.initial_power = s.power;
                return out;
            }
        }
        throw InfeasibleError("random selection: no feasible draw");
    }
    case Sub6gStructure::RAS_FSJBAS: {
        const Sub6gDesign start = abas(scen, opts).design;
        const FsjbasResult r = fsjbas(scen, start, opts);
        out.design = r.design;
        out.evaluations = r.evaluations;
        out.initial_power = r.initial_power;
        return out;
    }
    }
    out.initial_power = out.design.power;
    return out;
}

} // namespace dualband
