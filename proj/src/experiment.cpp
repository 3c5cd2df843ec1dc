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

#include "dualband/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <omp.h>

#include "dualband/rng.hpp"

namespace dualband {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Runs f(i) for every index concurrently. Infeasible items come back empty;
// any other exception is rethrown after the loop.
template <typename T, typename F>
std::vector<std::optional<T>> for_each_seed(std::size_t n, F f)
{
    std::vector<std::optional<T>> out(n);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (const InfeasibleError&) {
        } catch (...) {
#pragma omp critical(dualband_seed_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

double min_or_nan(const std::vector<double>& v)
{
    if (v.empty()) return std::nan("");
    return *std::min_element(v.begin(), v.end());
}

std::vector<double> sub_gains(const Sub6gDesign& d, const Sub6gScenario& s)
{
    std::vector<double> g;
    for (int t = 0; t < s.num_targets(); ++t) g.push_back(gain_sub6g(d, s, t));
    return g;
}

std::vector<double> mm_gains(const MatrixXcd& f, const MmWaveScenario& s)
{
    std::vector<double> g;
    for (int t = 0; t < s.num_targets(); ++t) g.push_back(gain_mm(f, s, t));
    return g;
}

json cmat_to_json(const MatrixXcd& m)
{
    json re = json::array(), im = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

MatrixXcd cmat_from_json(const json& j)
{
    const auto r = j.at("rows").get<Eigen::Index>();
    const auto c = j.at("cols").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != static_cast<std::size_t>(r * c) || im.size() != re.size())
        throw std::runtime_error("matrix payload has the wrong length");
    MatrixXcd m(r, c);
    std::size_t k = 0;
    for (Eigen::Index jj = 0; jj < c; ++jj)
        for (Eigen::Index i = 0; i < r; ++i, ++k) m(i, jj) = {re[k].get<double>(), im[k].get<double>()};
    return m;
}

json imat_to_json(const MatrixXi& m)
{
    json data = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXi imat_from_json(const json& j)
{
    const auto r = j.at("rows").get<Eigen::Index>();
    const auto c = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (data.size() != static_cast<std::size_t>(r * c)) throw std::runtime_error("matrix payload has the wrong length");
    MatrixXi m(r, c);
    std::size_t k = 0;
    for (Eigen::Index jj = 0; jj < c; ++jj)
        for (Eigen::Index i = 0; i < r; ++i, ++k) m(i, jj) = data[k].get<int>();
    return m;
}

RhbDesign mm_design_from_json(const json& j)
{
    RhbDesign d;
    d.kind = parse_mm_structure(j.at("kind").get<std::string>());
    d.f_p = cmat_from_json(j.at("f_p"));
    d.s_matrix = imat_from_json(j.at("s_matrix"));
    d.f_rf_dense = cmat_from_json(j.at("f_rf_dense"));
    d.f_bb = cmat_from_json(j.at("f_bb"));
    return d;
}

std::string seed_file(const std::string& stem, std::uint64_t seed, const std::string& ext)
{
    return stem + "_seed" + std::to_string(seed) + ext;
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

CsvTable mm_trace_table(const MmResult& r)
{
    CsvTable t({"iteration", "rho", "l_start", "l_u", "l_w", "l_fm", "l_fp_s", "l_fbb", "primal_res", "change",
                "sumrate", "min_gain", "repaired"});
    for (const auto& it : r.trace) {
        std::vector<std::string> row{std::to_string(it.iteration), format_number(it.rho)};
        for (double l : it.l) row.push_back(format_number(l));
        row.push_back(format_number(it.primal_res));
        row.push_back(format_number(it.change));
        row.push_back(format_number(it.sumrate));
        row.push_back(format_number(it.min_gain));
        row.push_back(std::to_string(it.repaired));
        t.add_row(std::move(row));
    }
    return t;
}

CsvTable fsjbas_trace_table(const FsjbasResult& r)
{
    CsvTable t({"iteration", "antenna", "candidates", "power"});
    t.add_row({"0", "0", "0", format_number(r.initial_power)});
    for (const auto& it : r.trace)
        t.add_row({std::to_string(it.iteration), std::to_string(it.antenna_order), std::to_string(it.candidates),
                   format_number(it.best_power)});
    return t;
}

const std::vector<std::string> kRunHeader{"seed",       "status",     "sub6g",           "mmwave",
                                          "p_s",        "p_m",        "sumrate",         "min_gain_s",
                                          "min_gain_m", "worst_sinr_ratio", "fsjbas_iterations", "fsjbas_evaluations",
                                          "admm_iterations", "admm_converged", "primal_res", "valid"};

} // namespace

// ---------------------------------------------------------------------------

DualBandResult run_dual_band(const ScenarioConfig& cfg, std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    DualBandResult r;
    r.seed = seed;
    r.channels = gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, seed, cfg.priors);
    const Sub6gScenario ss = make_sub6g_scenario(cfg, r.channels);

    try {
        if (cfg.sub_structure == Sub6gStructure::RAS_FSJBAS) {
            const AbasResult start = abas(ss, cfg.sub);
            r.sub_search = fsjbas(ss, start.design, cfg.sub);
            r.sub = r.sub_search.design;
        } else {
            r.sub = design_sub6g_variant(ss, cfg.sub_structure, cfg.sub, derive_seed(seed, 0x5253)).design;
        }
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(std::string("sub-6G stage infeasible: ") + e.what());
    }
    r.p_s = r.sub.power;
    if (!cfg.p_m && r.p_s >= cfg.p_t)
        throw BudgetExhausted("sub-6G power " + format_number(r.p_s) + " exhausts the budget " +
                              format_number(cfg.p_t));
    r.p_m = cfg.mm_power(r.p_s);

    const MmWaveScenario ms = make_mm_scenario(cfg, r.channels, r.p_m);
    r.mm = design_hybrid_variant(ms, cfg.mm_structure, cfg.mm);

    const MatrixXcd f = r.mm.design.precoder();
    r.sumrate = sumrate(f, ms);
    r.min_gain_s = min_or_nan(sub_gains(r.sub, ss));
    r.min_gain_m = min_or_nan(mm_gains(f, ms));
    const ConstraintCheck sc = check_sub6g(r.sub, ss);
    r.worst_sinr_ratio = sc.worst_sinr_ratio;
    r.sub_valid = sc.ok;
    r.mm_valid = check_mm(r.mm.design, ms).ok();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

json design_to_json(const DualBandResult& r)
{
    const RhbDesign& d = r.mm.design;
    json j;
    j["seed"] = r.seed;
    j["p_s"] = r.p_s;
    j["p_m"] = r.p_m;
    j["sub6g"] = {{"selection", selection_to_json(r.sub.selection, r.channels.cfg)},
                  {"f_s", cmat_to_json(r.sub.f_s)},
                  {"power", r.sub.power}};
    j["mmwave"] = {{"kind", to_string(d.kind)},
                   {"f_p", cmat_to_json(d.f_p)},
                   {"s_matrix", imat_to_json(d.s_matrix)},
                   {"f_rf_dense", cmat_to_json(d.f_rf_dense)},
                   {"f_bb", cmat_to_json(d.f_bb)}};
    j["metrics"] = {{"sumrate", r.sumrate}, {"min_gain_s", r.min_gain_s}, {"min_gain_m", r.min_gain_m}};
    return j;
}

RunOutcome run_and_write(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds, const fs::path& out)
{
    fs::create_directories(out);
    struct Item {
        std::optional<DualBandResult> result;
        std::string status = "ok";
    };
    std::vector<Item> items(seeds.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(seeds.size()); ++i) {
        auto& item = items[static_cast<std::size_t>(i)];
        try {
            item.result = run_dual_band(cfg, seeds[static_cast<std::size_t>(i)]);
        } catch (const BudgetExhausted&) {
            item.status = "budget_exhausted";
        } catch (const InfeasibleError&) {
            item.status = "infeasible";
        } catch (...) {
#pragma omp critical(dualband_run_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    // Single writer from here on.
    RunOutcome outcome;
    CsvTable table(kRunHeader);
    json timing = json::object();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& item = items[i];
        const std::string seed = std::to_string(seeds[i]);
        if (!item.result) {
            ++outcome.infeasible;
            std::vector<std::string> row{seed, item.status, to_string(cfg.sub_structure), to_string(cfg.mm_structure)};
            row.resize(kRunHeader.size(), "nan");
            row.back() = "0";
            table.add_row(std::move(row));
            continue;
        }
        const DualBandResult& r = *item.result;
        const bool valid = r.sub_valid && r.mm_valid;
        if (!valid) ++outcome.invalid;
        table.add_row({seed, valid ? "ok" : "invalid", to_string(cfg.sub_structure), to_string(cfg.mm_structure),
                       format_number(r.p_s), format_number(r.p_m), format_number(r.sumrate),
                       format_number(r.min_gain_s), format_number(r.min_gain_m), format_number(r.worst_sinr_ratio),
                       std::to_string(r.sub_search.trace.size()), std::to_string(r.sub_search.evaluations),
                       std::to_string(r.mm.iterations), r.mm.converged ? "1" : "0",
                       format_number(r.mm.final_primal_res), valid ? "1" : "0"});
        timing[seed] = r.wall_seconds;

        const std::string mm_trace = seed_file("trace_mm", r.seed, ".csv");
        mm_trace_table(r.mm).write(out / mm_trace);
        outcome.files.push_back(mm_trace);
        if (cfg.sub_structure == Sub6gStructure::RAS_FSJBAS) {
            const std::string fs_trace = seed_file("trace_fsjbas", r.seed, ".csv");
            fsjbas_trace_table(r.sub_search).write(out / fs_trace);
            outcome.files.push_back(fs_trace);
        }
        const std::string design = seed_file("design", r.seed, ".json");
        write_json(out / design, design_to_json(r));
        outcome.files.push_back(design);
        if (cfg.beampattern_resolution > 0) {
            CsvTable bp({"el", "az", "gain"});
            for (const auto& c : beampattern(r.mm.design.precoder(), r.channels.cfg, cfg.beampattern_resolution))
                bp.add_row({format_number(c.el), format_number(c.az), format_number(c.gain)});
            const std::string name = seed_file("beampattern", r.seed, ".csv");
            bp.write(out / name);
            outcome.files.push_back(name);
        }
    }
    table.write(out / "run.csv");
    outcome.files.insert(outcome.files.begin(), "run.csv");
    // Wall time varies between runs, so it stays out of the CSVs.
    write_json(out / "timing.json", timing);
    write_json(out / "manifest.json", make_manifest(cfg, "run", "", seeds, outcome.files, out));
    return outcome;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids{"fig6", "fig7", "fig8", "fig9", "fig10", "tradeoff"};
    return ids;
}

void add_statistics(CsvTable& table, const std::string& sweep, const std::string& structure,
                    const std::vector<double>& values, int failed, int invalid)
{
    const double n = static_cast<double>(values.size());
    double mean = std::nan(""), sd = std::nan(""), lo = std::nan(""), hi = std::nan("");
    if (!values.empty()) {
        mean = 0.0;
        for (double v : values) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        lo = *std::min_element(values.begin(), values.end());
        hi = *std::max_element(values.begin(), values.end());
    }
    table.add_row({sweep, structure, "mean", format_number(mean)});
    table.add_row({sweep, structure, "std", format_number(sd)});
    table.add_row({sweep, structure, "min", format_number(lo)});
    table.add_row({sweep, structure, "max", format_number(hi)});
    table.add_row({sweep, structure, "count", std::to_string(values.size())});
    table.add_row({sweep, structure, "failed", std::to_string(failed)});
    table.add_row({sweep, structure, "invalid", std::to_string(invalid)});
}

namespace {

// Seed-indexed values of one curve at one sweep point.
struct Samples {
    std::vector<double> values;
    int failed = 0;  // no design (infeasible)
    int invalid = 0; // design rejected by re-validation
};

struct MmPoint {
    double sumrate = 0.0;
    bool valid = false;
};

MmPoint design_and_score(const MmWaveScenario& design_scen, const MmWaveScenario& eval_scen, MmStructure kind,
                         const MmWaveOptions& opts)
{
    const MmResult r = design_hybrid_variant(design_scen, kind, opts);
    return {sumrate(r.design, eval_scen), check_mm(r.design, design_scen).ok()};
}

double noise_for_snr(double power, double snr_db) { return power / std::pow(10.0, snr_db / 10.0); }

double mm_figure_power(const ScenarioConfig& cfg)
{
    if (!cfg.p_m) throw ConfigError("mmWave figures need power.p_m");
    if (cfg.targets_m.empty()) throw ConfigError("mmWave figures need thresholds.targets_m");
    return *cfg.p_m;
}

void collect(Samples& s, const std::optional<MmPoint>& p, int& invalid)
{
    if (!p) {
        ++s.failed;
    } else if (!p->valid) {
        ++s.invalid;
        ++invalid;
    } else {
        s.values.push_back(p->sumrate);
    }
}

FigureOutput figure_fig6(const ScenarioConfig& cfg)
{
    const double power = mm_figure_power(cfg);
    const std::uint64_t seed = cfg.seeds.front();
    const ChannelSet ch = gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, seed, cfg.priors);
    const MmWaveScenario scen = make_mm_scenario(cfg, ch, power);
    const auto& kinds = cfg.figure.mm_structures;

    auto results = for_each_seed<MmResult>(kinds.size(), [&](std::size_t i) {
        return design_hybrid_variant(scen, kinds[i], cfg.mm);
    });

    FigureOutput out{"fig6", {}, 0};
    CsvTable summary({"structure", "statistic", "value"});
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const std::string name = to_string(kinds[i]);
        if (!results[i]) {
            summary.add_row({name, "failed", "1"});
            continue;
        }
        const RhbDesign& d = results[i]->design;
        const MmCheck chk = check_mm(d, scen);
        if (!chk.ok()) ++out.invalid;
        const MatrixXcd f = d.precoder();
        CsvTable grid({"el", "az", "structure", "gain"});
        for (const auto& c : beampattern(f, cfg.array, cfg.figure.beampattern_resolution))
            grid.add_row({format_number(c.el), format_number(c.az), name, format_number(c.gain)});
        out.curves.push_back({"fig6_" + name, std::move(grid)});
        summary.add_row({name, "sumrate", format_number(sumrate(f, scen))});
        summary.add_row({name, "min_gain", format_number(min_or_nan(mm_gains(f, scen)))});
        summary.add_row({name, "valid", chk.ok() ? "1" : "0"});
    }
    out.curves.push_back({"fig6_summary", std::move(summary)});
    return out;
}

FigureOutput figure_fig7(const ScenarioConfig& cfg)
{
    const double power = mm_figure_power(cfg);
    const auto& kinds = cfg.figure.mm_structures;
    const auto& snrs = cfg.figure.snr_db;
    const std::size_t n_seed = cfg.seeds.size();
    const std::size_t per_seed = kinds.size() * snrs.size();
    if (snrs.empty()) throw ConfigError("figure.snr_db: fig7 needs at least one point");
    const double ref_snr = cfg.figure.reference_snr_db.value_or(*std::max_element(snrs.begin(), snrs.end()));

    // One task per (seed, structure, snr); the channel depends only on the seed.
    auto points = for_each_seed<MmPoint>(n_seed * per_seed, [&](std::size_t task) {
        const std::size_t s = task / per_seed;
        const std::size_t k = (task % per_seed) / snrs.size();
        const std::size_t p = task % snrs.size();
        const ChannelSet ch = gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, cfg.seeds[s], cfg.priors);
        const MmWaveScenario eval = make_mm_scenario(cfg, ch, power, noise_for_snr(power, snrs[p]));
        if (cfg.figure.reoptimize_per_point) return design_and_score(eval, eval, kinds[k], cfg.mm);
        const MmWaveScenario ref = make_mm_scenario(cfg, ch, power, noise_for_snr(power, ref_snr));
        return design_and_score(ref, eval, kinds[k], cfg.mm);
    });

    FigureOutput out{"fig7", {}, 0};
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        CsvTable t({"snr_db", "structure", "statistic", "value"});
        for (std::size_t p = 0; p < snrs.size(); ++p) {
            Samples smp;
            for (std::size_t s = 0; s < n_seed; ++s) collect(smp, points[s * per_seed + k * snrs.size() + p], out.invalid);
            add_statistics(t, format_number(snrs[p]), to_string(kinds[k]), smp.values, smp.failed, smp.invalid);
        }
        out.curves.push_back({"fig7_" + to_string(kinds[k]), std::move(t)});
    }
    return out;
}

FigureOutput figure_tradeoff(const ScenarioConfig& cfg)
{
    const double power = mm_figure_power(cfg);
    const auto& kinds = cfg.figure.mm_structures;
    const auto& levels = cfg.figure.upsilon_m;
    if (levels.empty()) throw ConfigError("figure.upsilon_m: tradeoff needs at least one level");
    const std::size_t n_seed = cfg.seeds.size();
    const std::size_t per_seed = kinds.size() * levels.size();

    auto points = for_each_seed<MmPoint>(n_seed * per_seed, [&](std::size_t task) {
        const std::size_t s = task / per_seed;
        const std::size_t k = (task % per_seed) / levels.size();
        const std::size_t p = task % levels.size();
        ScenarioConfig c = cfg;
        c.upsilon_m.assign(cfg.targets_m.size(), levels[p]);
        const ChannelSet ch = gen_channels(c.array, c.k_s, c.k_m, c.l_s, c.l_m, c.seeds[s], c.priors);
        const MmWaveScenario scen = make_mm_scenario(c, ch, power);
        return design_and_score(scen, scen, kinds[k], c.mm);
    });

    FigureOutput out{"tradeoff", {}, 0};
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        CsvTable t({"upsilon_m", "structure", "statistic", "value"});
        for (std::size_t p = 0; p < levels.size(); ++p) {
            Samples smp;
            for (std::size_t s = 0; s < n_seed; ++s)
                collect(smp, points[s * per_seed + k * levels.size() + p], out.invalid);
            add_statistics(t, format_number(levels[p]), to_string(kinds[k]), smp.values, smp.failed, smp.invalid);
        }
        out.curves.push_back({"tradeoff_" + to_string(kinds[k]), std::move(t)});
    }
    return out;
}

// Powers of every requested sub-6G structure for one channel draw. ABAS runs
// once and seeds both CAS and FS-JBAS.
struct Sub6gPowers {
    std::vector<double> power; // NaN when there is no accepted design
    std::vector<int> invalid;
};

Sub6gPowers sub6g_powers(const Sub6gScenario& scen, const std::vector<Sub6gStructure>& kinds,
                         const Sub6gOptions& opts, std::uint64_t seed)
{
    Sub6gPowers out{std::vector<double>(kinds.size(), std::nan("")), std::vector<int>(kinds.size(), 0)};
    std::optional<Sub6gDesign> cas;
    auto cas_design = [&]() -> const Sub6gDesign& {
        if (!cas) cas = abas(scen, opts).design;
        return *cas;
    };
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        try {
            Sub6gDesign d;
            switch (kinds[i]) {
            case Sub6gStructure::CAS:
                d = cas_design();
                break;
            case Sub6gStructure::RAS_FSJBAS:
                d = fsjbas(scen, cas_design(), opts).design;
                break;
            default:
                d = design_sub6g_variant(scen, kinds[i], opts, derive_seed(seed, 0x5253)).design;
            }
            if (check_sub6g(d, scen).ok)
                out.power[i] = d.power;
            else
                out.invalid[i] = 1;
        } catch (const InfeasibleError&) {
        }
    }
    return out;
}

FigureOutput sub6g_sweep(const ScenarioConfig& cfg, const std::string& id, const std::string& column,
                         const std::vector<int>& sweep, bool sweep_array)
{
    if (sweep.empty()) throw ConfigError("figure: " + id + " needs at least one sweep value");
    const auto& kinds = cfg.figure.sub6g_structures;
    const std::size_t n_seed = cfg.seeds.size();

    auto rows = for_each_seed<Sub6gPowers>(sweep.size() * n_seed, [&](std::size_t task) {
        const std::size_t p = task / n_seed;
        const std::size_t s = task % n_seed;
        ScenarioConfig c = cfg;
        if (sweep_array) {
            c.array.n_row = c.array.n_col = sweep[p];
        } else {
            c.k_s = sweep[p];
            c.gamma.assign(static_cast<std::size_t>(c.k_s), cfg.gamma.front());
        }
        try {
            c.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(id + ": sweep value " + std::to_string(sweep[p]) + ": " + e.what());
        }
        const ChannelSet ch = gen_channels(c.array, c.k_s, c.k_m, c.l_s, c.l_m, c.seeds[s], c.priors);
        return sub6g_powers(make_sub6g_scenario(c, ch), kinds, c.sub, c.seeds[s]);
    });

    FigureOutput out{id, {}, 0};
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        CsvTable t({column, "structure", "statistic", "value"});
        for (std::size_t p = 0; p < sweep.size(); ++p) {
            Samples smp;
            for (std::size_t s = 0; s < n_seed; ++s) {
                const auto& r = rows[p * n_seed + s];
                if (r && r->invalid[k]) {
                    ++smp.invalid;
                    ++out.invalid;
                } else if (!r || std::isnan(r->power[k])) {
                    ++smp.failed;
                } else {
                    smp.values.push_back(r->power[k]);
                }
            }
            add_statistics(t, std::to_string(sweep[p]), to_string(kinds[k]), smp.values, smp.failed, smp.invalid);
        }
        out.curves.push_back({id + "_" + to_string(kinds[k]), std::move(t)});
    }
    return out;
}

FigureOutput figure_fig10(const ScenarioConfig& cfg)
{
    const std::vector<std::string> inits{"abas", "random", "fixed"};
    const int cap = cfg.sub.fs_iteration_cap(cfg.array.n_s);
    const std::size_t n_seed = cfg.seeds.size();
    std::vector<int> invalid(n_seed * inits.size(), 0);

    // Power after each FS-JBAS iteration, held at its final value once the search stops.
    auto traces = for_each_seed<std::vector<double>>(n_seed * inits.size(), [&](std::size_t task) {
        const std::size_t s = task / inits.size();
        const std::size_t m = task % inits.size();
        const ChannelSet ch = gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, cfg.seeds[s], cfg.priors);
        const Sub6gScenario scen = make_sub6g_scenario(cfg, ch);
        Sub6gDesign start;
        if (m == 0)
            start = abas(scen, cfg.sub).design;
        else
            start = design_sub6g_variant(scen, m == 1 ? Sub6gStructure::RAS_RS : Sub6gStructure::FixedArray, cfg.sub,
                                         derive_seed(cfg.seeds[s], 0x5253))
                        .design;
        const FsjbasResult r = fsjbas(scen, start, cfg.sub);
        if (!check_sub6g(r.design, scen).ok) {
            invalid[task] = 1;
            throw InfeasibleError("final design failed re-validation");
        }
        std::vector<double> curve{r.initial_power};
        for (const auto& it : r.trace) curve.push_back(it.best_power);
        curve.resize(static_cast<std::size_t>(cap) + 1, curve.back());
        return curve;
    });

    FigureOutput out{"fig10", {}, 0};
    for (int v : invalid) out.invalid += v;
    for (std::size_t m = 0; m < inits.size(); ++m) {
        CsvTable t({"iteration", "structure", "statistic", "value"});
        for (int it = 0; it <= cap; ++it) {
            Samples smp;
            for (std::size_t s = 0; s < n_seed; ++s) {
                const std::size_t task = s * inits.size() + m;
                if (traces[task])
                    smp.values.push_back((*traces[task])[static_cast<std::size_t>(it)]);
                else if (invalid[task])
                    ++smp.invalid;
                else
                    ++smp.failed;
            }
            add_statistics(t, std::to_string(it), inits[m], smp.values, smp.failed, smp.invalid);
        }
        out.curves.push_back({"fig10_" + inits[m], std::move(t)});
    }
    return out;
}

} // namespace

FigureOutput run_figure(const ScenarioConfig& cfg, const std::string& id)
{
    if (id == "fig6") return figure_fig6(cfg);
    if (id == "fig7") return figure_fig7(cfg);
    if (id == "fig8") return sub6g_sweep(cfg, "fig8", "n_row", cfg.figure.array_sizes, true);
    if (id == "fig9") return sub6g_sweep(cfg, "fig9", "k_s", cfg.figure.sub6g_users, false);
    if (id == "fig10") return figure_fig10(cfg);
    if (id == "tradeoff") return figure_tradeoff(cfg);
    throw ConfigError("unknown figure id '" + id + "'");
}

std::vector<std::string> write_figure(const ScenarioConfig& cfg, const FigureOutput& fig, const fs::path& out)
{
    fs::create_directories(out);
    std::vector<std::string> files;
    for (const auto& c : fig.curves) {
        const std::string name = c.name + ".csv";
        c.table.write(out / name);
        files.push_back(name);
    }
    write_json(out / "manifest.json", make_manifest(cfg, "figure", fig.id, cfg.seeds, files, out));
    return files;
}

// ---------------------------------------------------------------------------

std::string file_digest(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::uint64_t h = 14695981039346656037ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

json make_manifest(const ScenarioConfig& cfg, const std::string& command, const std::string& figure,
                   const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& files, const fs::path& out)
{
    json j;
    j["version"] = DUALBAND_VERSION;
    j["command"] = command;
    if (!figure.empty()) j["figure"] = figure;
    j["config_hash"] = config_hash(cfg);
    j["seeds"] = seeds;
    json list = json::array();
    for (const auto& f : files) list.push_back({{"name", f}, {"digest", file_digest(out / f)}});
    j["files"] = list;
    j["config"] = config_to_json(cfg);
    return j;
}

ValidationReport validate_results(const fs::path& dir)
{
    ValidationReport rep;
    const json manifest = read_json(dir / "manifest.json");
    const ScenarioConfig cfg = parse_config(manifest.at("config"));
    if (manifest.at("config_hash").get<std::string>() != config_hash(cfg))
        rep.problems.push_back("config hash does not match the embedded config");

    for (const auto& f : manifest.at("files")) {
        const std::string name = f.at("name").get<std::string>();
        if (!fs::exists(dir / name)) {
            rep.problems.push_back(name + ": missing");
        } else if (file_digest(dir / name) != f.at("digest").get<std::string>()) {
            rep.problems.push_back(name + ": digest mismatch");
        }
    }
    if (manifest.at("command").get<std::string>() != "run") return rep;

    const CsvTable run = CsvTable::read(dir / "run.csv");
    std::map<std::string, std::vector<std::string>> rows;
    for (const auto& r : run.rows()) rows[r.at(0)] = r;
    auto column = [&](const std::string& name) {
        const auto& h = run.header();
        return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
    };

    for (const auto seed : manifest.at("seeds").get<std::vector<std::uint64_t>>()) {
        const std::string key = std::to_string(seed);
        const fs::path design_path = dir / seed_file("design", seed, ".json");
        if (!rows.count(key)) {
            rep.problems.push_back("seed " + key + ": no row in run.csv");
            continue;
        }
        if (!fs::exists(design_path)) {
            if (rows[key].at(column("status")) == "ok") rep.problems.push_back("seed " + key + ": design missing");
            continue;
        }
        ++rep.checked;
        const json d = read_json(design_path);
        const ChannelSet ch = gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, seed, cfg.priors);
        const Sub6gScenario ss = make_sub6g_scenario(cfg, ch);
        Sub6gDesign sub;
        sub.f_s = cmat_from_json(d.at("sub6g").at("f_s"));
        sub.selection = selection_from_json(d.at("sub6g").at("selection"), cfg.array);
        sub.power = d.at("sub6g").at("power").get<double>();
        if (!check_sub6g(sub, ss).ok) rep.problems.push_back("seed " + key + ": sub-6G constraints violated");
        if (std::abs(selection_power(sub.f_s, sub.selection) - sub.power) > 1e-6 * (1.0 + sub.power))
            rep.problems.push_back("seed " + key + ": stored sub-6G power disagrees with the beamformer");

        const double p_m = d.at("p_m").get<double>();
        if (!cfg.p_m && std::abs(p_m - (cfg.p_t - sub.power)) > 1e-9 * (1.0 + cfg.p_t))
            rep.problems.push_back("seed " + key + ": power split is not P_t - P_s");
        const MmWaveScenario ms = make_mm_scenario(cfg, ch, p_m);
        const RhbDesign mm = mm_design_from_json(d.at("mmwave"));
        const MmCheck chk = check_mm(mm, ms);
        if (!chk.ok()) rep.problems.push_back("seed " + key + ": mmWave constraints violated");
        const double rate = sumrate(mm, ms);
        if (rows[key].at(column("sumrate")) != format_number(rate))
            rep.problems.push_back("seed " + key + ": sum-rate in run.csv does not match the design");
    }
    return rep;
}

} // namespace dualband
