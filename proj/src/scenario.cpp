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

#include "dualband/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace dualband {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, const std::string& where, T& out)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

// Scalar broadcast to `n` entries, or an explicit list of length n.
std::vector<double> per_item(const json& j, const std::string& where, int n)
{
    if (j.is_number()) return std::vector<double>(static_cast<std::size_t>(n), j.get<double>());
    if (!j.is_array()) throw ConfigError(where + ": expected a number or a list");
    auto v = j.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != n)
        throw ConfigError(where + ": expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    return v;
}

std::vector<Direction> directions(const json& j, const std::string& where)
{
    if (!j.is_array()) throw ConfigError(where + ": expected a list of [el, az] pairs");
    std::vector<Direction> out;
    for (const auto& d : j) {
        if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
            throw ConfigError(where + ": each direction is [el, az]");
        out.push_back({d[0].get<double>(), d[1].get<double>()});
    }
    return out;
}

json directions_json(const std::vector<Direction>& dirs)
{
    json out = json::array();
    for (const auto& d : dirs) out.push_back({d.el, d.az});
    return out;
}

GainConvention convention_of(const json& j, const std::string& where)
{
    try {
        return parse_gain_convention(j.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

conic::Method method_of(const std::string& name)
{
    if (name == "ipm") return conic::Method::InteriorPoint;
    if (name == "admm") return conic::Method::Admm;
    throw ConfigError("algorithm.conic_method: expected 'ipm' or 'admm', got '" + name + "'");
}

template <typename E, typename F>
std::vector<E> enum_list(const json& j, const std::string& where, F parse)
{
    if (!j.is_array()) throw ConfigError(where + ": expected a list of names");
    std::vector<E> out;
    for (const auto& item : j) {
        try {
            out.push_back(parse(item.get<std::string>()));
        } catch (const std::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return out;
}

template <typename E>
json names(const std::vector<E>& v)
{
    json out = json::array();
    for (auto e : v) out.push_back(to_string(e));
    return out;
}

} // namespace

void ScenarioConfig::validate() const
{
    try {
        array.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("array: ") + e.what());
    }
    if (k_s < 1 || k_m < 1 || l_s < 1 || l_m < 1) throw ConfigError("users: counts must be positive");
    if (k_m > array.n_rf) throw ConfigError("users.k_m: one RF chain per mmWave stream is required (k_m <= n_rf)");
    if (static_cast<int>(gamma.size()) != k_s) throw ConfigError("thresholds.gamma: one entry per sub-6G user");
    if (upsilon_s.size() != targets_s.size()) throw ConfigError("thresholds.upsilon_s: one entry per target");
    if (upsilon_m.size() != targets_m.size()) throw ConfigError("thresholds.upsilon_m: one entry per target");
    for (double g : gamma)
        if (!(g > 0.0)) throw ConfigError("thresholds.gamma: thresholds must be positive");
    for (double u : upsilon_s)
        if (u < 0.0) throw ConfigError("thresholds.upsilon_s: thresholds must be non-negative");
    for (double u : upsilon_m)
        if (u < 0.0) throw ConfigError("thresholds.upsilon_m: thresholds must be non-negative");
    for (const auto* list : {&targets_s, &targets_m})
        for (const auto& d : *list)
            if (std::abs(d.el) > 1.0 || std::abs(d.az) > 1.0)
                throw ConfigError("thresholds: surrogate angles must lie in [-1, 1]");
    if (!(p_t > 0.0)) throw ConfigError("power.p_t: must be positive");
    if (p_m && !(*p_m > 0.0)) throw ConfigError("power.p_m: must be positive");
    if (!(noise_s > 0.0) || !(noise_m > 0.0)) throw ConfigError("power: noise powers must be positive");
    if (seeds.empty()) throw ConfigError("run.seeds: at least one seed is required");
    if (mm.max_iters < 1 || mm.sca_iters < 1) throw ConfigError("algorithm.mmwave: iteration caps must be positive");
    if (mm.eps < 0.0 || !(mm.eps_rel > 0.0)) throw ConfigError("algorithm.mmwave: stopping thresholds must be positive");
    if (!(mm.rho > 0.0)) throw ConfigError("algorithm.mmwave.rho: must be positive");
    if (sub.abas_iters < 1 || sub.sca_iters < 1) throw ConfigError("algorithm.sub6g: iteration caps must be positive");
    if (threads < 0) throw ConfigError("run.threads: must be non-negative");
    if (beampattern_resolution < 0 || figure.beampattern_resolution < 2)
        throw ConfigError("beampattern resolution out of range");
    for (int n : figure.array_sizes)
        if (n < 2) throw ConfigError("figure.array_sizes: sizes must be at least 2");
    for (int k : figure.sub6g_users)
        if (k < 1) throw ConfigError("figure.sub6g_users: counts must be positive");
    for (double u : figure.upsilon_m)
        if (u < 0.0) throw ConfigError("figure.upsilon_m: thresholds must be non-negative");
}

ScenarioConfig parse_config(const json& j)
{
    ScenarioConfig c;
    check_keys(j, "config", {"array", "users", "thresholds", "power", "algorithm", "run", "figure"});

    if (j.contains("array")) {
        const auto& a = j["array"];
        check_keys(a, "array", {"n_row", "n_col", "n_s", "n_rf", "h_s", "v_s", "lambda_ratio"});
        read(a, "n_row", "array", c.array.n_row);
        read(a, "n_col", "array", c.array.n_col);
        read(a, "n_s", "array", c.array.n_s);
        read(a, "n_rf", "array", c.array.n_rf);
        read(a, "h_s", "array", c.array.h_s);
        read(a, "v_s", "array", c.array.v_s);
        read(a, "lambda_ratio", "array", c.array.lambda_ratio);
    }
    if (j.contains("users")) {
        const auto& u = j["users"];
        check_keys(u, "users", {"k_s", "k_m", "l_s", "l_m", "priors"});
        read(u, "k_s", "users", c.k_s);
        read(u, "k_m", "users", c.k_m);
        read(u, "l_s", "users", c.l_s);
        read(u, "l_m", "users", c.l_m);
        if (u.contains("priors")) {
            const auto& p = u["priors"];
            check_keys(p, "users.priors", {"gain_variance", "angle_lo", "angle_hi"});
            read(p, "gain_variance", "users.priors", c.priors.gain_variance);
            read(p, "angle_lo", "users.priors", c.priors.angle_lo);
            read(p, "angle_hi", "users.priors", c.priors.angle_hi);
        }
    }

    c.gamma.assign(static_cast<std::size_t>(std::max(c.k_s, 0)), 10.0);
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        check_keys(t, "thresholds", {"gamma", "targets_s", "upsilon_s", "targets_m", "upsilon_m"});
        if (t.contains("targets_s")) c.targets_s = directions(t["targets_s"], "thresholds.targets_s");
        if (t.contains("targets_m")) c.targets_m = directions(t["targets_m"], "thresholds.targets_m");
        if (t.contains("gamma")) c.gamma = per_item(t["gamma"], "thresholds.gamma", c.k_s);
        const int ts = static_cast<int>(c.targets_s.size());
        const int tm = static_cast<int>(c.targets_m.size());
        c.upsilon_s = t.contains("upsilon_s") ? per_item(t["upsilon_s"], "thresholds.upsilon_s", ts)
                                              : std::vector<double>(static_cast<std::size_t>(ts), 0.0);
        c.upsilon_m = t.contains("upsilon_m") ? per_item(t["upsilon_m"], "thresholds.upsilon_m", tm)
                                              : std::vector<double>(static_cast<std::size_t>(tm), 0.0);
    }

    if (j.contains("power")) {
        const auto& p = j["power"];
        check_keys(p, "power", {"p_t", "p_m", "noise_s", "noise_m"});
        read(p, "p_t", "power", c.p_t);
        if (p.contains("p_m") && !p["p_m"].is_null()) {
            double v = 0.0;
            read(p, "p_m", "power", v);
            c.p_m = v;
        }
        read(p, "noise_s", "power", c.noise_s);
        read(p, "noise_m", "power", c.noise_m);
    }

    if (j.contains("algorithm")) {
        const auto& a = j["algorithm"];
        check_keys(a, "algorithm", {"gain_convention", "gain_convention_mm", "conic_method", "conic_tol", "sub6g",
                                    "mmwave"});
        if (a.contains("gain_convention")) {
            c.convention_s = convention_of(a["gain_convention"], "algorithm.gain_convention");
            c.convention_m = c.convention_s;
        }
        if (a.contains("gain_convention_mm"))
            c.convention_m = convention_of(a["gain_convention_mm"], "algorithm.gain_convention_mm");
        conic::Settings st;
        if (a.contains("conic_method")) {
            std::string m;
            read(a, "conic_method", "algorithm", m);
            st.method = method_of(m);
        }
        read(a, "conic_tol", "algorithm", st.tol);
        c.sub.solver = st;
        c.mm.solver = st;
        if (a.contains("sub6g")) {
            const auto& s = a["sub6g"];
            const std::string w = "algorithm.sub6g";
            check_keys(s, w, {"kappa", "abas_iters", "mu_init", "mu_growth", "mu_max", "fs_iters", "sca_iters",
                              "sca_tol", "support_tol"});
            read(s, "kappa", w, c.sub.kappa);
            read(s, "abas_iters", w, c.sub.abas_iters);
            read(s, "mu_init", w, c.sub.mu_init);
            read(s, "mu_growth", w, c.sub.mu_growth);
            read(s, "mu_max", w, c.sub.mu_max);
            read(s, "fs_iters", w, c.sub.fs_iters);
            read(s, "sca_iters", w, c.sub.sca_iters);
            read(s, "sca_tol", w, c.sub.sca_tol);
            read(s, "support_tol", w, c.sub.support_tol);
        }
        if (a.contains("mmwave")) {
            const auto& m = a["mmwave"];
            const std::string w = "algorithm.mmwave";
            check_keys(m, w, {"rho", "rho_decay", "rho_decay_every", "max_iters", "eps", "eps_rel", "sca_iters", "sca_tol",
                              "init_rounds", "refine_rounds", "fast_path"});
            read(m, "rho", w, c.mm.rho);
            read(m, "rho_decay", w, c.mm.rho_decay);
            read(m, "rho_decay_every", w, c.mm.rho_decay_every);
            read(m, "max_iters", w, c.mm.max_iters);
            read(m, "eps", w, c.mm.eps);
            read(m, "eps_rel", w, c.mm.eps_rel);
            read(m, "sca_iters", w, c.mm.sca_iters);
            read(m, "sca_tol", w, c.mm.sca_tol);
            read(m, "init_rounds", w, c.mm.init_rounds);
            read(m, "refine_rounds", w, c.mm.refine_rounds);
            read(m, "fast_path", w, c.mm.fast_path);
        }
    }

    if (j.contains("run")) {
        const auto& r = j["run"];
        check_keys(r, "run", {"seeds", "pipelines", "output_dir", "beampattern_resolution", "threads"});
        read(r, "seeds", "run", c.seeds);
        if (r.contains("pipelines")) {
            const auto& p = r["pipelines"];
            check_keys(p, "run.pipelines", {"sub6g", "mmwave"});
            try {
                if (p.contains("sub6g")) c.sub_structure = parse_sub6g_structure(p["sub6g"].get<std::string>());
                if (p.contains("mmwave")) c.mm_structure = parse_mm_structure(p["mmwave"].get<std::string>());
            } catch (const std::exception& e) {
                throw ConfigError(std::string("run.pipelines: ") + e.what());
            }
        }
        read(r, "output_dir", "run", c.output_dir);
        read(r, "beampattern_resolution", "run", c.beampattern_resolution);
        read(r, "threads", "run", c.threads);
    }

    if (j.contains("figure")) {
        const auto& f = j["figure"];
        const std::string w = "figure";
        check_keys(f, w, {"snr_db", "reoptimize_per_point", "reference_snr_db", "array_sizes", "sub6g_users",
                          "upsilon_m", "mm_structures", "sub6g_structures", "beampattern_resolution"});
        read(f, "snr_db", w, c.figure.snr_db);
        read(f, "reoptimize_per_point", w, c.figure.reoptimize_per_point);
        if (f.contains("reference_snr_db") && !f["reference_snr_db"].is_null()) {
            double v = 0.0;
            read(f, "reference_snr_db", w, v);
            c.figure.reference_snr_db = v;
        }
        read(f, "array_sizes", w, c.figure.array_sizes);
        read(f, "sub6g_users", w, c.figure.sub6g_users);
        read(f, "upsilon_m", w, c.figure.upsilon_m);
        if (f.contains("mm_structures"))
            c.figure.mm_structures = enum_list<MmStructure>(f["mm_structures"], "figure.mm_structures",
                                                            parse_mm_structure);
        if (f.contains("sub6g_structures"))
            c.figure.sub6g_structures = enum_list<Sub6gStructure>(f["sub6g_structures"], "figure.sub6g_structures",
                                                                  parse_sub6g_structure);
        read(f, "beampattern_resolution", w, c.figure.beampattern_resolution);
    }

    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ScenarioConfig& c)
{
    const auto method = c.sub.solver.method == conic::Method::Admm ? "admm" : "ipm";
    json j;
    j["array"] = {{"n_row", c.array.n_row}, {"n_col", c.array.n_col}, {"n_s", c.array.n_s},
                  {"n_rf", c.array.n_rf},   {"h_s", c.array.h_s},     {"v_s", c.array.v_s},
                  {"lambda_ratio", c.array.lambda_ratio}};
    j["users"] = {{"k_s", c.k_s},
                  {"k_m", c.k_m},
                  {"l_s", c.l_s},
                  {"l_m", c.l_m},
                  {"priors",
                   {{"gain_variance", c.priors.gain_variance},
                    {"angle_lo", c.priors.angle_lo},
                    {"angle_hi", c.priors.angle_hi}}}};
    j["thresholds"] = {{"gamma", c.gamma},
                       {"targets_s", directions_json(c.targets_s)},
                       {"upsilon_s", c.upsilon_s},
                       {"targets_m", directions_json(c.targets_m)},
                       {"upsilon_m", c.upsilon_m}};
    j["power"] = {{"p_t", c.p_t}, {"noise_s", c.noise_s}, {"noise_m", c.noise_m}};
    j["power"]["p_m"] = c.p_m ? json(*c.p_m) : json(nullptr);
    j["algorithm"] = {
        {"gain_convention", to_string(c.convention_s)},
        {"gain_convention_mm", to_string(c.convention_m)},
        {"conic_method", method},
        {"conic_tol", c.sub.solver.tol},
        {"sub6g",
         {{"kappa", c.sub.kappa},
          {"abas_iters", c.sub.abas_iters},
          {"mu_init", c.sub.mu_init},
          {"mu_growth", c.sub.mu_growth},
          {"mu_max", c.sub.mu_max},
          {"fs_iters", c.sub.fs_iters},
          {"sca_iters", c.sub.sca_iters},
          {"sca_tol", c.sub.sca_tol},
          {"support_tol", c.sub.support_tol}}},
        {"mmwave",
         {{"rho", c.mm.rho},
          {"rho_decay", c.mm.rho_decay},
          {"rho_decay_every", c.mm.rho_decay_every},
          {"max_iters", c.mm.max_iters},
          {"eps", c.mm.eps},
          {"eps_rel", c.mm.eps_rel},
          {"sca_iters", c.mm.sca_iters},
          {"sca_tol", c.mm.sca_tol},
          {"init_rounds", c.mm.init_rounds},
          {"refine_rounds", c.mm.refine_rounds},
          {"fast_path", c.mm.fast_path}}}};
    j["run"] = {{"seeds", c.seeds},
                {"pipelines", {{"sub6g", to_string(c.sub_structure)}, {"mmwave", to_string(c.mm_structure)}}},
                {"output_dir", c.output_dir},
                {"beampattern_resolution", c.beampattern_resolution},
                {"threads", c.threads}};
    j["figure"] = {{"snr_db", c.figure.snr_db},
                   {"reoptimize_per_point", c.figure.reoptimize_per_point},
                   {"array_sizes", c.figure.array_sizes},
                   {"sub6g_users", c.figure.sub6g_users},
                   {"upsilon_m", c.figure.upsilon_m},
                   {"mm_structures", names(c.figure.mm_structures)},
                   {"sub6g_structures", names(c.figure.sub6g_structures)},
                   {"beampattern_resolution", c.figure.beampattern_resolution}};
    j["figure"]["reference_snr_db"] = c.figure.reference_snr_db ? json(*c.figure.reference_snr_db) : json(nullptr);
    return j;
}

std::string config_hash(const ScenarioConfig& cfg)
{
    // Output location and thread count do not affect results.
    json j = config_to_json(cfg);
    j["run"].erase("output_dir");
    j["run"].erase("threads");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Sub6gScenario make_sub6g_scenario(const ScenarioConfig& cfg, const ChannelSet& ch)
{
    return Sub6gScenario::make(ch.cfg, ch.h_sub, Eigen::Map<const VectorXd>(cfg.gamma.data(), cfg.k_s),
                               cfg.targets_s,
                               Eigen::Map<const VectorXd>(cfg.upsilon_s.data(), static_cast<Eigen::Index>(cfg.upsilon_s.size())),
                               cfg.noise_s, cfg.convention_s);
}

MmWaveScenario make_mm_scenario(const ScenarioConfig& cfg, const ChannelSet& ch, double power,
                                std::optional<double> noise)
{
    return MmWaveScenario::make(
        ch.cfg, ch.h_mm, cfg.targets_m,
        Eigen::Map<const VectorXd>(cfg.upsilon_m.data(), static_cast<Eigen::Index>(cfg.upsilon_m.size())),
        noise.value_or(cfg.noise_m), power, cfg.convention_m);
}

} // namespace dualband
