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

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "dualband/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInfeasible = 2;
constexpr int kConfigError = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
    std::string figure;
};

std::filesystem::path output_dir(const Options& o, const dualband::ScenarioConfig* cfg)
{
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("DUALBAND_OUT"); env && *env) return env;
    return cfg ? cfg->output_dir : "out";
}

dualband::ScenarioConfig load(const Options& o)
{
    if (o.config.empty()) throw dualband::ConfigError("--config is required");
    auto cfg = dualband::load_config(o.config);
    const int threads = o.threads > 0 ? o.threads : cfg.threads;
    if (threads > 0) omp_set_num_threads(threads);
    return cfg;
}

int cmd_run(const Options& o)
{
    const auto cfg = load(o);
    const std::vector<std::uint64_t> seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : cfg.seeds;
    const auto out = output_dir(o, &cfg);
    const auto res = dualband::run_and_write(cfg, seeds, out);
    std::cout << "wrote " << res.files.size() << " files to " << out.string() << "\n";
    if (res.invalid > 0) {
        std::cerr << res.invalid << " design(s) failed re-validation\n";
        return kFailure;
    }
    if (res.infeasible > 0) {
        std::cerr << res.infeasible << " seed(s) infeasible, see run.csv\n";
        return kInfeasible;
    }
    return kOk;
}

int cmd_figure(const Options& o)
{
    if (o.figure.empty()) throw dualband::ConfigError("--figure is required");
    auto cfg = load(o);
    if (o.seed) cfg.seeds = {*o.seed};
    const auto fig = dualband::run_figure(cfg, o.figure);
    const auto out = output_dir(o, &cfg);
    const auto files = dualband::write_figure(cfg, fig, out);
    std::cout << "wrote " << files.size() << " curve files to " << out.string() << "\n";
    if (fig.invalid > 0)
        std::cerr << fig.invalid << " design(s) failed re-validation and were excluded (see the 'invalid' rows)\n";
    return kOk;
}

int cmd_validate(const Options& o)
{
    const auto dir = output_dir(o, nullptr);
    const auto rep = dualband::validate_results(dir);
    for (const auto& p : rep.problems) std::cerr << p << "\n";
    std::cout << (rep.ok() ? "ok" : "FAILED") << ": " << rep.checked << " design(s) re-checked in " << dir.string()
              << "\n";
    return rep.ok() ? kOk : kFailure;
}

int cmd_dump_channel(const Options& o)
{
    const auto cfg = load(o);
    const std::uint64_t seed = o.seed.value_or(cfg.seeds.front());
    const auto ch = dualband::gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, seed, cfg.priors);
    const auto out = output_dir(o, &cfg);
    std::filesystem::create_directories(out);
    const auto path = out / ("channels_seed" + std::to_string(seed) + ".json");
    dualband::save_channels(ch, path);
    std::cout << "wrote " << path.string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dual-band ISAC beamforming and antenna selection experiments"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", o.config, "Scenario config (JSON)");
        if (needs_config) c->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Run only this seed");
        sub->add_option("--out", o.out, "Output directory (default: $DUALBAND_OUT, then run.output_dir)");
        sub->add_option("--threads", o.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
    };

    auto* run = app.add_subcommand("run", "Dual-band pipeline for each seed");
    add_common(run, true);
    auto* figure = app.add_subcommand("figure", "Named parameter sweep");
    add_common(figure, true);
    figure->add_option("--figure", o.figure, "fig6 | fig7 | fig8 | fig9 | fig10 | tradeoff");
    auto* validate = app.add_subcommand("validate", "Re-check a result directory");
    validate->add_option("--out,dir", o.out, "Result directory");
    auto* dump = app.add_subcommand("dump-channel", "Write the seeded channel realisation");
    add_common(dump, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(o);
        if (*figure) return cmd_figure(o);
        if (*validate) return cmd_validate(o);
        return cmd_dump_channel(o);
    } catch (const dualband::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const dualband::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
