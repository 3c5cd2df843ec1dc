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
#include <string>
#include <vector>

#include <json.hpp>

#include "dualband/csv.hpp"
#include "dualband/scenario.hpp"

namespace dualband {

// P_s consumed the whole budget; the mmWave stage is not run.
class BudgetExhausted : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

struct DualBandResult {
    std::uint64_t seed = 0;
    ChannelSet channels;
    Sub6gDesign sub;
    FsjbasResult sub_search; // empty trace unless the FS-JBAS pipeline ran
    double p_s = 0.0;
    double p_m = 0.0;
    MmResult mm;

    double sumrate = 0.0;
    double min_gain_s = 0.0; // l2-norm gains
    double min_gain_m = 0.0;
    double worst_sinr_ratio = 0.0;
    bool sub_valid = false;
    bool mm_valid = false;
    double wall_seconds = 0.0;
};

// Sub-6G stage, power split, then the mmWave stage. Throws InfeasibleError
// when the sub-6G problem has no solution and BudgetExhausted when P_s >= P_t.
DualBandResult run_dual_band(const ScenarioConfig& cfg, std::uint64_t seed);

nlohmann::json design_to_json(const DualBandResult& r);

struct RunOutcome {
    std::vector<std::string> files; // relative to the output directory
    int infeasible = 0;
    int invalid = 0;
};

// Runs every seed (concurrently) and writes run.csv, per-seed traces and
// designs, config.json and manifest.json to `out`.
RunOutcome run_and_write(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                         const std::filesystem::path& out);

// One CSV per curve; each row is (sweep value, structure, statistic, value).
struct FigureCurve {
    std::string name; // file stem
    CsvTable table;
};

struct FigureOutput {
    std::string id;
    std::vector<FigureCurve> curves;
    int invalid = 0; // records rejected by re-validation, excluded from the statistics
};

const std::vector<std::string>& figure_ids();

// Throws ConfigError on an unknown id or a config that does not fit the figure.
FigureOutput run_figure(const ScenarioConfig& cfg, const std::string& id);
std::vector<std::string> write_figure(const ScenarioConfig& cfg, const FigureOutput& fig,
                                      const std::filesystem::path& out);

// Seed-level statistics rows appended to a curve table.
void add_statistics(CsvTable& table, const std::string& sweep, const std::string& structure,
                    const std::vector<double>& values, int failed, int invalid = 0);

// Manifest and file digests.
std::string file_digest(const std::filesystem::path& path); // FNV-1a, 16 hex digits
nlohmann::json make_manifest(const ScenarioConfig& cfg, const std::string& command, const std::string& figure,
                             const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& files,
                             const std::filesystem::path& out);

struct ValidationReport {
    int checked = 0;
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

// Re-checks a result directory: file digests against the manifest and, for
// `run` outputs, every stored design against regenerated channels.
ValidationReport validate_results(const std::filesystem::path& dir);

} // namespace dualband
