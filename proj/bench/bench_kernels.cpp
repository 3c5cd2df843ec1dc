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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "dualband/experiment.hpp"
#include "dualband/fsjbas.hpp"
#include "dualband/mmwave.hpp"
#include "dualband/scenario.hpp"

using namespace dualband;

namespace {

MatrixXcd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = {nd(gen), nd(gen)};
    return m;
}

// Rows of F_m = N_m; columns of F_bb = K_m.
constexpr int kRows = 196;
constexpr int kUsers = 4;

template <auto Kernel>
void bm_fp_s(benchmark::State& st)
{
    const int n_rf = static_cast<int>(st.range(0));
    const MatrixXcd fk = random_matrix(kRows, kUsers, 1);
    const MatrixXcd fbb = random_matrix(n_rf, kUsers, 2);
    VectorXcd fp = VectorXcd::Ones(kRows);
    MatrixXi s = MatrixXi::Zero(kRows, n_rf);
    for (auto _ : st) {
        Kernel(fk, fbb, PatternSet::All, fp, s);
        benchmark::DoNotOptimize(fp.data());
    }
}

template <auto Kernel>
void bm_fchb(benchmark::State& st)
{
    const int n_rf = static_cast<int>(st.range(0));
    const MatrixXcd fk = random_matrix(kRows, kUsers, 3);
    const MatrixXcd fbb = random_matrix(n_rf, kUsers, 4);
    MatrixXcd frf = random_matrix(kRows, n_rf, 5).cwiseQuotient(random_matrix(kRows, n_rf, 5).cwiseAbs().cast<cx>());
    for (auto _ : st) {
        Kernel(fk, fbb, frf);
        benchmark::DoNotOptimize(frf.data());
    }
}

struct SelectionBatch {
    Sub6gScenario scen;
    std::vector<SelectionState> sels;
    Sub6gOptions opts;
};

const SelectionBatch& batch()
{
    static const SelectionBatch b = [] {
        const ScenarioConfig cfg = load_config(std::string(DUALBAND_CONFIG_DIR) + "/fig8.json");
        const ChannelSet ch = gen_channels(cfg.array, cfg.k_s, cfg.k_m, cfg.l_s, cfg.l_m, 11, cfg.priors);
        SelectionBatch out{make_sub6g_scenario(cfg, ch), {}, cfg.sub};
        const Sub6gDesign init = abas(out.scen, cfg.sub).design;
        // One FS-JBAS iteration's worth of candidates for the first antenna.
        for (const GridPos& g : candidate_set(init.selection, 1, cfg.array)) {
            std::vector<int> x = init.selection.x_idx, y = init.selection.y_idx;
            x[0] = g.row;
            y[0] = g.col;
            out.sels.push_back(indices_to_selection(x, y, cfg.array));
            if (out.sels.size() == 16) break;
        }
        return out;
    }();
    return b;
}

template <auto Kernel>
void bm_selections(benchmark::State& st)
{
    const SelectionBatch& b = batch();
    for (auto _ : st) benchmark::DoNotOptimize(Kernel(b.scen, b.sels, b.opts));
    st.counters["selections"] = static_cast<double>(b.sels.size());
}

} // namespace

BENCHMARK(bm_fp_s<fp_s_rows_serial>)->Name("fp_s_rows/serial")->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_fp_s<fp_s_rows_omp>)->Name("fp_s_rows/omp")->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_fchb<fchb_rows_serial>)->Name("fchb_rows/serial")->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_fchb<fchb_rows_omp>)->Name("fchb_rows/omp")->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_selections<evaluate_selections_serial>)->Name("evaluate_selections/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_selections<evaluate_selections_omp>)->Name("evaluate_selections/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
