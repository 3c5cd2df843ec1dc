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

#include "dualband/channel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dualband/rng.hpp"

namespace dualband {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReconstructionTol = 1e-12;

VectorXcd phase_ramp(int n, double step)
{
    if (n < 1)
        throw std::invalid_argument("steering vector length must be >= 1");
    VectorXcd v(n);
    for (int i = 0; i < n; ++i)
        v(i) = std::polar(1.0, kPi * i * step);
    return v;
}

// vec of the outer product rows x cols, column-major.
VectorXcd grid_outer(const VectorXcd& rows, const VectorXcd& cols)
{
    VectorXcd v(rows.size() * cols.size());
    for (Eigen::Index n = 0; n < cols.size(); ++n)
        v.segment(n * rows.size(), rows.size()) = rows * cols(n);
    return v;
}

nlohmann::json matrix_to_json(const MatrixXcd& m)
{
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(2 * m.size()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            data.push_back(m(r, c).real());
            data.push_back(m(r, c).imag());
        }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXcd matrix_from_json(const nlohmann::json& j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols)
        throw std::runtime_error("channel file: matrix payload has wrong length");
    MatrixXcd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r, k += 2)
            m(r, c) = {data[k], data[k + 1]};
    return m;
}

nlohmann::json paths_to_json(const std::vector<std::vector<PathParams>>& paths)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& user : paths) {
        nlohmann::json u = nlohmann::json::array();
        for (const auto& p : user)
            u.push_back({{"re", p.gain.real()}, {"im", p.gain.imag()}, {"el", p.el}, {"az", p.az}});
        out.push_back(u);
    }
    return out;
}

std::vector<std::vector<PathParams>> paths_from_json(const nlohmann::json& j)
{
    std::vector<std::vector<PathParams>> out;
    for (const auto& u : j) {
        std::vector<PathParams> user;
        for (const auto& p : u)
            user.push_back({{p.at("re").get<double>(), p.at("im").get<double>()}, p.at("el").get<double>(),
                            p.at("az").get<double>()});
        out.push_back(std::move(user));
    }
    return out;
}

std::vector<PathParams> draw_paths(Rng& rng, int count, const ChannelPriors& pr)
{
    std::vector<PathParams> paths(static_cast<std::size_t>(count));
    for (auto& p : paths) {
        p.gain = rng.complex_normal(pr.gain_variance);
        p.el = rng.uniform(pr.angle_lo, pr.angle_hi);
        p.az = rng.uniform(pr.angle_lo, pr.angle_hi);
    }
    return paths;
}

double relative_gap(const MatrixXcd& stored, const MatrixXcd& rebuilt)
{
    const double scale = std::max(1.0, rebuilt.norm());
    return (stored - rebuilt).norm() / scale;
}

} // namespace

VectorXcd steering_gamma(int n, double angle, double lambda_ratio)
{
    return phase_ramp(n, lambda_ratio * angle);
}

VectorXcd steering_alpha(int n, double angle)
{
    return phase_ramp(n, angle);
}

VectorXcd steering_beta(const ArrayConfig& cfg, double el, double az)
{
    return grid_outer(steering_gamma(cfg.grid_rows(), el, cfg.lambda_ratio),
                      steering_gamma(cfg.grid_cols(), az, cfg.lambda_ratio));
}

VectorXcd steering_mm(const ArrayConfig& cfg, double el, double az)
{
    return grid_outer(steering_alpha(cfg.n_row, el), steering_alpha(cfg.n_col, az));
}

MatrixXcd steering_beta_matrix(const ArrayConfig& cfg, const std::vector<Direction>& dirs)
{
    MatrixXcd out(cfg.n_p(), static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t t = 0; t < dirs.size(); ++t)
        out.col(static_cast<Eigen::Index>(t)) = steering_beta(cfg, dirs[t].el, dirs[t].az);
    return out;
}

MatrixXcd steering_mm_matrix(const ArrayConfig& cfg, const std::vector<Direction>& dirs)
{
    MatrixXcd out(cfg.n_m(), static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t t = 0; t < dirs.size(); ++t)
        out.col(static_cast<Eigen::Index>(t)) = steering_mm(cfg, dirs[t].el, dirs[t].az);
    return out;
}

VectorXcd synthesize_sub(const ArrayConfig& cfg, const std::vector<PathParams>& paths)
{
    VectorXcd h = VectorXcd::Zero(cfg.n_p());
    for (const auto& p : paths)
        h += p.gain * steering_beta(cfg, p.el, p.az);
    return paths.empty() ? h : VectorXcd(h / std::sqrt(static_cast<double>(paths.size())));
}

VectorXcd synthesize_mm(const ArrayConfig& cfg, const std::vector<PathParams>& paths)
{
    VectorXcd h = VectorXcd::Zero(cfg.n_m());
    for (const auto& p : paths)
        h += p.gain * steering_mm(cfg, p.el, p.az);
    return paths.empty() ? h : VectorXcd(h / std::sqrt(static_cast<double>(paths.size())));
}

ChannelSet gen_channels(const ArrayConfig& cfg, int k_s, int k_m, int l_s, int l_m, std::uint64_t seed,
                        const ChannelPriors& priors)
{
    cfg.validate();
    if (k_s < 1 || k_m < 1 || l_s < 1 || l_m < 1)
        throw std::invalid_argument("gen_channels: user and path counts must be >= 1");
    Rng rng(seed);
    ChannelSet ch;
    ch.cfg = cfg;
    ch.seed = seed;
    ch.priors = priors;
    for (int k = 0; k < k_s; ++k)
        ch.paths_sub.push_back(draw_paths(rng, l_s, priors));
    for (int k = 0; k < k_m; ++k)
        ch.paths_mm.push_back(draw_paths(rng, l_m, priors));
    ch.h_sub.resize(cfg.n_p(), k_s);
    ch.h_mm.resize(cfg.n_m(), k_m);
    for (int k = 0; k < k_s; ++k)
        ch.h_sub.col(k) = synthesize_sub(cfg, ch.paths_sub[static_cast<std::size_t>(k)]);
    for (int k = 0; k < k_m; ++k)
        ch.h_mm.col(k) = synthesize_mm(cfg, ch.paths_mm[static_cast<std::size_t>(k)]);
    return ch;
}

double reconstruction_error(const ChannelSet& ch)
{
    MatrixXcd sub(ch.h_sub.rows(), static_cast<Eigen::Index>(ch.paths_sub.size()));
    MatrixXcd mm(ch.h_mm.rows(), static_cast<Eigen::Index>(ch.paths_mm.size()));
    if (sub.cols() != ch.h_sub.cols() || mm.cols() != ch.h_mm.cols() || sub.rows() != ch.cfg.n_p() ||
        mm.rows() != ch.cfg.n_m())
        return std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < sub.cols(); ++k)
        sub.col(k) = synthesize_sub(ch.cfg, ch.paths_sub[static_cast<std::size_t>(k)]);
    for (Eigen::Index k = 0; k < mm.cols(); ++k)
        mm.col(k) = synthesize_mm(ch.cfg, ch.paths_mm[static_cast<std::size_t>(k)]);
    return std::max(relative_gap(ch.h_sub, sub), relative_gap(ch.h_mm, mm));
}

nlohmann::json channel_to_json(const ChannelSet& ch)
{
    nlohmann::json header = {
        {"format", "dualband-channels"},
        {"version", 1},
        {"n_row", ch.cfg.n_row},
        {"n_col", ch.cfg.n_col},
        {"lambda_ratio", ch.cfg.lambda_ratio},
        {"k_s", ch.k_s()},
        {"k_m", ch.k_m()},
        {"seed", ch.seed},
        {"gain_distribution", {{"law", "complex_normal"}, {"variance", ch.priors.gain_variance}}},
        {"angle_distribution", {{"law", "uniform"}, {"lo", ch.priors.angle_lo}, {"hi", ch.priors.angle_hi}}},
    };
    return {{"header", header},
            {"paths_sub", paths_to_json(ch.paths_sub)},
            {"paths_mm", paths_to_json(ch.paths_mm)},
            {"h_sub", matrix_to_json(ch.h_sub)},
            {"h_mm", matrix_to_json(ch.h_mm)}};
}

ChannelSet channel_from_json(const nlohmann::json& j)
{
    const auto& hd = j.at("header");
    if (hd.at("format").get<std::string>() != "dualband-channels")
        throw std::runtime_error("channel file: unrecognised format tag");
    ChannelSet ch;
    ch.cfg.n_row = hd.at("n_row").get<int>();
    ch.cfg.n_col = hd.at("n_col").get<int>();
    ch.cfg.lambda_ratio = hd.at("lambda_ratio").get<double>();
    ch.cfg.n_s = 1;
    ch.seed = hd.at("seed").get<std::uint64_t>();
    ch.priors.gain_variance = hd.at("gain_distribution").at("variance").get<double>();
    ch.priors.angle_lo = hd.at("angle_distribution").at("lo").get<double>();
    ch.priors.angle_hi = hd.at("angle_distribution").at("hi").get<double>();
    ch.paths_sub = paths_from_json(j.at("paths_sub"));
    ch.paths_mm = paths_from_json(j.at("paths_mm"));
    ch.h_sub = matrix_from_json(j.at("h_sub"));
    ch.h_mm = matrix_from_json(j.at("h_mm"));
    const double err = reconstruction_error(ch);
    if (!(err <= kReconstructionTol))
        throw std::runtime_error("channel file: stored matrices do not match their path records (relative error " +
                                 std::to_string(err) + ")");
    return ch;
}

void save_channels(const ChannelSet& ch, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << channel_to_json(ch).dump() << '\n';
}

ChannelSet load_channels(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    return channel_from_json(nlohmann::json::parse(in));
}

} // namespace dualband
