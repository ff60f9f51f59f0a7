// SPDX-License-Identifier: Apache-2.0
//
// nfmotion - near-field motion parameter estimation for large linear arrays
// Copyright (C) 2026 The nfmotion Authors
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

#include "nfm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "nfm/config_file.hpp"
#include "nfm/errors.hpp"

namespace nfm {

namespace {

constexpr std::array<const char*, 4> kParameterNames{"theta", "range", "v_r", "v_theta"};

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent generator per (trial, purpose).
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose)
{
    return std::mt19937_64(splitmix64(seed ^ splitmix64(purpose + 0x5851f42d4c957f2dULL)));
}

enum Purpose : std::uint64_t { kNoise = 0, kCalibration = 1, kMethodBase = 16 };

std::array<double, 4> as_array(const TargetState& s) { return {s.theta, s.range, s.v_r, s.v_theta}; }

EstimationResult from_coarse(const CoarseEstimate& c, const char* method)
{
    EstimationResult r;
    r.theta = c.theta;
    r.range = c.range;
    r.v_r = c.v_r;
    r.v_theta = c.v_theta;
    r.method = method;
    return r;
}

}  // namespace

std::string method_name(Method m)
{
    switch (m) {
    case Method::dft_pc:
        return "DFT-PC";
    case Method::dft_ce:
        return "DFT-CE";
    case Method::music_pc:
        return "MUSIC-PC";
    case Method::music_ce:
        return "MUSIC-CE";
    case Method::ml:
        return "ML";
    case Method::polar_cb:
        return "PolarCB";
    }
    return "?";
}

std::optional<Method> parse_method(const std::string& name)
{
    for (Method m : kAllMethods)
        if (method_name(m) == name)
            return m;
    return std::nullopt;
}

std::vector<Method> parse_method_list(const std::string& list)
{
    std::vector<Method> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos)
            continue;
        item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
        const auto m = parse_method(item);
        if (!m)
            throw ConfigError("unknown method '" + item + "'");
        if (std::find(out.begin(), out.end(), *m) == out.end())
            out.push_back(*m);
    }
    if (out.empty())
        throw ConfigError("method list is empty");
    return out;
}

ExperimentConfig ExperimentConfig::reference_defaults()
{
    ExperimentConfig cfg;
    cfg.refinement = RefinementConfig::defaults(cfg.array);
    cfg.snr_db = {-30.0, -20.0, -10.0, 0.0};
    return cfg;
}

TargetState ExperimentConfig::resolved_target() const
{
    TargetState t = target;
    if (t.range == 0.0)
        t.range = array.rayleigh_distance() / 50.0;
    return t;
}

std::vector<double> ExperimentConfig::table_angle_grid() const
{
    return default_angle_grid(angle_points);
}

std::vector<double> ExperimentConfig::table_range_grid() const
{
    const double rd = array.rayleigh_distance();
    return inverse_range_grid(range_min > 0.0 ? range_min : rd / 200.0, range_max > 0.0 ? range_max : rd / 10.0,
                              range_points);
}

double ExperimentConfig::xi() const
{
    if (xi_override)
        return *xi_override;
    if (link)
        return target_snr(link->transmit_power, link->antenna_gain, array.wavelength(), link->rcs,
                          resolved_target().range);
    return 1.0;
}

double ExperimentConfig::processing_gain_db() const
{
    return 10.0 * std::log10(static_cast<double>(array.num_elements) * array.num_symbols);
}

void ExperimentConfig::validate() const
{
    try {
        array.validate();
        resolved_target().validate();
        refinement.validate();
        gradient.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (iterations < 1)
        throw ConfigError("iterations must be >= 1");
    if (snr_db.empty())
        throw ConfigError("SNR list is empty");
    if (methods.empty())
        throw ConfigError("method set is empty");
    if (oversample_a < 1 || oversample_d < 1)
        throw ConfigError("oversampling factors must be >= 1");
    if (angle_points < 2 || range_points < 2)
        throw ConfigError("table grids need at least 2 points per axis");
    if (range_min < 0.0 || range_max < 0.0)
        throw ConfigError("table range bounds must be positive");
    try {
        table_range_grid();
    } catch (const std::invalid_argument&) {
        throw ConfigError("table range bounds must satisfy range_min < range_max");
    }
    if (polar_points < 4)
        throw ConfigError("polar codebook needs at least 4 points");
    if (calib_max_phase < 0.0 || calib_max_amp_db < 0.0)
        throw ConfigError("calibration bounds must be non-negative");
    if (xi_override && !(*xi_override > 0.0))
        throw ConfigError("xi must be positive");
}

AngleRangeTable load_or_build_angle_table(const ArrayConfig& array, const std::vector<double>& angles,
                                          const std::vector<double>& ranges, int oversample_a, int oversample_d,
                                          const std::filesystem::path& cache)
{
    if (!cache.empty() && std::filesystem::exists(cache)) {
        AngleRangeTable t = load_angle_table(cache);
        if (t.fingerprint == array.fingerprint() && t.oversample_a == oversample_a &&
            t.oversample_d == oversample_d && t.angle_grid == angles && t.range_grid == ranges)
            return t;
    }
    AngleRangeTable t = build_angle_table(array, angles, ranges, oversample_a, oversample_d);
    if (!cache.empty()) {
        if (cache.has_parent_path())
            std::filesystem::create_directories(cache.parent_path());
        save_table(t, cache);
    }
    return t;
}

ExperimentContext::ExperimentContext(const ExperimentConfig& cfg) : cfg_(cfg)
{
    cfg_.validate();
    coarse_ = std::make_unique<CoarseEstimator>(
        cfg_.array, load_or_build_angle_table(cfg_.array, cfg_.table_angle_grid(), cfg_.table_range_grid(),
                                              cfg_.oversample_a, cfg_.oversample_d, cfg_.table_cache));
    if (std::find(cfg_.methods.begin(), cfg_.methods.end(), Method::polar_cb) != cfg_.methods.end())
        codebook_ = std::make_unique<PolarCodebook>(build_polar_codebook(cfg_.array, cfg_.polar_points));
}

const PolarCodebook& ExperimentContext::codebook() const
{
    if (!codebook_)
        throw ConfigError("polar codebook not built: PolarCB is not among the selected methods");
    return *codebook_;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t snr_index, std::size_t iteration)
{
    return splitmix64(splitmix64(splitmix64(master) ^ snr_index) ^ (iteration + 0x632be59bd9b4e019ULL));
}

TrialSnapshots synthesize_trial(const ExperimentConfig& cfg, double snr_db, std::uint64_t seed)
{
    const TargetState target = cfg.resolved_target();
    const double xi = cfg.xi();
    const int N = cfg.array.num_elements;

    std::mt19937_64 noise_rng = stream(seed, kNoise);
    std::mt19937_64 calib_rng = stream(seed, kCalibration);

    TrialSnapshots out;
    out.calibration = sample_calibration(calib_rng, cfg.calib_max_phase, cfg.calib_max_amp_db, N);
    out.perfect = clean_signal(cfg.array, target, CalibrationProfile::identity(N), xi);
    out.distorted = clean_signal(cfg.array, target, out.calibration, xi);

    SpaceTimeSnapshot zero{CMatrix::Zero(N, cfg.array.num_symbols), cfg.array};
    const SpaceTimeSnapshot noise = add_noise(zero, {snr_to_sigma2(xi / N, snr_db)}, noise_rng);
    out.perfect.data += noise.data;
    out.distorted.data += noise.data;
    return out;
}

std::vector<MethodOutcome> estimate_methods(const ExperimentContext& ctx, const SpaceTimeSnapshot& perfect,
                                            const SpaceTimeSnapshot& distorted, std::uint64_t seed,
                                            const std::optional<TargetState>& known_location)
{
    const ExperimentConfig& cfg = ctx.config();

    std::optional<CoarseEstimate> coarse_pc, coarse_ce;
    auto coarse_for = [&](bool ce) -> const CoarseEstimate& {
        auto& slot = ce ? coarse_ce : coarse_pc;
        if (!slot)
            slot = ctx.coarse().estimate(ce ? distorted : perfect);
        return *slot;
    };

    std::vector<MethodOutcome> out;
    for (Method m : cfg.methods) {
        MethodOutcome mo;
        mo.method = m;
        try {
            switch (m) {
            case Method::dft_pc:
            case Method::dft_ce:
                mo.estimate = from_coarse(coarse_for(m == Method::dft_ce), method_name(m).c_str());
                break;
            case Method::music_pc:
            case Method::music_ce: {
                const bool ce = m == Method::music_ce;
                mo.estimate = refine_all(ce ? distorted : perfect, coarse_for(ce), cfg.refinement);
                mo.estimate.method = method_name(m);
                if (mo.estimate.degenerate_spectrum) {
                    mo.failed = true;
                    mo.error = mo.estimate.diagnostics;
                }
                break;
            }
            case Method::ml: {
                std::mt19937_64 rng = stream(seed, kMethodBase + static_cast<std::uint64_t>(m));
                mo.estimate = ml_gradient_descent(perfect, std::nullopt, cfg.xi(), cfg.gradient,
                                                  SearchBounds::defaults(cfg.array), rng)
                                  .estimate;
                break;
            }
            case Method::polar_cb: {
                const CodebookPick loc = polar_locate(perfect, ctx.codebook());
                // The velocity codebook searches at a known location when one
                // is given, else at the located grid point.
                const double theta = known_location ? known_location->theta : loc.first;
                const double range = known_location ? known_location->range : loc.second;
                const CodebookPick vel = velocity_codebook_search(perfect, theta, range, velocity_codebook_vr_grid(),
                                                                  velocity_codebook_vtheta_grid(), cfg.xi());
                mo.estimate.theta = loc.first;
                mo.estimate.range = loc.second;
                mo.estimate.v_r = vel.first;
                mo.estimate.v_theta = vel.second;
                mo.estimate.method = method_name(m);
                break;
            }
            }
        } catch (const EstimationFailed& e) {
            mo.failed = true;
            mo.error = std::string(e.what()) + " [" + e.diagnostics() + "]";
        } catch (const DegenerateInputError& e) {
            mo.failed = true;
            mo.error = e.what();
        }
        out.push_back(std::move(mo));
    }
    return out;
}

TrialOutcome run_trial(const ExperimentContext& ctx, double snr_db, std::uint64_t seed)
{
    const TrialSnapshots snaps = synthesize_trial(ctx.config(), snr_db, seed);
    TrialOutcome out;
    out.seed = seed;
    out.snr_db = snr_db;
    out.methods = estimate_methods(ctx, snaps.perfect, snaps.distorted, seed, ctx.config().resolved_target());
    return out;
}

NmseValue nmse(const std::vector<double>& truth, const std::vector<double>& estimate)
{
    if (truth.empty() || truth.size() != estimate.size())
        throw std::invalid_argument("nmse: inputs must be non-empty and of equal length");
    double se = 0.0, sx = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        se += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
        sx += truth[i] * truth[i];
    }
    NmseValue v;
    v.mse_fallback = sx == 0.0;
    const double ratio = v.mse_fallback ? se / static_cast<double>(truth.size()) : se / sx;
    v.db = ratio > 0.0 ? std::max(kNmseFloorDb, 10.0 * std::log10(ratio)) : kNmseFloorDb;
    if (!std::isfinite(v.db))
        v.db = v.db > 0.0 ? -kNmseFloorDb : kNmseFloorDb;
    return v;
}

std::array<double, 4> parameter_errors(const EstimationResult& est, const TargetState& truth)
{
    return {est.theta - truth.theta, est.range - truth.range, est.v_r - truth.v_r, est.v_theta - truth.v_theta};
}

const NmseRow* NMSEReport::find(const std::string& method, const std::string& parameter, double snr_db_element) const
{
    for (const auto& r : rows)
        if (r.method == method && (r.parameter == parameter || r.parameter == parameter + "[mse]") &&
            std::abs(r.snr_db_element - snr_db_element) < 1e-9)
            return &r;
    return nullptr;
}

void NMSEReport::write_csv(std::ostream& os) const
{
    std::istringstream echo(config_echo);
    for (std::string line; std::getline(echo, line);)
        os << "# " << line << '\n';
    os << "# seed = " << seed << '\n';
    os << "method,parameter,snr_db_processed,snr_db_element,nmse_db,trials,failures\n";
    os << std::fixed;
    for (const auto& r : rows) {
        os << r.method << ',' << r.parameter << ',' << std::setprecision(4) << r.snr_db_processed << ','
           << r.snr_db_element << ',';
        if (!r.empty)
            os << std::setprecision(6) << r.nmse_db;
        os << ',' << r.trials << ',' << r.failures << '\n';
    }
}

void NMSEReport::write_csv(const std::filesystem::path& path) const
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_csv(os);
}

NMSEReport run_sweep(const ExperimentContext& ctx)
{
    const ExperimentConfig& cfg = ctx.config();
    const auto t0 = std::chrono::steady_clock::now();
    const int S = static_cast<int>(cfg.snr_db.size());
    const int I = cfg.iterations;
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(S) * I);

#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < S * I; ++idx) {
        const int s = idx / I;
        const int it = idx % I;
        outcomes[idx] = run_trial(ctx, cfg.snr_db[s], trial_seed(cfg.seed, s, it));
    }

    const TargetState truth = cfg.resolved_target();
    const std::array<double, 4> truth_v = as_array(truth);
    NMSEReport report;
    report.seed = cfg.seed;
    report.config_echo = describe_config(cfg);
    for (int s = 0; s < S; ++s)
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            std::array<std::vector<double>, 4> t, e;
            int failures = 0;
            for (int it = 0; it < I; ++it) {
                const MethodOutcome& mo = outcomes[static_cast<std::size_t>(s) * I + it].methods[mi];
                if (mo.failed) {
                    ++failures;
                    continue;
                }
                const std::array<double, 4> est = as_array(
                    TargetState{mo.estimate.theta, mo.estimate.range, mo.estimate.v_r, mo.estimate.v_theta});
                for (int k = 0; k < 4; ++k) {
                    t[k].push_back(truth_v[k]);
                    e[k].push_back(est[k]);
                }
            }
            for (int k = 0; k < 4; ++k) {
                NmseRow row;
                row.method = method_name(cfg.methods[mi]);
                row.parameter = kParameterNames[k];
                row.snr_db_element = cfg.snr_db[s];
                row.snr_db_processed = cfg.snr_db[s] + cfg.processing_gain_db();
                row.trials = I;
                row.failures = failures;
                row.empty = t[k].empty();
                if (truth_v[k] == 0.0)
                    row.parameter += "[mse]";
                if (!row.empty)
                    row.nmse_db = nmse(t[k], e[k]).db;
                report.rows.push_back(row);
            }
        }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace nfm
