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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nfm/baselines.hpp"
#include "nfm/coarse_estimator.hpp"
#include "nfm/music.hpp"

namespace nfm {

enum class Method { dft_pc, dft_ce, music_pc, music_ce, ml, polar_cb };

inline constexpr std::array<Method, 6> kAllMethods{Method::dft_pc, Method::dft_ce, Method::music_pc,
                                                   Method::music_ce, Method::ml, Method::polar_cb};

/// "DFT-PC", "DFT-CE", "MUSIC-PC", "MUSIC-CE", "ML", "PolarCB".
std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

/// Comma-separated method names; throws ConfigError on unknown names or an
/// empty list.
std::vector<Method> parse_method_list(const std::string& list);

struct RadarLink {
    double transmit_power = 1.0;  // W
    double antenna_gain = 1.0;    // linear
    double rcs = 1.0;             // m^2
};

struct ExperimentConfig {
    ArrayConfig array;
    TargetState target{kPi / 12.0, 0.0, 10.0, 8.0};  // range 0 selects r_RD / 50
    std::optional<double> xi_override;  // echo power; otherwise from `link`
    std::optional<RadarLink> link;      // when neither is set xi = 1
    std::vector<double> snr_db{30.0};   // per-element SNR
    int iterations = 1000;
    std::uint64_t seed = 1;
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    double calib_max_phase = kPi / 36.0;  // rad
    double calib_max_amp_db = 1.0;
    int oversample_a = 4;
    int oversample_d = 4;
    int angle_points = 128;
    int range_points = 64;
    double range_min = 0.0;  // m; 0 selects r_RD / 200
    double range_max = 0.0;  // m; 0 selects r_RD / 10
    RefinementConfig refinement;
    GradientConfig gradient;
    int polar_points = 5000;
    std::filesystem::path table_cache;  // empty: build in memory

    /// Reference scenario: N = 256, f_c = 28 GHz, M = 32, f_r = 5 kHz,
    /// theta = pi/12, r = r_RD / 50, v_r = 10, v_theta = 8, 1000 iterations.
    static ExperimentConfig reference_defaults();

    TargetState resolved_target() const;
    std::vector<double> table_angle_grid() const;
    std::vector<double> table_range_grid() const;
    double xi() const;
    double processing_gain_db() const;
    void validate() const;
};

/// Shared, read-only state for trials: the coarse estimator with its tables
/// and the polar codebook.
class ExperimentContext {
public:
    explicit ExperimentContext(const ExperimentConfig& cfg);

    const ExperimentConfig& config() const { return cfg_; }
    const CoarseEstimator& coarse() const { return *coarse_; }
    const PolarCodebook& codebook() const;

private:
    ExperimentConfig cfg_;
    std::unique_ptr<CoarseEstimator> coarse_;
    std::unique_ptr<PolarCodebook> codebook_;
};

/// Loads the angle table from `cache` when it matches the array and grids,
/// otherwise builds it (and writes the cache when a path is given).
AngleRangeTable load_or_build_angle_table(const ArrayConfig& array, const std::vector<double>& angles,
                                          const std::vector<double>& ranges, int oversample_a, int oversample_d,
                                          const std::filesystem::path& cache);

struct MethodOutcome {
    Method method = Method::dft_pc;
    EstimationResult estimate;
    bool failed = false;
    std::string error;
};

struct TrialOutcome {
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    std::vector<MethodOutcome> methods;  // in ExperimentConfig::methods order
};

/// Seed for (snr index, iteration) from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t snr_index, std::size_t iteration);

/// Clean echoes for perfect and drawn calibration, sharing one noise draw.
struct TrialSnapshots {
    SpaceTimeSnapshot perfect;
    SpaceTimeSnapshot distorted;
    CalibrationProfile calibration;
};
TrialSnapshots synthesize_trial(const ExperimentConfig& cfg, double snr_db, std::uint64_t seed);

/// Runs every selected method: PC methods on `perfect`, CE methods on
/// `distorted`. `seed` drives the ML restarts. PolarCB searches velocity at
/// `known_location` when given, else at its own location pick. Failures are
/// recorded, never thrown.
std::vector<MethodOutcome> estimate_methods(const ExperimentContext& ctx, const SpaceTimeSnapshot& perfect,
                                            const SpaceTimeSnapshot& distorted, std::uint64_t seed,
                                            const std::optional<TargetState>& known_location = std::nullopt);

/// One synthesis feeding every selected method. Method failures are recorded,
/// never thrown.
TrialOutcome run_trial(const ExperimentContext& ctx, double snr_db, std::uint64_t seed);

struct NmseValue {
    double db = 0.0;
    bool mse_fallback = false;  // true values all zero: plain MSE in dB
};

/// 10 log10(sum |x - x_hat|^2 / sum |x|^2), floored at -200 dB. Throws
/// std::invalid_argument on empty or mismatched inputs.
NmseValue nmse(const std::vector<double>& truth, const std::vector<double>& estimate);

inline constexpr double kNmseFloorDb = -200.0;

struct NmseRow {
    std::string method;
    std::string parameter;  // theta, range, v_r, v_theta; "[mse]" suffix on fallback
    double snr_db_processed = 0.0;
    double snr_db_element = 0.0;
    double nmse_db = 0.0;
    int trials = 0;
    int failures = 0;
    bool empty = false;  // no successful trial
};

struct NMSEReport {
    std::vector<NmseRow> rows;
    std::string config_echo;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;

    const NmseRow* find(const std::string& method, const std::string& parameter, double snr_db_element) const;

    /// Config echo as '#' lines, then the header
    /// "method,parameter,snr_db_processed,snr_db_element,nmse_db,trials,failures".
    void write_csv(std::ostream& os) const;
    void write_csv(const std::filesystem::path& path) const;
};

/// SNR x iteration loop; trials run in parallel and are reduced in
/// (snr, iteration) order, so the report does not depend on scheduling.
NMSEReport run_sweep(const ExperimentContext& ctx);

/// Per-parameter errors of one outcome against the truth.
std::array<double, 4> parameter_errors(const EstimationResult& est, const TargetState& truth);

}  // namespace nfm
