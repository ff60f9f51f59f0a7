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

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "nfm/lookup_tables.hpp"
#include "nfm/music.hpp"
#include "nfm/signal_synth.hpp"

namespace nfm {

/// Box constraints for the ML search and its random initialization.
struct SearchBounds {
    double theta_lo = -1.2532358975033755;  // asin(-0.95)
    double theta_hi = 1.2532358975033755;
    double range_lo = 0.0;
    double range_hi = 0.0;
    double vr_lo = -15.0;
    double vr_hi = 15.0;
    double vtheta_lo = -16.0;
    double vtheta_hi = 16.0;

    /// Range from r_RD/200 to r_RD.
    static SearchBounds defaults(const ArrayConfig& cfg);
    TargetState clamp(const TargetState& s) const;
    TargetState sample(std::mt19937_64& rng) const;
};

struct GradientConfig {
    int max_iters = 200;
    double initial_step = 0.05;   // in units of the bound widths
    double step_growth = 2.0;     // applied after an accepted step
    int max_halvings = 20;
    int restarts = 4;
    double h_theta = 1e-4;        // central-difference steps
    double h_range = 1e-2;
    double h_velocity = 1e-2;
    double tolerance = 1e-12;     // relative objective decrease that counts as progress

    void validate() const;
};

/// ||Y - X(theta, r, v_r, v_theta)||_F^2 with X synthesized as clean_signal
/// does (unit pilots) under `calib`.
double ml_objective(const SpaceTimeSnapshot& snapshot, const TargetState& params, double xi_t,
                    const CalibrationProfile& calib);
double ml_objective(const SpaceTimeSnapshot& snapshot, const TargetState& params, double xi_t);

struct GradientResult {
    EstimationResult estimate;
    double objective = 0.0;
    int iterations = 0;  // accepted steps of the winning restart
    std::vector<double> history;  // objective after each accepted step of the winning restart
};

/// Projected gradient descent with central-difference gradients and a
/// backtracking line search. The first restart starts from `init` when given;
/// the others (or all, without `init`) start uniformly inside `bounds`.
/// The best restart by final objective wins. Throws EstimationFailed when every
/// restart diverges.
GradientResult ml_gradient_descent(const SpaceTimeSnapshot& snapshot, const std::optional<TargetState>& init,
                                   double xi_t, const GradientConfig& gcfg, const SearchBounds& bounds,
                                   std::mt19937_64& rng);

/// Location grid uniform in sin(theta) over [-0.95, 0.95] and in 1/r from
/// r_RD/200 to r_RD, angle-major, with unit-norm steering columns.
struct PolarCodebook {
    std::vector<double> theta;  // per entry
    std::vector<double> range;
    CMatrix steering;           // N x entries
    int angle_points = 0;
    int range_points = 0;
    std::uint64_t fingerprint = 0;

    std::size_t size() const { return theta.size(); }
};

/// angle_points = ceil(sqrt(G)), range_points = round(G / angle_points).
/// Throws std::invalid_argument for G < 4.
PolarCodebook build_polar_codebook(const ArrayConfig& cfg, int total_points = 5000);

struct CodebookPick {
    double first = 0.0;   // theta (location) or v_r (velocity)
    double second = 0.0;  // r or v_theta
    double score = 0.0;
    std::size_t index = 0;
};

/// Entry maximizing sum_m |a^H y_m|^2; the first entry wins ties.
/// Throws ConfigError when the codebook belongs to another array.
CodebookPick polar_locate(const SpaceTimeSnapshot& snapshot, const PolarCodebook& codebook);

/// Entry-by-entry evaluation, single-threaded.
CodebookPick polar_locate_reference(const SpaceTimeSnapshot& snapshot, const PolarCodebook& codebook);

/// Grids used by the velocity codebook: v_r over [-15, 15], v_theta over
/// [-16, 16], both in 0.25 m/s steps.
std::vector<double> velocity_codebook_vr_grid();
std::vector<double> velocity_codebook_vtheta_grid();

/// Maximizes |<vec V(theta, r, v_r, v_theta), vec Y>|^2 over the grid at a
/// known location; v_r-major order, first entry wins ties.
CodebookPick velocity_codebook_search(const SpaceTimeSnapshot& snapshot, double theta, double range,
                                      const std::vector<double>& vr_grid, const std::vector<double>& vtheta_grid,
                                      double xi_t);

CodebookPick velocity_codebook_search_reference(const SpaceTimeSnapshot& snapshot, double theta, double range,
                                                const std::vector<double>& vr_grid,
                                                const std::vector<double>& vtheta_grid, double xi_t);

}  // namespace nfm
