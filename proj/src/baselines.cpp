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

#include "nfm/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nfm/errors.hpp"

namespace nfm {

namespace {

using Params = std::array<double, 4>;

Params to_params(const TargetState& s) { return {s.theta, s.range, s.v_r, s.v_theta}; }
TargetState to_state(const Params& p) { return {p[0], p[1], p[2], p[3]}; }

void check_codebook(const SpaceTimeSnapshot& snapshot, const PolarCodebook& codebook)
{
    if (codebook.size() == 0)
        throw std::invalid_argument("polar_locate: empty codebook");
    if (snapshot.scenario.fingerprint() != codebook.fingerprint)
        throw ConfigError("polar codebook was built for a different array configuration");
}

void check_velocity_grids(const std::vector<double>& vr_grid, const std::vector<double>& vtheta_grid)
{
    if (vr_grid.empty() || vtheta_grid.empty())
        throw std::invalid_argument("velocity_codebook_search: empty grid");
}

}  // namespace

SearchBounds SearchBounds::defaults(const ArrayConfig& cfg)
{
    SearchBounds b;
    b.range_lo = cfg.rayleigh_distance() / 200.0;
    b.range_hi = cfg.rayleigh_distance();
    return b;
}

TargetState SearchBounds::clamp(const TargetState& s) const
{
    return {std::clamp(s.theta, theta_lo, theta_hi), std::clamp(s.range, range_lo, range_hi),
            std::clamp(s.v_r, vr_lo, vr_hi), std::clamp(s.v_theta, vtheta_lo, vtheta_hi)};
}

TargetState SearchBounds::sample(std::mt19937_64& rng) const
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double t = theta_lo + (theta_hi - theta_lo) * unit(rng);
    const double r = range_lo + (range_hi - range_lo) * unit(rng);
    const double vr = vr_lo + (vr_hi - vr_lo) * unit(rng);
    const double vt = vtheta_lo + (vtheta_hi - vtheta_lo) * unit(rng);
    return {t, r, vr, vt};
}

void GradientConfig::validate() const
{
    if (max_iters < 1 || restarts < 1 || max_halvings < 0)
        throw std::invalid_argument("GradientConfig: max_iters and restarts must be >= 1");
    if (!(initial_step > 0.0) || !(step_growth >= 1.0) || !(h_theta > 0.0) || !(h_range > 0.0) ||
        !(h_velocity > 0.0) || tolerance < 0.0)
        throw std::invalid_argument("GradientConfig: steps must be positive");
}

double ml_objective(const SpaceTimeSnapshot& snapshot, const TargetState& params, double xi_t,
                    const CalibrationProfile& calib)
{
    const ArrayConfig& cfg = snapshot.scenario;
    const int N = snapshot.num_elements();
    const int M = snapshot.num_symbols();
    if (calib.size() != N)
        throw std::invalid_argument("ml_objective: calibration length does not match N");
    const ElementResponse resp = ElementResponse::compute(cfg, params);
    const double amp = std::sqrt(xi_t / N);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const cd w = amp * calib.weight(i) * resp.spatial[i];
        const double phase = -kPi * resp.omega[i];
        for (int m = 1; m <= M; ++m)
            acc += std::norm(snapshot.data(i, m - 1) - w * std::polar(1.0, phase * m));
    }
    return acc;
}

double ml_objective(const SpaceTimeSnapshot& snapshot, const TargetState& params, double xi_t)
{
    return ml_objective(snapshot, params, xi_t, CalibrationProfile::identity(snapshot.num_elements()));
}

GradientResult ml_gradient_descent(const SpaceTimeSnapshot& snapshot, const std::optional<TargetState>& init,
                                   double xi_t, const GradientConfig& gcfg, const SearchBounds& bounds,
                                   std::mt19937_64& rng)
{
    gcfg.validate();
    const Params width = {bounds.theta_hi - bounds.theta_lo, bounds.range_hi - bounds.range_lo,
                          bounds.vr_hi - bounds.vr_lo, bounds.vtheta_hi - bounds.vtheta_lo};
    const Params h = {gcfg.h_theta, gcfg.h_range, gcfg.h_velocity, gcfg.h_velocity};
    auto objective = [&](const Params& p) { return ml_objective(snapshot, to_state(p), xi_t); };

    GradientResult best;
    best.objective = std::numeric_limits<double>::infinity();
    bool any = false;

    for (int restart = 0; restart < gcfg.restarts; ++restart) {
        const TargetState start = (restart == 0 && init) ? bounds.clamp(*init) : bounds.sample(rng);
        Params p = to_params(start);
        double f = objective(p);
        if (!std::isfinite(f))
            continue;
        std::vector<double> history;
        double step = gcfg.initial_step;
        bool diverged = false;
        for (int it = 0; it < gcfg.max_iters; ++it) {
            // Gradient in coordinates scaled by the bound widths.
            Params g{};
            double gnorm = 0.0;
            for (int k = 0; k < 4; ++k) {
                Params lo = p, hi = p;
                lo[k] -= h[k];
                hi[k] += h[k];
                g[k] = (objective(hi) - objective(lo)) / (2.0 * h[k]) * width[k];
                gnorm += g[k] * g[k];
            }
            gnorm = std::sqrt(gnorm);
            if (!std::isfinite(gnorm)) {
                diverged = true;
                break;
            }
            if (gnorm == 0.0)
                break;

            bool accepted = false;
            for (int halving = 0; halving <= gcfg.max_halvings; ++halving) {
                Params trial;
                for (int k = 0; k < 4; ++k)
                    trial[k] = p[k] - step * width[k] * g[k] / gnorm;
                trial = to_params(bounds.clamp(to_state(trial)));
                const double ft = objective(trial);
                if (std::isfinite(ft) && ft < f - gcfg.tolerance * std::abs(f)) {
                    p = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted)
                break;
            history.push_back(f);
            step = std::min(step * gcfg.step_growth, 1.0);
        }
        if (diverged)
            continue;
        if (!any || f < best.objective) {
            any = true;
            best.objective = f;
            best.iterations = static_cast<int>(history.size());
            best.history = std::move(history);
            best.estimate = EstimationResult{};
            best.estimate.theta = p[0];
            best.estimate.range = p[1];
            best.estimate.v_r = p[2];
            best.estimate.v_theta = p[3];
            best.estimate.method = "ML";
        }
    }
    if (!any)
        throw EstimationFailed("ml_gradient_descent: every restart diverged",
                               "restarts=" + std::to_string(gcfg.restarts));
    return best;
}

PolarCodebook build_polar_codebook(const ArrayConfig& cfg, int total_points)
{
    if (total_points < 4)
        throw std::invalid_argument("build_polar_codebook: need at least 4 grid points");
    cfg.validate();
    PolarCodebook cb;
    cb.angle_points = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(total_points))));
    cb.range_points = std::max(2, static_cast<int>(std::lround(static_cast<double>(total_points) / cb.angle_points)));
    cb.fingerprint = cfg.fingerprint();

    const std::vector<double> sines = linspace(-0.95, 0.95, cb.angle_points);
    const double rd = cfg.rayleigh_distance();
    std::vector<double> inv = linspace(200.0 / rd, 1.0 / rd, cb.range_points);
    const std::size_t G = static_cast<std::size_t>(cb.angle_points) * cb.range_points;
    cb.theta.reserve(G);
    cb.range.reserve(G);
    cb.steering.resize(cfg.num_elements, static_cast<Eigen::Index>(G));
    for (int i = 0; i < cb.angle_points; ++i)
        for (int j = 0; j < cb.range_points; ++j) {
            const double t = std::asin(sines[i]);
            const double r = 1.0 / inv[j];
            cb.steering.col(static_cast<Eigen::Index>(cb.theta.size())) =
                spatial_steering(cfg, TargetState{t, r, 0.0, 0.0});
            cb.theta.push_back(t);
            cb.range.push_back(r);
        }
    return cb;
}

CodebookPick polar_locate(const SpaceTimeSnapshot& snapshot, const PolarCodebook& codebook)
{
    check_codebook(snapshot, codebook);
    const CMatrix beams = codebook.steering.adjoint() * snapshot.data;
    const RVector score = beams.rowwise().squaredNorm();
    Eigen::Index best = 0;
    for (Eigen::Index g = 1; g < score.size(); ++g)
        if (score[g] > score[best])
            best = g;
    return {codebook.theta[best], codebook.range[best], score[best], static_cast<std::size_t>(best)};
}

CodebookPick polar_locate_reference(const SpaceTimeSnapshot& snapshot, const PolarCodebook& codebook)
{
    check_codebook(snapshot, codebook);
    CodebookPick best;
    best.score = -1.0;
    for (std::size_t g = 0; g < codebook.size(); ++g) {
        double score = 0.0;
        for (int m = 0; m < snapshot.num_symbols(); ++m) {
            cd acc(0.0, 0.0);
            for (int i = 0; i < snapshot.num_elements(); ++i)
                acc += std::conj(codebook.steering(i, static_cast<Eigen::Index>(g))) * snapshot.data(i, m);
            score += std::norm(acc);
        }
        if (score > best.score)
            best = {codebook.theta[g], codebook.range[g], score, g};
    }
    return best;
}

std::vector<double> velocity_codebook_vr_grid() { return linspace(-15.0, 15.0, 121); }

std::vector<double> velocity_codebook_vtheta_grid() { return linspace(-16.0, 16.0, 129); }

CodebookPick velocity_codebook_search(const SpaceTimeSnapshot& snapshot, double theta, double range,
                                      const std::vector<double>& vr_grid, const std::vector<double>& vtheta_grid,
                                      double xi_t)
{
    check_velocity_grids(vr_grid, vtheta_grid);
    const VectorizedProjector proj(snapshot);
    // |<V, Y>|^2 = correlation * ||V||^2 ||Y||^2 with ||V||^2 = xi_t M.
    const double scale = xi_t * snapshot.num_symbols() * snapshot.data.squaredNorm();
    const int R = static_cast<int>(vr_grid.size());
    const int T = static_cast<int>(vtheta_grid.size());
    RVector score(R * T);
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < R * T; ++idx)
        score[idx] = scale * proj.correlation(TargetState{theta, range, vr_grid[idx / T], vtheta_grid[idx % T]});
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < score.size(); ++k)
        if (score[k] > score[best])
            best = k;
    return {vr_grid[best / T], vtheta_grid[best % T], score[best], static_cast<std::size_t>(best)};
}

CodebookPick velocity_codebook_search_reference(const SpaceTimeSnapshot& snapshot, double theta, double range,
                                                const std::vector<double>& vr_grid,
                                                const std::vector<double>& vtheta_grid, double xi_t)
{
    check_velocity_grids(vr_grid, vtheta_grid);
    CodebookPick best;
    best.score = -1.0;
    std::size_t idx = 0;
    for (double vr : vr_grid)
        for (double vt : vtheta_grid) {
            const CMatrix V = space_time_matrix(snapshot.scenario, TargetState{theta, range, vr, vt}, xi_t);
            const double score = std::norm(V.cwiseProduct(snapshot.data.conjugate()).sum());
            if (score > best.score)
                best = {vr, vt, score, idx};
            ++idx;
        }
    return best;
}

}  // namespace nfm
