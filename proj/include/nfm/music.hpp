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

#include <functional>
#include <string>
#include <vector>

#include "nfm/coarse_estimator.hpp"
#include "nfm/lookup_tables.hpp"
#include "nfm/signal_synth.hpp"

namespace nfm {

/// Floor applied to projections before inversion.
inline constexpr double kSpectrumFloor = 1e-12;

struct SubspaceDecomposition {
    RVector eigenvalues;   // descending
    CMatrix signal_basis;  // N x signal_dim
    CMatrix noise_basis;   // N x (N - signal_dim)
    int signal_dim = 0;
    bool isotropic = false;  // all eigenvalues equal; the spectrum carries no information
};

/// (1/M) Y Y^H.
CMatrix spatial_covariance(const SpaceTimeSnapshot& snapshot);

/// Eigen-decomposition of a Hermitian R. signal_dim is the smallest k whose
/// leading eigenvalues hold `energy_fraction` of the trace, clamped to
/// [1, max_signal_dim]. Throws std::invalid_argument when R is not Hermitian
/// to 1e-9 relative.
SubspaceDecomposition noise_subspace(const CMatrix& R, double energy_fraction = 0.95, int max_signal_dim = 8);

using SteeringFn = std::function<CVector(double)>;

/// 1 / max(||U_n^H a||^2, 1e-12) for unit-norm a(x) at each grid value,
/// evaluated as 1 - ||U_s^H a||^2; grid points run in parallel.
/// Throws std::invalid_argument on a dimension mismatch or empty grid.
RVector music_spectrum_1d(const SubspaceDecomposition& subspace, const SteeringFn& steering,
                          const std::vector<double>& grid);

/// Direct projection onto the noise basis, single-threaded.
RVector music_spectrum_1d_reference(const CMatrix& noise_basis, const SteeringFn& steering,
                                    const std::vector<double>& grid);

/// Correlates a normalized vec(Y) with unit-norm space-time steering vectors:
/// |u(theta, r, v_r, v_theta)^H y|^2 in [0, 1].
class VectorizedProjector {
public:
    explicit VectorizedProjector(const SpaceTimeSnapshot& snapshot);

    double correlation(const TargetState& state) const;

    /// 1 / max(1 - correlation, 1e-12).
    double spectrum(const TargetState& state) const;

    /// Evaluates `spectrum` over grid points mapped to states, in parallel.
    RVector scan(const std::function<TargetState(double)>& state_at, const std::vector<double>& grid) const;

private:
    ArrayConfig cfg_;
    CMatrix normalized_;
    bool zero_ = false;
};

struct RefinementConfig {
    double theta_window = 0.0235;      // rad, about three native beams at broadside for N = 256
    double range_window_inverse = 0.026;  // 1/m; the range scan is uniform in 1/r
    double vr_window = 3.0;            // m/s
    double vtheta_window = 3.0;        // m/s
    int grid_points = 512;
    int passes = 2;
    double energy_fraction = 0.95;

    /// Three native beams in angle and three angle-table range steps.
    static RefinementConfig defaults(const ArrayConfig& cfg);
    void validate() const;
};

struct EstimationResult {
    double theta = 0.0;
    double range = 0.0;
    double v_r = 0.0;
    double v_theta = 0.0;
    double theta_peak = 0.0;  // spectrum value at each selected grid point
    double range_peak = 0.0;
    double vr_peak = 0.0;
    double vtheta_peak = 0.0;
    std::string method;
    int signal_dim = 0;
    bool window_saturated = false;
    bool degenerate_spectrum = false;
    bool range_unresolved = false;  // estimate lies beyond the beamfocusing distance
    bool failed = false;
    std::string diagnostics;
};

/// Bearing held fixed while v_theta varies: the spatial covariance sees the
/// target direction averaged over the CPI, sin(theta) - m_c v_theta cos(theta) / (r f_r)
/// with m_c = (M + 1) / 2.
double mid_cpi_bearing(const ArrayConfig& cfg, const TargetState& state);

/// Angle whose mid-CPI bearing equals `bearing` for the given v_theta and r.
double angle_for_bearing(const ArrayConfig& cfg, double bearing, double v_theta, double range);

/// Angle scan with r fixed at the coarse value, then range scan at the new
/// angle, both on spatial-covariance MUSIC spectra.
EstimationResult refine_location(const SpaceTimeSnapshot& snapshot, const CoarseEstimate& coarse,
                                 const RefinementConfig& rcfg);

/// Velocity scans at a refined location: v_r with both signs of the coarse
/// |v_theta|, then v_theta along the line of constant mid-CPI bearing.
EstimationResult refine_velocity(const SpaceTimeSnapshot& snapshot, const EstimationResult& location,
                                 const CoarseEstimate& coarse, const RefinementConfig& rcfg);

/// refine_location then refine_velocity; later passes rescan all four
/// parameters against the vectorized model with the current estimates.
EstimationResult refine_all(const SpaceTimeSnapshot& snapshot, const CoarseEstimate& coarse,
                            const RefinementConfig& rcfg);

}  // namespace nfm
