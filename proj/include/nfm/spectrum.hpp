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

#include <filesystem>
#include <span>
#include <vector>

#include "nfm/array_geometry.hpp"
#include "nfm/signal_synth.hpp"

namespace nfm {

/// Angle-Doppler power map of one snapshot.
///
/// Rows are spatial-frequency bins psi_k = 2k/K_a - 1 (phase per element in
/// units of pi), reported on `angle_axis` as sin(theta) = psi * lambda / (2d).
/// Columns are normalized Doppler bins omega_l = 2l/K_d - 1, matched to the
/// exp(-j pi m omega) slow-time model; v = omega * lambda * f_r / 2.
struct ADMap {
    RMatrix power;                      // K_a x K_d, peak normalized to 1
    std::vector<double> angle_axis;     // sin(theta) per row
    std::vector<double> doppler_axis;   // omega per column
    int oversample_a = 1;
    int oversample_d = 1;
    double peak_power = 0.0;            // unnormalized |DFT|^2 at the peak

    double angle_step() const { return angle_axis.size() > 1 ? angle_axis[1] - angle_axis[0] : 0.0; }
    double doppler_step() const { return doppler_axis.size() > 1 ? doppler_axis[1] - doppler_axis[0] : 0.0; }
};

/// omega -> m/s under the exp(-j pi m omega) convention.
inline double doppler_to_velocity(const ArrayConfig& cfg, double omega)
{
    return 0.5 * omega * cfg.wavelength() * cfg.symbol_rate;
}

inline double velocity_to_doppler(const ArrayConfig& cfg, double v)
{
    return 2.0 * v / (cfg.wavelength() * cfg.symbol_rate);
}

/// Zero-padded 2D DFT (FFT along antennas, then along symbols), returned as
/// |.|^2 normalized to unit peak. Rows and columns are processed in parallel.
/// Throws std::invalid_argument on an empty snapshot or oversampling < 1.
ADMap ad_transform(const SpaceTimeSnapshot& snapshot, int oversample_a = 4, int oversample_d = 4);

/// Direct-sum evaluation of the same map, single-threaded. Kept as the
/// reference the FFT path is checked against.
ADMap ad_transform_reference(const SpaceTimeSnapshot& snapshot, int oversample_a = 4, int oversample_d = 4);

/// Max over Doppler bins of each angle row, renormalized to unit peak.
RVector angular_profile(const ADMap& map);

/// Max over angle bins of each Doppler column, renormalized to unit peak.
RVector doppler_profile(const ADMap& map);

/// 3-dB support around the global peak of a 1D profile.
struct SpreadMeasurement {
    std::vector<double> member_bins;  // axis values strictly above half the peak
    std::vector<int> member_indices;
    int peak_index = 0;
    double center = 0.0;      // median of member_bins
    double width = 0.0;       // (max - min) + one grid step
    double fine_width = 0.0;  // edge-to-edge width with interpolated half-power crossings
};

/// Collects the bins above 0.5 * peak connected to the global peak. A run of
/// at most `max_gap` sub-threshold bins does not break connectivity; with the
/// default 0 only the contiguous run containing the peak is returned.
/// Throws DegenerateInputError on an all-zero profile and
/// std::invalid_argument on size mismatch or negative entries.
SpreadMeasurement extract_3db_support(std::span<const double> profile, std::span<const double> axis,
                                      int max_gap = 0);

inline SpreadMeasurement extract_3db_support(const RVector& profile, const std::vector<double>& axis,
                                             int max_gap = 0)
{
    return extract_3db_support(std::span<const double>(profile.data(), static_cast<std::size_t>(profile.size())),
                               std::span<const double>(axis), max_gap);
}

// Analytic near-field responses ----------------------------------------------

/// Normalized DFT gain at codebook angle theta_n for a target at
/// (theta_u, r_f): the quadratic-phase direct sum over the array's signed
/// element indices.
double analytic_angular_gain_sum(const ArrayConfig& cfg, double theta_u, double r_f, double theta_n);

/// Fresnel-integral closed form of analytic_angular_gain_sum,
/// |(Cbar + j Sbar) / (2 gamma2)|^2. Falls back to the planar Dirichlet gain
/// when gamma2 vanishes (r_f -> infinity).
double analytic_angular_gain_fresnel(const ArrayConfig& cfg, double theta_u, double r_f, double theta_n);

/// Linear Doppler phase slope across the aperture (per element index, in units
/// of pi per symbol) under the first-order local-velocity model:
/// (2d / lambda) v_theta cos(theta) / (r f_r).
double doppler_slope(const ArrayConfig& cfg, const TargetState& target);

/// Spatial gain of the transverse-velocity phase slope seen by a far-field
/// codebook beam at theta_n: (1/N^2) |sum_n exp(j pi n (slope - (2d/lambda) sin theta_n))|^2.
/// Peaks at (2d/lambda) sin(theta_n) = doppler_slope(cfg, target).
double analytic_doppler_gain(const ArrayConfig& cfg, const TargetState& target, double theta_n);

/// Predicted Doppler profile on `omega_axis`: for each bin, the strongest
/// M-point Dirichlet response among elements whose local Doppler is
/// omega_r + slope * n. Normalized to unit peak.
RVector predicted_doppler_profile(const ArrayConfig& cfg, const TargetState& target,
                                  std::span<const double> omega_axis);

/// Range below which angular spreading is observable: r_RD cos^2(theta) / 10.
double ebrd_bound(const ArrayConfig& cfg, double theta);
bool is_within_ebrd(const ArrayConfig& cfg, const TargetState& target);

/// CSV with header "sin_theta,omega,power", one row per bin.
void write_admap_csv(const ADMap& map, const std::filesystem::path& path);

}  // namespace nfm
