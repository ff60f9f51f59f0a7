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

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace nfm {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;

/// Static scenario description: a uniform linear array observing M symbols.
///
/// Elements carry signed integer indices n = i - floor(N/2), i = 0..N-1, so the
/// element with n = 0 sits at the coordinate origin. For even N the geometric
/// center of the aperture is offset by d/2 from that element.
struct ArrayConfig {
    int num_elements = 256;          // N
    double carrier_freq = 28e9;      // f_c [Hz]
    double element_spacing = 0.0;    // d [m]; 0 selects lambda/2
    double symbol_rate = 5e3;        // f_r [Hz]
    int num_symbols = 32;            // M
    bool two_way_spatial = false;    // doubles the spatial phase when set

    /// Builds a config with d = lambda/2 unless a positive spacing is given,
    /// then validates it.
    static ArrayConfig make(int n, double fc, double fr, int m, double d = 0.0);

    double wavelength() const { return kSpeedOfLight / carrier_freq; }
    double wavenumber() const { return 2.0 * kPi / wavelength(); }
    double spacing() const { return element_spacing > 0.0 ? element_spacing : 0.5 * wavelength(); }
    double aperture() const { return (num_elements - 1) * spacing(); }
    double rayleigh_distance() const {
        const double D = aperture();
        return 2.0 * D * D / wavelength();
    }
    double symbol_interval() const { return 1.0 / symbol_rate; }

    /// Signed index of storage position i.
    int element_index(int i) const { return i - num_elements / 2; }

    /// Throws std::invalid_argument on N < 2, M < 1 or non-positive rates.
    void validate() const;

    /// 64-bit FNV-1a hash of every field that changes synthesized data.
    std::uint64_t fingerprint() const;
};

/// Target position and velocity relative to the array center.
/// v_r > 0 means receding.
struct TargetState {
    double theta = 0.0;   // rad, inside (-pi/2, pi/2)
    double range = 1.0;   // m, > 0
    double v_r = 0.0;     // m/s
    double v_theta = 0.0; // m/s

    void validate() const;
};

/// Per-element gain errors w_n = rho_n * exp(j phi_n).
struct CalibrationProfile {
    RVector amplitude;
    RVector phase;

    static CalibrationProfile identity(int n);
    int size() const { return static_cast<int>(amplitude.size()); }
    cd weight(int i) const { return std::polar(amplitude[i], phase[i]); }
    bool is_identity() const;
};

struct LocalVelocity {
    double radial = 0.0;
    double transverse = 0.0;
    double total() const { return radial + transverse; }
};

// Geometry ------------------------------------------------------------------

/// Signed element coordinates n*d, n = -floor(N/2) .. N-1-floor(N/2).
std::vector<double> element_offsets(const ArrayConfig& cfg);

/// Exact distance from the target to element n (law of cosines).
double element_range(const ArrayConfig& cfg, const TargetState& target, int n);

/// Second-order expansion of element_range in (n d / r):
/// r - n d sin(theta) + (n d)^2 cos^2(theta) / (2 r).
double taylor_range(const ArrayConfig& cfg, const TargetState& target, int n);

/// Unit-norm spherical-wavefront steering vector. Entry i is
/// exp(-j nu (r^(n) - r)) / sqrt(N) with nu = 2 pi / lambda (doubled when
/// cfg.two_way_spatial is set).
CVector spatial_steering(const ArrayConfig& cfg, const TargetState& target);

/// Element-wise w_n * a_n. Throws std::invalid_argument on size mismatch.
CVector apply_calibration(const CalibrationProfile& profile, const CVector& a);

/// Draws phi_n ~ U[0, max_phase] and amplitude errors e_n ~ U[0, max_amp_db] dB,
/// rho_n = 10^(e_n / 20).
CalibrationProfile sample_calibration(std::mt19937_64& rng, double max_phase, double max_amp_db, int n);

/// Radial and transverse velocity seen at element n, using the exact r^(n).
LocalVelocity local_velocity(const TargetState& target, int n, const ArrayConfig& cfg);

/// Normalized Doppler omega^(n) = 2 v^(n) / (lambda f_r) for element n.
double normalized_doppler(const ArrayConfig& cfg, const TargetState& target, int n);

/// Doppler steering vector for symbol m: entries exp(-j pi m omega^(n)).
CVector doppler_steering(const ArrayConfig& cfg, const TargetState& target, int m);

/// sqrt(xi_t) (A . B): column m-1 holds sqrt(xi_t) a (.) b^(m), m = 1..M.
CMatrix space_time_matrix(const ArrayConfig& cfg, const TargetState& target, double xi_t);

/// Radar equation P_T G^2 lambda^2 sigma / ((4 pi)^3 r^4).
double target_snr(double transmit_power, double gain, double wavelength, double rcs, double range);

/// Per-element spatial phasor and normalized Doppler for one target.
///
/// This is the factored form every hot loop uses: entry (i, m) of the
/// space-time matrix equals sqrt(xi_t) * spatial[i] * exp(-j pi m omega[i]).
struct ElementResponse {
    std::vector<cd> spatial;    // unit-modulus phasors, without the 1/sqrt(N)
    std::vector<double> omega;  // normalized Doppler per element

    static ElementResponse compute(const ArrayConfig& cfg, const TargetState& target);
};

}  // namespace nfm
