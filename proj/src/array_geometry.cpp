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

#include "nfm/array_geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nfm {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename T>
std::uint64_t fnv1a(std::uint64_t h, T value)
{
    return fnv1a(h, &value, sizeof(value));
}

// r^(n) - r evaluated without cancellation for r >> n d.
double range_excess(double r, double x, double sin_theta)
{
    const double num = x * x - 2.0 * r * x * sin_theta;
    const double rn = std::sqrt(r * r + num);
    return num / (rn + r);
}

}  // namespace

ArrayConfig ArrayConfig::make(int n, double fc, double fr, int m, double d)
{
    ArrayConfig cfg;
    cfg.num_elements = n;
    cfg.carrier_freq = fc;
    cfg.symbol_rate = fr;
    cfg.num_symbols = m;
    cfg.element_spacing = d;
    cfg.validate();
    return cfg;
}

void ArrayConfig::validate() const
{
    if (num_elements < 2)
        throw std::invalid_argument("ArrayConfig: num_elements must be >= 2, got " + std::to_string(num_elements));
    if (num_symbols < 1)
        throw std::invalid_argument("ArrayConfig: num_symbols must be >= 1, got " + std::to_string(num_symbols));
    if (!(carrier_freq > 0.0) || !std::isfinite(carrier_freq))
        throw std::invalid_argument("ArrayConfig: carrier_freq must be positive");
    if (!(symbol_rate > 0.0) || !std::isfinite(symbol_rate))
        throw std::invalid_argument("ArrayConfig: symbol_rate must be positive");
    if (element_spacing < 0.0 || !std::isfinite(element_spacing))
        throw std::invalid_argument("ArrayConfig: element_spacing must be positive (or 0 for lambda/2)");
}

std::uint64_t ArrayConfig::fingerprint() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, static_cast<std::int64_t>(num_elements));
    h = fnv1a(h, carrier_freq);
    h = fnv1a(h, spacing());
    h = fnv1a(h, symbol_rate);
    h = fnv1a(h, static_cast<std::int64_t>(num_symbols));
    h = fnv1a(h, static_cast<std::uint8_t>(two_way_spatial ? 1 : 0));
    return h;
}

void TargetState::validate() const
{
    if (!(range > 0.0) || !std::isfinite(range))
        throw std::invalid_argument("TargetState: range must be positive");
    if (!(std::abs(theta) < 0.5 * kPi))
        throw std::invalid_argument("TargetState: theta must lie strictly inside (-pi/2, pi/2)");
    if (!std::isfinite(v_r) || !std::isfinite(v_theta))
        throw std::invalid_argument("TargetState: velocities must be finite");
}

CalibrationProfile CalibrationProfile::identity(int n)
{
    return {RVector::Ones(n), RVector::Zero(n)};
}

bool CalibrationProfile::is_identity() const
{
    return (amplitude.array() == 1.0).all() && (phase.array() == 0.0).all();
}

std::vector<double> element_offsets(const ArrayConfig& cfg)
{
    std::vector<double> out(static_cast<std::size_t>(cfg.num_elements));
    const double d = cfg.spacing();
    for (int i = 0; i < cfg.num_elements; ++i)
        out[i] = cfg.element_index(i) * d;
    return out;
}

double element_range(const ArrayConfig& cfg, const TargetState& target, int n)
{
    const double x = n * cfg.spacing();
    const double r = target.range;
    return std::sqrt(r * r + x * x - 2.0 * r * x * std::sin(target.theta));
}

double taylor_range(const ArrayConfig& cfg, const TargetState& target, int n)
{
    const double x = n * cfg.spacing();
    const double r = target.range;
    const double c = std::cos(target.theta);
    return r - x * std::sin(target.theta) + x * x * c * c / (2.0 * r);
}

CVector spatial_steering(const ArrayConfig& cfg, const TargetState& target)
{
    const int N = cfg.num_elements;
    const double nu = cfg.wavenumber() * (cfg.two_way_spatial ? 2.0 : 1.0);
    const double d = cfg.spacing();
    const double s = std::sin(target.theta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    CVector a(N);
    for (int i = 0; i < N; ++i) {
        const double excess = range_excess(target.range, cfg.element_index(i) * d, s);
        a[i] = std::polar(scale, -nu * excess);
    }
    return a;
}

CVector apply_calibration(const CalibrationProfile& profile, const CVector& a)
{
    if (profile.size() != a.size() || profile.phase.size() != a.size())
        throw std::invalid_argument("apply_calibration: profile length " + std::to_string(profile.size()) +
                                    " does not match vector length " + std::to_string(a.size()));
    CVector out(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out[i] = profile.weight(static_cast<int>(i)) * a[i];
    return out;
}

CalibrationProfile sample_calibration(std::mt19937_64& rng, double max_phase, double max_amp_db, int n)
{
    if (max_phase < 0.0 || max_amp_db < 0.0)
        throw std::invalid_argument("sample_calibration: bounds must be non-negative");
    CalibrationProfile p{RVector(n), RVector(n)};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        p.phase[i] = max_phase * unit(rng);
        const double err_db = max_amp_db * unit(rng);
        p.amplitude[i] = std::pow(10.0, err_db / 20.0);
    }
    return p;
}

LocalVelocity local_velocity(const TargetState& target, int n, const ArrayConfig& cfg)
{
    const double x = n * cfg.spacing();
    const double rn = element_range(cfg, target, n);
    return {target.v_r * (target.range - x * std::sin(target.theta)) / rn,
            target.v_theta * x * std::cos(target.theta) / rn};
}

double normalized_doppler(const ArrayConfig& cfg, const TargetState& target, int n)
{
    const double v = local_velocity(target, n, cfg).total();
    return 2.0 * v / (cfg.wavelength() * cfg.symbol_rate);
}

CVector doppler_steering(const ArrayConfig& cfg, const TargetState& target, int m)
{
    const int N = cfg.num_elements;
    CVector b(N);
    for (int i = 0; i < N; ++i) {
        const double w = normalized_doppler(cfg, target, cfg.element_index(i));
        b[i] = std::polar(1.0, -kPi * m * w);
    }
    return b;
}

CMatrix space_time_matrix(const ArrayConfig& cfg, const TargetState& target, double xi_t)
{
    if (xi_t < 0.0)
        throw std::invalid_argument("space_time_matrix: xi_t must be non-negative");
    const ElementResponse resp = ElementResponse::compute(cfg, target);
    const int N = cfg.num_elements;
    const int M = cfg.num_symbols;
    const double amp = std::sqrt(xi_t / N);
    CMatrix V(N, M);
    for (int m = 1; m <= M; ++m)
        for (int i = 0; i < N; ++i)
            V(i, m - 1) = amp * resp.spatial[i] * std::polar(1.0, -kPi * m * resp.omega[i]);
    return V;
}

double target_snr(double transmit_power, double gain, double wavelength, double rcs, double range)
{
    if (!(transmit_power > 0.0) || !(gain > 0.0) || !(wavelength > 0.0) || !(rcs > 0.0) || !(range > 0.0))
        throw std::invalid_argument("target_snr: all inputs must be positive");
    const double four_pi = 4.0 * kPi;
    const double r2 = range * range;
    return transmit_power * gain * gain * wavelength * wavelength * rcs / (four_pi * four_pi * four_pi * r2 * r2);
}

ElementResponse ElementResponse::compute(const ArrayConfig& cfg, const TargetState& target)
{
    const int N = cfg.num_elements;
    const double nu = cfg.wavenumber() * (cfg.two_way_spatial ? 2.0 : 1.0);
    const double d = cfg.spacing();
    const double s = std::sin(target.theta);
    const double c = std::cos(target.theta);
    const double r = target.range;
    const double doppler_scale = 2.0 / (cfg.wavelength() * cfg.symbol_rate);

    ElementResponse out;
    out.spatial.resize(static_cast<std::size_t>(N));
    out.omega.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const double x = cfg.element_index(i) * d;
        const double excess = range_excess(r, x, s);
        const double rn = r + excess;
        out.spatial[i] = std::polar(1.0, -nu * excess);
        const double v = target.v_r * (r - x * s) / rn + target.v_theta * x * c / rn;
        out.omega[i] = doppler_scale * v;
    }
    return out;
}

}  // namespace nfm
