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

#include "nfm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "nfm/errors.hpp"
#include "nfm/fresnel.hpp"

namespace nfm {

namespace {

void check_transform_args(const SpaceTimeSnapshot& snapshot, int oversample_a, int oversample_d)
{
    if (snapshot.data.size() == 0)
        throw std::invalid_argument("ad_transform: empty snapshot");
    if (oversample_a < 1 || oversample_d < 1)
        throw std::invalid_argument("ad_transform: oversampling factors must be >= 1");
}

ADMap make_axes(const SpaceTimeSnapshot& snapshot, int oversample_a, int oversample_d)
{
    const int Ka = oversample_a * snapshot.num_elements();
    const int Kd = oversample_d * snapshot.num_symbols();
    const double spacing_ratio = 2.0 * snapshot.scenario.spacing() / snapshot.scenario.wavelength();

    ADMap map;
    map.oversample_a = oversample_a;
    map.oversample_d = oversample_d;
    map.power.resize(Ka, Kd);
    map.angle_axis.resize(static_cast<std::size_t>(Ka));
    map.doppler_axis.resize(static_cast<std::size_t>(Kd));
    for (int k = 0; k < Ka; ++k)
        map.angle_axis[k] = (2.0 * k / Ka - 1.0) / spacing_ratio;
    for (int l = 0; l < Kd; ++l)
        map.doppler_axis[l] = 2.0 * l / Kd - 1.0;
    return map;
}

void normalize(ADMap& map)
{
    map.peak_power = map.power.maxCoeff();
    if (map.peak_power > 0.0)
        map.power /= map.peak_power;
}

RVector normalized(RVector v)
{
    const double peak = v.size() ? v.maxCoeff() : 0.0;
    if (peak > 0.0)
        v /= peak;
    return v;
}

double median_sorted(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Dirichlet power |sum_{i=0}^{n-1} exp(j pi i x)|^2 / n^2.
double dirichlet_gain(int n, double x)
{
    const double den = std::sin(0.5 * kPi * x);
    if (std::abs(den) < 1e-12)
        return 1.0;
    const double num = std::sin(0.5 * kPi * n * x);
    return (num * num) / (static_cast<double>(n) * n * den * den);
}

}  // namespace

ADMap ad_transform(const SpaceTimeSnapshot& snapshot, int oversample_a, int oversample_d)
{
    check_transform_args(snapshot, oversample_a, oversample_d);
    const int N = snapshot.num_elements();
    const int M = snapshot.num_symbols();
    const int Ka = oversample_a * N;
    const int Kd = oversample_d * M;
    ADMap map = make_axes(snapshot, oversample_a, oversample_d);

    // Stage 1: spatial FFT per symbol. Column m of `spatial` is contiguous.
    // exp(-j pi n psi_k) = exp(-j 2 pi i k / Ka) * (-1)^n * unit phase, and the
    // unit phase drops out of |.|^2.
    std::vector<cd> spatial(static_cast<std::size_t>(Ka) * M);
    const int n0 = snapshot.scenario.element_index(0);
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m) {
        cd* col = spatial.data() + static_cast<std::size_t>(m) * Ka;
        std::fill(col, col + Ka, cd(0.0, 0.0));
        for (int i = 0; i < N; ++i) {
            const int n = i + n0;
            col[i] = (n % 2 == 0) ? snapshot.data(i, m) : -snapshot.data(i, m);
        }
        detail::fft_inplace(col, Ka, detail::FftDirection::forward);
    }

    // Stage 2: slow-time transform per angle bin, sum_m y_m exp(+j pi m omega_l).
#pragma omp parallel
    {
        std::vector<cd> row(static_cast<std::size_t>(Kd));
#pragma omp for schedule(static)
        for (int k = 0; k < Ka; ++k) {
            std::fill(row.begin(), row.end(), cd(0.0, 0.0));
            for (int m = 1; m <= M; ++m) {
                const cd v = spatial[static_cast<std::size_t>(m - 1) * Ka + k];
                row[m % Kd] += (m % 2 == 0) ? v : -v;
            }
            detail::fft_inplace(row.data(), Kd, detail::FftDirection::backward);
            for (int l = 0; l < Kd; ++l)
                map.power(k, l) = std::norm(row[l]);
        }
    }
    normalize(map);
    return map;
}

ADMap ad_transform_reference(const SpaceTimeSnapshot& snapshot, int oversample_a, int oversample_d)
{
    check_transform_args(snapshot, oversample_a, oversample_d);
    const int N = snapshot.num_elements();
    const int M = snapshot.num_symbols();
    const int Ka = oversample_a * N;
    const int Kd = oversample_d * M;
    ADMap map = make_axes(snapshot, oversample_a, oversample_d);

    CMatrix beam(Ka, M);
    for (int k = 0; k < Ka; ++k) {
        const double psi = 2.0 * k / Ka - 1.0;
        for (int m = 0; m < M; ++m) {
            cd acc(0.0, 0.0);
            for (int i = 0; i < N; ++i) {
                const int n = snapshot.scenario.element_index(i);
                acc += snapshot.data(i, m) * std::polar(1.0, -kPi * n * psi);
            }
            beam(k, m) = acc;
        }
    }
    for (int k = 0; k < Ka; ++k)
        for (int l = 0; l < Kd; ++l) {
            const double omega = map.doppler_axis[l];
            cd acc(0.0, 0.0);
            for (int m = 1; m <= M; ++m)
                acc += beam(k, m - 1) * std::polar(1.0, kPi * m * omega);
            map.power(k, l) = std::norm(acc);
        }
    normalize(map);
    return map;
}

RVector angular_profile(const ADMap& map)
{
    return normalized(map.power.rowwise().maxCoeff());
}

RVector doppler_profile(const ADMap& map)
{
    return normalized(map.power.colwise().maxCoeff().transpose());
}

SpreadMeasurement extract_3db_support(std::span<const double> profile, std::span<const double> axis, int max_gap)
{
    if (profile.empty())
        throw std::invalid_argument("extract_3db_support: empty profile");
    if (profile.size() != axis.size())
        throw std::invalid_argument("extract_3db_support: profile and axis lengths differ");
    if (max_gap < 0)
        throw std::invalid_argument("extract_3db_support: max_gap must be >= 0");
    for (double v : profile)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("extract_3db_support: profile must be finite and non-negative");

    const int K = static_cast<int>(profile.size());
    const int peak = static_cast<int>(std::max_element(profile.begin(), profile.end()) - profile.begin());
    const double peak_value = profile[peak];
    if (!(peak_value > 0.0))
        throw DegenerateInputError("extract_3db_support: all-zero profile");
    const double threshold = 0.5 * peak_value;
    auto above = [&](int i) { return profile[i] > threshold; };

    auto walk = [&](int dir) {
        int edge = peak;
        int gap = 0;
        for (int i = peak + dir; i >= 0 && i < K; i += dir) {
            if (above(i)) {
                edge = i;
                gap = 0;
            } else if (++gap > max_gap) {
                break;
            }
        }
        return edge;
    };
    const int lo = walk(-1);
    const int hi = walk(+1);
    const double step = K > 1 ? axis[1] - axis[0] : 0.0;

    SpreadMeasurement out;
    out.peak_index = peak;
    for (int i = lo; i <= hi; ++i)
        if (above(i)) {
            out.member_indices.push_back(i);
            out.member_bins.push_back(axis[i]);
        }
    std::vector<double> sorted = out.member_bins;
    std::sort(sorted.begin(), sorted.end());
    out.center = median_sorted(sorted);
    out.width = (axis[hi] - axis[lo]) + step;

    // Half-power crossing between the outermost member and its outer neighbour.
    auto crossing = [&](int edge, int outside) {
        if (outside < 0 || outside >= K)
            return 0.5;
        return (profile[edge] - threshold) / (profile[edge] - profile[outside]);
    };
    out.fine_width = (axis[hi] - axis[lo]) + step * (crossing(lo, lo - 1) + crossing(hi, hi + 1));
    return out;
}

double analytic_angular_gain_sum(const ArrayConfig& cfg, double theta_u, double r_f, double theta_n)
{
    const double ratio = 2.0 * cfg.spacing() / cfg.wavelength();
    const double c = std::cos(theta_u);
    const double quad = ratio * cfg.spacing() * c * c / (2.0 * r_f);
    const double lin = ratio * (std::sin(theta_u) - std::sin(theta_n));
    cd acc(0.0, 0.0);
    for (int i = 0; i < cfg.num_elements; ++i) {
        const double n = cfg.element_index(i);
        acc += std::polar(1.0, -kPi * (n * n * quad - n * lin));
    }
    const double N = cfg.num_elements;
    return std::norm(acc) / (N * N);
}

double analytic_angular_gain_fresnel(const ArrayConfig& cfg, double theta_u, double r_f, double theta_n)
{
    const double ratio = 2.0 * cfg.spacing() / cfg.wavelength();
    const double d_eff = ratio * cfg.spacing();
    const double c2 = std::cos(theta_u) * std::cos(theta_u);
    const double gamma2 = 0.5 * cfg.num_elements * std::sqrt(d_eff * c2 / r_f);
    if (!(gamma2 > 1e-9))
        return dirichlet_gain(cfg.num_elements, ratio * (std::sin(theta_n) - std::sin(theta_u)));
    const double gamma1 = ratio * std::sqrt(r_f / (d_eff * c2)) * (std::sin(theta_n) - std::sin(theta_u));
    const FresnelPair hi = fresnel(gamma1 + gamma2);
    const FresnelPair lo = fresnel(gamma1 - gamma2);
    const double cbar = hi.C - lo.C;
    const double sbar = hi.S - lo.S;
    return (cbar * cbar + sbar * sbar) / (4.0 * gamma2 * gamma2);
}

double doppler_slope(const ArrayConfig& cfg, const TargetState& target)
{
    const double ratio = 2.0 * cfg.spacing() / cfg.wavelength();
    return ratio * target.v_theta * std::cos(target.theta) / (target.range * cfg.symbol_rate);
}

double analytic_doppler_gain(const ArrayConfig& cfg, const TargetState& target, double theta_n)
{
    const double ratio = 2.0 * cfg.spacing() / cfg.wavelength();
    const double slope = doppler_slope(cfg, target) - ratio * std::sin(theta_n);
    const double omega_r = velocity_to_doppler(cfg, target.v_r);
    cd acc(0.0, 0.0);
    for (int i = 0; i < cfg.num_elements; ++i) {
        const double n = cfg.element_index(i);
        acc += std::polar(1.0, -kPi * (-n * slope + omega_r));
    }
    const double N = cfg.num_elements;
    return std::norm(acc) / (N * N);
}

RVector predicted_doppler_profile(const ArrayConfig& cfg, const TargetState& target,
                                  std::span<const double> omega_axis)
{
    const double slope = doppler_slope(cfg, target);
    const double omega_r = velocity_to_doppler(cfg, target.v_r);
    RVector out(static_cast<Eigen::Index>(omega_axis.size()));
    for (std::size_t l = 0; l < omega_axis.size(); ++l) {
        double best = 0.0;
        for (int i = 0; i < cfg.num_elements; ++i) {
            const double local = omega_r + slope * cfg.element_index(i);
            best = std::max(best, dirichlet_gain(cfg.num_symbols, omega_axis[l] - local));
        }
        out[static_cast<Eigen::Index>(l)] = best;
    }
    return normalized(std::move(out));
}

double ebrd_bound(const ArrayConfig& cfg, double theta)
{
    const double c = std::cos(theta);
    return cfg.rayleigh_distance() * c * c / 10.0;
}

bool is_within_ebrd(const ArrayConfig& cfg, const TargetState& target)
{
    return target.range < ebrd_bound(cfg, target.theta);
}

void write_admap_csv(const ADMap& map, const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << "sin_theta,omega,power\n" << std::setprecision(12);
    for (Eigen::Index k = 0; k < map.power.rows(); ++k)
        for (Eigen::Index l = 0; l < map.power.cols(); ++l)
            os << map.angle_axis[k] << ',' << map.doppler_axis[l] << ',' << map.power(k, l) << '\n';
}

}  // namespace nfm
