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

#include "nfm/music.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "nfm/spectrum.hpp"

namespace nfm {

namespace {

constexpr double kFlatTolerance = 1e-6;
constexpr double kMaxAngle = 0.5 * kPi - 1e-6;

struct ScanPick {
    double value = 0.0;
    double peak = 0.0;
    bool at_edge = false;
    bool flat = false;
};

// Lowest index wins ties.
ScanPick pick(const RVector& spectrum, const std::vector<double>& grid)
{
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < spectrum.size(); ++i)
        if (spectrum[i] > spectrum[best])
            best = i;
    ScanPick p;
    p.value = grid[best];
    p.peak = spectrum[best];
    const double lo = spectrum.minCoeff();
    p.flat = !(p.peak - lo > kFlatTolerance * std::abs(p.peak));
    p.at_edge = grid.size() > 1 && grid.front() != grid.back() &&
                (best == 0 || best == static_cast<Eigen::Index>(grid.size()) - 1);
    return p;
}

std::vector<double> angle_grid(double center, double window, int points)
{
    std::vector<double> g = linspace(center - window, center + window, points);
    for (auto& v : g)
        v = std::clamp(v, -kMaxAngle, kMaxAngle);
    return g;
}

// Ascending in r, uniform in 1/r.
std::vector<double> range_grid(double center, double window_inverse, int points)
{
    const double inv = 1.0 / center;
    const double hi = inv + window_inverse;
    const double lo = std::max(inv - window_inverse, 0.1 * inv);
    std::vector<double> g = linspace(hi, lo, points);
    for (auto& v : g)
        v = 1.0 / v;
    return g;
}

CVector unit_spatial(const ArrayConfig& cfg, double theta, double range)
{
    return spatial_steering(cfg, TargetState{theta, range, 0.0, 0.0});
}

void note_scan(EstimationResult& out, const ScanPick& p)
{
    out.window_saturated = out.window_saturated || p.at_edge;
    out.degenerate_spectrum = out.degenerate_spectrum || p.flat;
}

void copy_coarse(EstimationResult& out, const CoarseEstimate& coarse)
{
    out.theta = coarse.theta;
    out.range = coarse.range;
    out.v_r = coarse.v_r;
    out.v_theta = coarse.v_theta;
}

struct VelocityBounds {
    std::vector<double> vr;
    double vtheta_lo = 0.0;
    double vtheta_hi = 0.0;
};

// Transverse scan along the line of constant mid-CPI bearing.
ScanPick scan_transverse(const VectorizedProjector& proj, const ArrayConfig& cfg, EstimationResult& est,
                         double lo, double hi, int points)
{
    const double bearing = mid_cpi_bearing(cfg, {est.theta, est.range, est.v_r, est.v_theta});
    const double range = est.range;
    const double vr = est.v_r;
    const std::vector<double> grid = linspace(lo, hi, points);
    auto state_at = [&](double vt) {
        return TargetState{angle_for_bearing(cfg, bearing, vt, range), range, vr, vt};
    };
    const ScanPick p = pick(proj.scan(state_at, grid), grid);
    est.v_theta = p.value;
    est.theta = angle_for_bearing(cfg, bearing, p.value, range);
    est.vtheta_peak = p.peak;
    return p;
}

}  // namespace

CMatrix spatial_covariance(const SpaceTimeSnapshot& snapshot)
{
    if (snapshot.num_symbols() < 1)
        throw std::invalid_argument("spatial_covariance: snapshot has no symbols");
    CMatrix R = snapshot.data * snapshot.data.adjoint();
    R /= static_cast<double>(snapshot.num_symbols());
    return R;
}

SubspaceDecomposition noise_subspace(const CMatrix& R, double energy_fraction, int max_signal_dim)
{
    if (R.rows() != R.cols() || R.rows() < 2)
        throw std::invalid_argument("noise_subspace: R must be square with dimension >= 2");
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw std::invalid_argument("noise_subspace: energy_fraction must lie in (0, 1]");
    const double scale = std::max(1.0, R.cwiseAbs().maxCoeff());
    if ((R - R.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("noise_subspace: matrix is not Hermitian");

    const Eigen::Index n = R.rows();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(R);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("noise_subspace: eigen-decomposition did not converge");

    SubspaceDecomposition out;
    out.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    const CMatrix vectors = solver.eigenvectors().rowwise().reverse();

    const double total = out.eigenvalues.sum();
    const double top = out.eigenvalues[0];
    out.isotropic = !(total > 0.0) || top - out.eigenvalues[n - 1] <= 1e-12 * top;
    int k = 1;
    if (!out.isotropic) {
        double acc = 0.0;
        for (k = 0; k < n;) {
            acc += out.eigenvalues[k++];
            if (acc >= energy_fraction * total)
                break;
        }
    }
    k = std::clamp(k, 1, std::min<int>(max_signal_dim, static_cast<int>(n) - 1));
    out.signal_dim = k;
    out.signal_basis = vectors.leftCols(k);
    out.noise_basis = vectors.rightCols(n - k);
    return out;
}

RVector music_spectrum_1d(const SubspaceDecomposition& subspace, const SteeringFn& steering,
                          const std::vector<double>& grid)
{
    if (grid.empty())
        throw std::invalid_argument("music_spectrum_1d: empty grid");
    const Eigen::Index n = subspace.signal_basis.rows();
    if (steering(grid.front()).size() != n)
        throw std::invalid_argument("music_spectrum_1d: steering dimension does not match the subspace");
    const int G = static_cast<int>(grid.size());
    RVector out(G);
    if (subspace.isotropic) {
        out.setOnes();
        return out;
    }
    const CMatrix us_h = subspace.signal_basis.adjoint();
#pragma omp parallel for schedule(static)
    for (int g = 0; g < G; ++g) {
        CVector a = steering(grid[g]);
        a.normalize();
        const double in_signal = (us_h * a).squaredNorm();
        out[g] = 1.0 / std::max(1.0 - in_signal, kSpectrumFloor);
    }
    return out;
}

RVector music_spectrum_1d_reference(const CMatrix& noise_basis, const SteeringFn& steering,
                                    const std::vector<double>& grid)
{
    if (grid.empty())
        throw std::invalid_argument("music_spectrum_1d: empty grid");
    RVector out(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CVector a = steering(grid[g]);
        if (a.size() != noise_basis.rows())
            throw std::invalid_argument("music_spectrum_1d: steering dimension does not match the noise basis");
        a.normalize();
        out[static_cast<Eigen::Index>(g)] = 1.0 / std::max((noise_basis.adjoint() * a).squaredNorm(), kSpectrumFloor);
    }
    return out;
}

VectorizedProjector::VectorizedProjector(const SpaceTimeSnapshot& snapshot)
    : cfg_(snapshot.scenario), normalized_(snapshot.data)
{
    const double norm = normalized_.norm();
    zero_ = !(norm > 0.0);
    if (!zero_)
        normalized_ /= norm;
    if (normalized_.rows() != cfg_.num_elements || normalized_.cols() != cfg_.num_symbols)
        throw std::invalid_argument("VectorizedProjector: snapshot shape does not match its array config");
}

double VectorizedProjector::correlation(const TargetState& state) const
{
    if (zero_)
        return 0.0;
    const ElementResponse resp = ElementResponse::compute(cfg_, state);
    const Eigen::Index N = normalized_.rows();
    const Eigen::Index M = normalized_.cols();
    cd acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < N; ++i) {
        // sum_{m=1}^{M} y_m z^m by Horner, z = exp(+j pi omega).
        const cd z = std::polar(1.0, kPi * resp.omega[i]);
        cd h = normalized_(i, M - 1);
        for (Eigen::Index m = M - 2; m >= 0; --m)
            h = h * z + normalized_(i, m);
        acc += std::conj(resp.spatial[i]) * h * z;
    }
    return std::norm(acc) / static_cast<double>(N * M);
}

double VectorizedProjector::spectrum(const TargetState& state) const
{
    return 1.0 / std::max(1.0 - correlation(state), kSpectrumFloor);
}

RVector VectorizedProjector::scan(const std::function<TargetState(double)>& state_at,
                                  const std::vector<double>& grid) const
{
    if (grid.empty())
        throw std::invalid_argument("VectorizedProjector::scan: empty grid");
    const int G = static_cast<int>(grid.size());
    RVector out(G);
#pragma omp parallel for schedule(static)
    for (int g = 0; g < G; ++g)
        out[g] = spectrum(state_at(grid[g]));
    return out;
}

RefinementConfig RefinementConfig::defaults(const ArrayConfig& cfg)
{
    RefinementConfig r;
    r.theta_window = 3.0 * cfg.wavelength() / (cfg.num_elements * cfg.spacing());
    // default_range_grid: 64 points uniform in 1/r over [10, 200] / r_RD.
    r.range_window_inverse = 3.0 * (190.0 / 63.0) / cfg.rayleigh_distance();
    return r;
}

void RefinementConfig::validate() const
{
    if (theta_window < 0.0 || range_window_inverse < 0.0 || vr_window < 0.0 || vtheta_window < 0.0)
        throw std::invalid_argument("RefinementConfig: windows must be non-negative");
    if (grid_points < 3)
        throw std::invalid_argument("RefinementConfig: grid_points must be >= 3");
    if (passes < 1)
        throw std::invalid_argument("RefinementConfig: passes must be >= 1");
}

double mid_cpi_bearing(const ArrayConfig& cfg, const TargetState& state)
{
    const double mc = 0.5 * (cfg.num_symbols + 1);
    return std::sin(state.theta) - mc * state.v_theta * std::cos(state.theta) / (state.range * cfg.symbol_rate);
}

double angle_for_bearing(const ArrayConfig& cfg, double bearing, double v_theta, double range)
{
    const double mc = 0.5 * (cfg.num_symbols + 1);
    const double k = mc * v_theta / (range * cfg.symbol_rate);
    const double s = std::clamp(bearing / std::sqrt(1.0 + k * k), -1.0, 1.0);
    return std::clamp(std::atan(k) + std::asin(s), -kMaxAngle, kMaxAngle);
}

EstimationResult refine_location(const SpaceTimeSnapshot& snapshot, const CoarseEstimate& coarse,
                                 const RefinementConfig& rcfg)
{
    rcfg.validate();
    const ArrayConfig& cfg = snapshot.scenario;
    EstimationResult out;
    out.method = "MUSIC";
    copy_coarse(out, coarse);

    const SubspaceDecomposition sub = noise_subspace(spatial_covariance(snapshot), rcfg.energy_fraction);
    out.signal_dim = sub.signal_dim;
    if (sub.isotropic) {
        out.degenerate_spectrum = true;
        out.diagnostics = "isotropic spatial covariance";
        return out;
    }

    const std::vector<double> thetas = angle_grid(coarse.theta, rcfg.theta_window, rcfg.grid_points);
    const double r0 = coarse.range;
    const ScanPick pt = pick(music_spectrum_1d(sub, [&](double t) { return unit_spatial(cfg, t, r0); }, thetas),
                             thetas);
    note_scan(out, pt);

    const std::vector<double> ranges = range_grid(coarse.range, rcfg.range_window_inverse, rcfg.grid_points);
    const double t0 = pt.value;
    const ScanPick pr = pick(music_spectrum_1d(sub, [&](double r) { return unit_spatial(cfg, t0, r); }, ranges),
                             ranges);
    note_scan(out, pr);

    if (out.degenerate_spectrum) {
        out.diagnostics = "flat spatial MUSIC spectrum";
        return out;
    }
    out.theta = pt.value;
    out.theta_peak = pt.peak;
    out.range = pr.value;
    out.range_peak = pr.peak;
    out.range_unresolved = !(out.range < ebrd_bound(cfg, out.theta));
    return out;
}

EstimationResult refine_velocity(const SpaceTimeSnapshot& snapshot, const EstimationResult& location,
                                 const CoarseEstimate& coarse, const RefinementConfig& rcfg)
{
    rcfg.validate();
    const ArrayConfig& cfg = snapshot.scenario;
    EstimationResult out = location;
    if (location.degenerate_spectrum)
        return out;

    const VectorizedProjector proj(snapshot);
    const std::vector<double> vrs = linspace(coarse.v_r - rcfg.vr_window, coarse.v_r + rcfg.vr_window,
                                             rcfg.grid_points);
    // The spatial estimate is the CPI-averaged bearing; map it to the angle
    // that goes with each transverse-velocity hypothesis.
    const double bearing = std::sin(location.theta);
    const double range = location.range;
    ScanPick best;
    double best_theta = location.theta;
    double best_vt = 0.0;
    bool first = true;
    for (double sign : {1.0, -1.0}) {
        const double vt = sign * std::abs(coarse.v_theta);
        const double th = angle_for_bearing(cfg, bearing, vt, range);
        const ScanPick p = pick(proj.scan([&](double v) { return TargetState{th, range, v, vt}; }, vrs), vrs);
        if (first || p.peak > best.peak) {
            best = p;
            best_theta = th;
            best_vt = vt;
        }
        first = false;
        if (coarse.v_theta == 0.0)
            break;
    }
    note_scan(out, best);
    out.theta = best_theta;
    out.v_r = best.value;
    out.vr_peak = best.peak;
    out.v_theta = best_vt;

    const ScanPick pv =
        scan_transverse(proj, cfg, out, best_vt - rcfg.vtheta_window, best_vt + rcfg.vtheta_window, rcfg.grid_points);
    note_scan(out, pv);
    if (out.degenerate_spectrum) {
        out.diagnostics = "flat velocity pseudo-spectrum";
        copy_coarse(out, coarse);
    }
    return out;
}

EstimationResult refine_all(const SpaceTimeSnapshot& snapshot, const CoarseEstimate& coarse,
                            const RefinementConfig& rcfg)
{
    rcfg.validate();
    if (rcfg.theta_window == 0.0 && rcfg.range_window_inverse == 0.0 && rcfg.vr_window == 0.0 &&
        rcfg.vtheta_window == 0.0) {
        EstimationResult out;
        out.method = "MUSIC";
        copy_coarse(out, coarse);
        return out;
    }

    EstimationResult est = refine_velocity(snapshot, refine_location(snapshot, coarse, rcfg), coarse, rcfg);
    if (est.degenerate_spectrum || rcfg.passes < 2)
        return est;

    // Later passes scan the same windows (around the coarse values) against
    // the full space-time model at the current estimates.
    const ArrayConfig& cfg = snapshot.scenario;
    const VectorizedProjector proj(snapshot);
    const std::vector<double> thetas = angle_grid(coarse.theta, rcfg.theta_window, rcfg.grid_points);
    const std::vector<double> ranges = range_grid(coarse.range, rcfg.range_window_inverse, rcfg.grid_points);
    const std::vector<double> vrs = linspace(coarse.v_r - rcfg.vr_window, coarse.v_r + rcfg.vr_window,
                                             rcfg.grid_points);
    const double vt_center = est.v_theta < 0.0 ? -std::abs(coarse.v_theta) : std::abs(coarse.v_theta);

    for (int pass = 1; pass < rcfg.passes; ++pass) {
        est.window_saturated = false;
        const ScanPick pt = pick(proj.scan([&](double t) { return TargetState{t, est.range, est.v_r, est.v_theta}; },
                                           thetas),
                                 thetas);
        est.theta = pt.value;
        est.theta_peak = pt.peak;
        note_scan(est, pt);

        const ScanPick pr = pick(proj.scan([&](double r) { return TargetState{est.theta, r, est.v_r, est.v_theta}; },
                                           ranges),
                                 ranges);
        est.range = pr.value;
        est.range_peak = pr.peak;
        note_scan(est, pr);

        const ScanPick pv = pick(proj.scan([&](double v) { return TargetState{est.theta, est.range, v, est.v_theta}; },
                                           vrs),
                                 vrs);
        est.v_r = pv.value;
        est.vr_peak = pv.peak;
        note_scan(est, pv);

        note_scan(est, scan_transverse(proj, cfg, est, vt_center - rcfg.vtheta_window,
                                       vt_center + rcfg.vtheta_window, rcfg.grid_points));
    }
    if (est.degenerate_spectrum) {
        est.diagnostics = "flat pseudo-spectrum in a later pass";
        copy_coarse(est, coarse);
    }
    est.range_unresolved = !(est.range < ebrd_bound(cfg, est.theta));
    return est;
}

}  // namespace nfm
