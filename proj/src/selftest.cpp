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

#include "nfm/selftest.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "nfm/baselines.hpp"
#include "nfm/harness.hpp"
#include "nfm/spectrum.hpp"

namespace nfm {
namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.array = ArrayConfig::make(64, 28e9, 5e3, 16);
    cfg.target = {0.3, cfg.array.rayleigh_distance() / 20.0, 5.0, 4.0};
    cfg.snr_db = {10.0};
    cfg.iterations = 1;
    cfg.seed = 7;
    cfg.angle_points = 32;
    cfg.range_points = 16;
    cfg.range_min = 0.7;
    cfg.range_max = 3.0;
    cfg.polar_points = 1024;
    cfg.refinement = RefinementConfig::defaults(cfg.array);
    cfg.refinement.grid_points = 256;
    cfg.gradient.restarts = 2;
    cfg.gradient.max_iters = 60;
    return cfg;
}

bool close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

SelftestCheck steering_normalization()
{
    double worst = 0.0;
    for (int n : {16, 64, 256}) {
        const ArrayConfig cfg = ArrayConfig::make(n, 28e9, 5e3, 8);
        for (double theta : {-1.0, 0.0, 0.4})
            for (double frac : {0.005, 0.05, 2.0}) {
                const TargetState t{theta, frac * cfg.rayleigh_distance(), 3.0, -2.0};
                worst = std::max(worst, std::abs(spatial_steering(cfg, t).norm() - 1.0));
                const CMatrix V = space_time_matrix(cfg, t, 1.0);
                worst = std::max(worst, std::abs(V.squaredNorm() / cfg.num_symbols - 1.0));
            }
    }
    return {"steering_normalization", worst < 1e-12, "max | ||a|| - 1 | = " + fmt(worst)};
}

SelftestCheck far_field_limit()
{
    // Far away the exact range approaches the planar one and the steering
    // vector approaches the plane-wave vector.
    const ArrayConfig cfg = ArrayConfig::make(256, 28e9, 5e3, 8);
    const double nu = cfg.wavenumber();
    double worst_phase = 0.0;
    double worst_corr = 0.0;
    for (double theta : {-0.8, 0.0, 0.26, 1.1}) {
        const TargetState t{theta, 1e4 * cfg.rayleigh_distance(), 0.0, 0.0};
        const CVector a = spatial_steering(cfg, t);
        CVector planar(cfg.num_elements);
        for (int i = 0; i < cfg.num_elements; ++i) {
            const int n = cfg.element_index(i);
            const double x = n * cfg.spacing();
            const double planar_excess = -x * std::sin(theta);
            const double exact_excess = element_range(cfg, t, n) - t.range;
            worst_phase = std::max(worst_phase, nu * std::abs(exact_excess - planar_excess));
            planar[i] = std::polar(1.0 / std::sqrt(double(cfg.num_elements)), -nu * planar_excess);
        }
        worst_corr = std::max(worst_corr, 1.0 - std::abs(planar.dot(a)));
    }
    // The second-order expansion error shrinks like r^-2 relative to the quadratic term.
    const TargetState near{0.4, cfg.rayleigh_distance() / 20.0, 0.0, 0.0};
    const TargetState far{0.4, cfg.rayleigh_distance() / 2.0, 0.0, 0.0};
    const int edge = cfg.element_index(0);
    const double err_near = std::abs(element_range(cfg, near, edge) - taylor_range(cfg, near, edge));
    const double err_far = std::abs(element_range(cfg, far, edge) - taylor_range(cfg, far, edge));
    const bool taylor_ok = err_far < err_near / 50.0;
    const bool ok = worst_phase < 1e-3 && worst_corr < 1e-6 && taylor_ok;
    return {"far_field_limit", ok,
            "phase dev " + fmt(worst_phase) + " rad, 1-|corr| " + fmt(worst_corr) + ", taylor err " + fmt(err_near) +
                " -> " + fmt(err_far) + " m"};
}

SelftestCheck parseval()
{
    const ArrayConfig cfg = ArrayConfig::make(48, 28e9, 5e3, 12);
    std::mt19937_64 rng(11);
    const SpaceTimeSnapshot clean = clean_signal(cfg, {0.2, 0.5, 4.0, 3.0}, CalibrationProfile::identity(48), 1.0);
    const SpaceTimeSnapshot s = add_noise(clean, {0.01}, rng);
    double worst = 0.0;
    for (int oa : {1, 4})
        for (int od : {1, 3}) {
            const ADMap map = ad_transform(s, oa, od);
            const double total = map.power.sum() * map.peak_power;
            const double expected = double(map.power.rows()) * map.power.cols() * s.data.squaredNorm();
            worst = std::max(worst, std::abs(total / expected - 1.0));
        }
    return {"parseval", worst < 1e-10, "max relative energy error " + fmt(worst)};
}

SelftestCheck noise_statistics()
{
    const ArrayConfig cfg = ArrayConfig::make(256, 28e9, 5e3, 64);
    const double sigma2 = snr_to_sigma2(1.0 / 256, -10.0);
    std::mt19937_64 rng(3);
    const SpaceTimeSnapshot z{CMatrix::Zero(256, 64), cfg};
    const CMatrix w = add_noise(z, {sigma2}, rng).data;
    const double count = double(w.size());
    const cd mean = w.sum() / count;
    const double var_re = w.real().array().square().sum() / count;
    const double var_im = w.imag().array().square().sum() / count;
    const cd pseudo = (w.array() * w.array()).sum() / count;
    // 16384 samples: standard errors are about 1% of sigma^2.
    const bool ok = std::abs(mean) < 0.05 * std::sqrt(sigma2) && close(var_re + var_im, sigma2, 0.05) &&
                    std::abs(var_re - var_im) < 0.05 * sigma2 && std::abs(pseudo) < 0.05 * sigma2;
    return {"noise_statistics", ok,
            "var " + fmt(var_re + var_im) + " vs " + fmt(sigma2) + ", |pseudo| " + fmt(std::abs(pseudo))};
}

SelftestCheck estimator_invariance(const ExperimentContext& ctx)
{
    const ExperimentConfig& cfg = ctx.config();
    const TrialSnapshots snaps = synthesize_trial(cfg, 10.0, 99);
    const SpaceTimeSnapshot& y = snaps.perfect;
    std::ostringstream detail;
    bool ok = true;

    for (const cd c : {cd(3.7, 0.0), std::polar(1.0, 0.9), std::polar(0.02, -2.3)}) {
        SpaceTimeSnapshot yc = y;
        yc.data *= c;

        const CoarseEstimate a = ctx.coarse().estimate(y);
        const CoarseEstimate b = ctx.coarse().estimate(yc);
        const bool coarse_ok = close(a.theta, b.theta, 1e-12) && close(a.range, b.range, 1e-12) &&
                               close(a.v_r, b.v_r, 1e-12) && close(a.v_theta, b.v_theta, 1e-12);

        const EstimationResult ma = refine_all(y, a, cfg.refinement);
        const EstimationResult mb = refine_all(yc, a, cfg.refinement);
        const bool music_ok = close(ma.theta, mb.theta, 1e-12) && close(ma.range, mb.range, 1e-12) &&
                              close(ma.v_r, mb.v_r, 1e-12) && close(ma.v_theta, mb.v_theta, 1e-12);

        const bool polar_ok = polar_locate(y, ctx.codebook()).index == polar_locate(yc, ctx.codebook()).index;

        const auto vr = velocity_codebook_vr_grid();
        const auto vt = velocity_codebook_vtheta_grid();
        const TargetState truth = cfg.resolved_target();
        const bool vel_ok = velocity_codebook_search(y, truth.theta, truth.range, vr, vt, cfg.xi()).index ==
                            velocity_codebook_search(yc, truth.theta, truth.range, vr, vt, cfg.xi()).index;

        // The likelihood carries the echo power, so it is invariant under a
        // joint positive rescaling of data and power.
        bool ml_ok = true;
        if (c.imag() == 0.0) {
            const double s2 = std::norm(c);
            for (const TargetState& p : {truth, TargetState{0.1, truth.range * 1.5, -3.0, 6.0}}) {
                const double fa = ml_objective(y, p, cfg.xi());
                const double fb = ml_objective(yc, p, cfg.xi() * s2);
                ml_ok = ml_ok && close(fb, s2 * fa, 1e-9);
            }
        }

        const bool all = coarse_ok && music_ok && polar_ok && vel_ok && ml_ok;
        if (!all)
            detail << "c=" << c << " coarse " << coarse_ok << " music " << music_ok << " polar " << polar_ok
                   << " velocity " << vel_ok << " ml " << ml_ok << "; ";
        ok = ok && all;
    }
    if (ok)
        detail << "coarse, MUSIC, polar, velocity codebook and ML unchanged under 3 rescalings";
    return {"scale_phase_invariance", ok, detail.str()};
}

SelftestCheck reproducibility(const ExperimentContext& ctx)
{
    const ExperimentConfig& cfg = ctx.config();
    const std::uint64_t seed = trial_seed(cfg.seed, 0, 3);
    const TrialSnapshots a = synthesize_trial(cfg, 5.0, seed);
    const TrialSnapshots b = synthesize_trial(cfg, 5.0, seed);
    const TrialSnapshots c = synthesize_trial(cfg, 5.0, trial_seed(cfg.seed, 0, 4));
    const bool synth_ok = a.perfect.data == b.perfect.data && a.distorted.data == b.distorted.data &&
                          a.perfect.data != c.perfect.data;

    const TrialOutcome ta = run_trial(ctx, 5.0, seed);
    const TrialOutcome tb = run_trial(ctx, 5.0, seed);
    bool trial_ok = ta.methods.size() == tb.methods.size();
    for (std::size_t i = 0; trial_ok && i < ta.methods.size(); ++i) {
        const EstimationResult& x = ta.methods[i].estimate;
        const EstimationResult& y = tb.methods[i].estimate;
        trial_ok = ta.methods[i].failed == tb.methods[i].failed && x.theta == y.theta && x.range == y.range &&
                   x.v_r == y.v_r && x.v_theta == y.v_theta;
    }
    return {"seed_reproducibility", synth_ok && trial_ok,
            std::string("synthesis ") + (synth_ok ? "identical" : "differs") + ", trial estimates " +
                (trial_ok ? "identical" : "differ")};
}

SelftestCheck guarded(const std::string& name, const std::function<SelftestCheck()>& fn)
{
    try {
        return fn();
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

}  // namespace

std::vector<SelftestCheck> run_selftest()
{
    std::vector<SelftestCheck> out;
    out.push_back(guarded("steering_normalization", steering_normalization));
    out.push_back(guarded("far_field_limit", far_field_limit));
    out.push_back(guarded("parseval", parseval));
    out.push_back(guarded("noise_statistics", noise_statistics));

    std::unique_ptr<ExperimentContext> ctx;
    try {
        ctx = std::make_unique<ExperimentContext>(small_config());
    } catch (const std::exception& e) {
        out.push_back({"scale_phase_invariance", false, std::string("context: ") + e.what()});
        out.push_back({"seed_reproducibility", false, std::string("context: ") + e.what()});
        return out;
    }
    out.push_back(guarded("scale_phase_invariance", [&] { return estimator_invariance(*ctx); }));
    out.push_back(guarded("seed_reproducibility", [&] { return reproducibility(*ctx); }));
    return out;
}

bool print_selftest(const std::vector<SelftestCheck>& checks, std::ostream& os)
{
    bool all = true;
    for (const SelftestCheck& c : checks) {
        os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        all = all && c.passed;
    }
    return all;
}

}  // namespace nfm
