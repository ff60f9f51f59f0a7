// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <thread>
#include <vector>

#include "nfm/coarse_estimator.hpp"
#include "nfm/errors.hpp"
#include "test_support.hpp"

using namespace nfm;

namespace {

const CoarseEstimator& small_estimator()
{
    static const CoarseEstimator est = [] {
        const ArrayConfig cfg = test::small_array();
        return CoarseEstimator(cfg, build_angle_table(cfg, default_angle_grid(32), inverse_range_grid(0.7, 3.0, 16)));
    }();
    return est;
}

double doppler_bin_velocity(const ArrayConfig& cfg, int od)
{
    return std::abs(doppler_to_velocity(cfg, 2.0 / (od * cfg.num_symbols)) - doppler_to_velocity(cfg, 0.0));
}

SpreadMeasurement members(std::vector<double> bins)
{
    SpreadMeasurement s;
    s.member_bins = bins;
    s.member_indices.assign(bins.size(), 0);
    s.center = bins[bins.size() / 2];
    return s;
}

}  // namespace

TEST_CASE("coarse helpers convert medians")
{
    const ArrayConfig cfg = test::small_array();
    CHECK(coarse_angle(members({0.1, 0.2, 0.3})) == Catch::Approx(std::asin(0.2)));
    CHECK(coarse_angle(members({1.2})) == Catch::Approx(kPi / 2));
    CHECK(coarse_radial_velocity(members({-0.1, 0.0, 0.1}), cfg) == Catch::Approx(0.0).margin(1e-12));
    const double v = coarse_radial_velocity(members({0.25}), cfg);
    CHECK(velocity_to_doppler(cfg, v) == Catch::Approx(0.25));
    CHECK_THROWS_AS(coarse_angle(SpreadMeasurement{}), std::invalid_argument);
    CHECK_THROWS_AS(coarse_radial_velocity(SpreadMeasurement{}, cfg), std::invalid_argument);
}

TEST_CASE("static target at a table cell is recovered exactly")
{
    const CoarseEstimator& est = small_estimator();
    const AngleRangeTable& t = est.angle_table();
    for (auto [i, j] : {std::pair{10, 3}, std::pair{16, 8}, std::pair{22, 12}}) {
        const TargetState target{t.angle_grid[i], t.range_grid[j], 0.0, 0.0};
        const CoarseEstimate c = est.estimate(test::clean(est.config(), target));
        INFO("cell " << i << "," << j);
        // Off broadside the near-field profile is skewed; two oversampled bins.
        CHECK(std::abs(std::sin(c.theta) - std::sin(target.theta)) < 2.0 * 2.0 / (4 * 64));
        CHECK(c.range == t.range_grid[j]);
        CHECK(std::abs(c.v_r) < doppler_bin_velocity(est.config(), 4));
        CHECK(c.v_theta <= 2.0);
    }
}

TEST_CASE("moving target lands within the grid resolution")
{
    const CoarseEstimator& est = small_estimator();
    const ArrayConfig& cfg = est.config();
    const TargetState target{0.3, cfg.rayleigh_distance() / 20.0, 5.0, 4.0};
    const CoarseEstimate c = est.estimate(test::clean(cfg, target));
    const double sin_step = std::sin(est.angle_table().angle_grid[1]) - std::sin(est.angle_table().angle_grid[0]);
    CHECK(std::abs(std::sin(c.theta) - std::sin(target.theta)) < sin_step);
    CHECK(std::abs(c.v_r - target.v_r) < 2.0 * doppler_bin_velocity(cfg, 4));
    CHECK(c.v_theta >= 0.0);
    CHECK(c.range > 0.0);
    CHECK(est.cached_velocity_tables() >= 1);
    CHECK(c.angular.fine_width > 0.0);
    CHECK(c.doppler.fine_width > 0.0);
}

TEST_CASE("coarse estimate ignores complex scaling")
{
    const CoarseEstimator& est = small_estimator();
    const SpaceTimeSnapshot y = test::clean(est.config(), {-0.4, 1.5, -6.0, 7.0});
    const CoarseEstimate ref = est.estimate(y);
    for (std::complex<double> c : {std::complex<double>(3.7, 0.0), std::polar(1.0, 0.9), std::polar(0.02, -2.3)}) {
        SpaceTimeSnapshot s = y;
        s.data *= c;
        const CoarseEstimate got = est.estimate(s);
        CHECK(got.theta == Catch::Approx(ref.theta).margin(1e-12));
        CHECK(got.range == ref.range);
        CHECK(got.v_r == Catch::Approx(ref.v_r).margin(1e-9));
        CHECK(got.v_theta == ref.v_theta);
    }
}

TEST_CASE("coarse estimation errors")
{
    const CoarseEstimator& est = small_estimator();
    SpaceTimeSnapshot zero{CMatrix::Zero(64, 16), est.config()};
    CHECK_THROWS_AS(est.estimate(zero), EstimationFailed);
    try {
        est.estimate(zero);
    } catch (const EstimationFailed& e) {
        CHECK(e.diagnostics().find("peak_power") != std::string::npos);
    }

    const ArrayConfig other = ArrayConfig::make(64, 28e9, 5e3, 8);
    CHECK_THROWS_AS(est.estimate(test::clean(other, {0.1, 1.0, 0.0, 0.0})), ConfigError);

    AngleRangeTable foreign = est.angle_table();
    foreign.fingerprint ^= 1;
    CHECK_THROWS_AS(CoarseEstimator(est.config(), foreign), ConfigError);
    AngleRangeTable empty;
    empty.fingerprint = est.config().fingerprint();
    CHECK_THROWS_AS(CoarseEstimator(est.config(), empty), ConfigError);
}

TEST_CASE("far-field target is flagged as extrapolated")
{
    const CoarseEstimator& est = small_estimator();
    const ArrayConfig& cfg = est.config();
    const CoarseEstimate c = est.estimate(test::clean(cfg, {0.2, 2.0 * cfg.rayleigh_distance(), 0.0, 0.0}));
    CHECK(c.range == est.angle_table().range_grid.back());
    CHECK(c.range_extrapolated);
}

TEST_CASE("velocity table cache is keyed by table cell and thread safe")
{
    const ArrayConfig cfg = test::small_array();
    const CoarseEstimator est(cfg, build_angle_table(cfg, default_angle_grid(8), inverse_range_grid(0.7, 3.0, 4)),
                              linspace(-10.0, 10.0, 5), linspace(0.0, 8.0, 5));
    const auto& t = est.angle_table();
    const auto a = est.velocity_table(t.angle_grid[2], t.range_grid[1]);
    const auto b = est.velocity_table(t.angle_grid[2] + 1e-4, t.range_grid[1] * 1.001);
    CHECK(a == b);
    CHECK(a->cond_theta == t.angle_grid[2]);
    CHECK(a->cond_range == t.range_grid[1]);
    CHECK(est.cached_velocity_tables() == 1);

    std::vector<std::thread> workers;
    for (int k = 0; k < 4; ++k)
        workers.emplace_back([&, k] { est.velocity_table(t.angle_grid[k % 2 + 4], t.range_grid[3]); });
    for (auto& w : workers)
        w.join();
    CHECK(est.cached_velocity_tables() == 3);
}
