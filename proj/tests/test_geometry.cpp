// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "nfm/array_geometry.hpp"
#include "test_support.hpp"

using namespace nfm;
using Catch::Approx;

namespace {

// Law of cosines in long double, written independently of element_range.
long double exact_range_ld(long double r, long double x, long double theta)
{
    return std::sqrt(r * r + x * x - 2.0L * r * x * std::sin(theta));
}

}  // namespace

TEST_CASE("array config derived quantities")
{
    const ArrayConfig cfg = test::reference_array();
    CHECK(cfg.wavelength() == Approx(0.0107069).epsilon(1e-5));
    CHECK(cfg.spacing() == Approx(cfg.wavelength() / 2));
    CHECK(cfg.aperture() == Approx(255 * cfg.spacing()));
    CHECK(cfg.rayleigh_distance() == Approx(348.1).epsilon(1e-3));
    CHECK(cfg.symbol_interval() == Approx(2e-4));

    CHECK_THROWS_AS(ArrayConfig::make(1, 28e9, 5e3, 32), std::invalid_argument);
    CHECK_THROWS_AS(ArrayConfig::make(8, 28e9, 5e3, 0), std::invalid_argument);
    CHECK_THROWS_AS(ArrayConfig::make(8, -1.0, 5e3, 4), std::invalid_argument);
    CHECK_THROWS_AS(ArrayConfig::make(8, 28e9, 0.0, 4), std::invalid_argument);
}

TEST_CASE("fingerprint tracks every synthesis field")
{
    const ArrayConfig base = test::small_array();
    ArrayConfig other = base;
    CHECK(base.fingerprint() == other.fingerprint());
    other.num_symbols += 1;
    CHECK(base.fingerprint() != other.fingerprint());
    other = base;
    other.two_way_spatial = true;
    CHECK(base.fingerprint() != other.fingerprint());
    other = base;
    other.carrier_freq *= 1.0000001;
    CHECK(base.fingerprint() != other.fingerprint());
}

TEST_CASE("element offsets use signed integer indices about the centre")
{
    const ArrayConfig odd = ArrayConfig::make(3, 28e9, 5e3, 1, 0.5);
    const auto o3 = element_offsets(odd);
    REQUIRE(o3.size() == 3);
    CHECK(o3[0] == -0.5);
    CHECK(o3[1] == 0.0);
    CHECK(o3[2] == 0.5);

    const ArrayConfig two = ArrayConfig::make(2, 28e9, 5e3, 1, 1.0);
    const auto o2 = element_offsets(two);
    CHECK(o2[0] == -1.0);
    CHECK(o2[1] == 0.0);

    const ArrayConfig cfg = test::reference_array();
    const auto o = element_offsets(cfg);
    CHECK(o.back() - o.front() == Approx(cfg.aperture()));
    CHECK(o[cfg.num_elements / 2] == 0.0);
}

TEST_CASE("element range against a long double oracle")
{
    const ArrayConfig cfg = test::reference_array();
    const TargetState t{kPi / 12.0, 7.0, 0.0, 0.0};
    for (int i : {0, 1, 100, 128, 200, 255}) {
        const int n = cfg.element_index(i);
        const long double oracle = exact_range_ld(7.0L, static_cast<long double>(n) * cfg.spacing(),
                                                  static_cast<long double>(kPi) / 12.0L);
        CHECK(std::abs(element_range(cfg, t, n) - static_cast<double>(oracle)) < 1e-13);
    }
    CHECK(element_range(cfg, t, 0) == 7.0);

    const TargetState broadside{0.0, 5.0, 0.0, 0.0};
    const double x = 17 * cfg.spacing();
    CHECK(element_range(cfg, broadside, 17) == Approx(std::sqrt(25.0 + x * x)).epsilon(1e-15));
}

TEST_CASE("element range obeys the triangle inequality")
{
    const ArrayConfig cfg = test::small_array();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> th(-1.4, 1.4), rr(0.01, 50.0);
    for (int k = 0; k < 200; ++k) {
        const TargetState t{th(rng), rr(rng), 0.0, 0.0};
        for (int i = 0; i < cfg.num_elements; ++i) {
            const int n = cfg.element_index(i);
            const double x = std::abs(n * cfg.spacing());
            const double rn = element_range(cfg, t, n);
            CHECK(rn >= std::abs(t.range - x) - 1e-12);
            CHECK(rn <= t.range + x + 1e-12);
        }
    }
}

TEST_CASE("second-order range expansion")
{
    const ArrayConfig cfg = test::reference_array();
    const TargetState broadside{0.0, 3.0, 0.0, 0.0};
    const int n = 40;
    const double x = n * cfg.spacing();
    CHECK(taylor_range(cfg, broadside, n) == Approx(3.0 + x * x / 6.0).epsilon(1e-15));
    CHECK(taylor_range(cfg, broadside, 0) == 3.0);

    // At the reference scenario the relative error stays below 1 %.
    const TargetState t{kPi / 12.0, 7.0, 0.0, 0.0};
    double worst = 0.0;
    for (int i = 0; i < cfg.num_elements; ++i) {
        const int k = cfg.element_index(i);
        const double exact = element_range(cfg, t, k);
        worst = std::max(worst, std::abs(taylor_range(cfg, t, k) - exact) / exact);
    }
    CHECK(worst < 0.01);

    for (double scale : {1.0, 10.0}) {
        const TargetState far{kPi / 12.0, scale * cfg.rayleigh_distance(), 0.0, 0.0};
        for (int i = 0; i < cfg.num_elements; ++i) {
            const int k = cfg.element_index(i);
            const double exact = element_range(cfg, far, k);
            CHECK(std::abs(taylor_range(cfg, far, k) - exact) / exact < 1e-4);
        }
    }
}

TEST_CASE("spatial steering")
{
    const ArrayConfig cfg = test::reference_array();
    const TargetState t = test::reference_target(cfg);
    const CVector a = spatial_steering(cfg, t);
    CHECK(std::abs(a.norm() - 1.0) < 1e-12);
    const double inv = 1.0 / std::sqrt(256.0);
    const cd centre = a[cfg.num_elements / 2];
    CHECK(std::abs(centre - cd(inv, 0.0)) < 1e-15);
    for (int i = 0; i < a.size(); ++i)
        CHECK(std::abs(std::abs(a[i]) - inv) < 1e-15);

    // Far field: the residual is the quadratic term, whose edge value is
    // pi cos^2(theta) / (800 s) at r = 100 s r_RD. The 1e-3 rad level is
    // reached at 1000 r_RD.
    for (double scale : {100.0, 1000.0}) {
        const TargetState far{0.4, scale * cfg.rayleigh_distance(), 0.0, 0.0};
        const CVector af = spatial_steering(cfg, far);
        double worst = 0.0;
        for (int i = 0; i < af.size(); ++i) {
            const double x = cfg.element_index(i) * cfg.spacing();
            const cd planar = std::polar(inv, cfg.wavenumber() * x * std::sin(0.4));
            worst = std::max(worst, std::abs(std::arg(af[i] / planar)));
        }
        const double c = std::cos(0.4);
        CHECK(worst <= 1.01 * kPi * c * c / (8.0 * scale));
        if (scale == 1000.0)
            CHECK(worst < 1e-3);
    }

    ArrayConfig two_way = cfg;
    two_way.two_way_spatial = true;
    const CVector a2 = spatial_steering(two_way, t);
    for (int i = 0; i < a.size(); i += 37)
        CHECK(std::abs(std::arg(a2[i] / (a[i] * a[i] / inv))) < 1e-9);
}

TEST_CASE("calibration application and sampling")
{
    const ArrayConfig cfg = test::small_array();
    const CVector a = spatial_steering(cfg, {0.2, 1.0, 0.0, 0.0});
    CHECK(apply_calibration(CalibrationProfile::identity(64), a) == a);

    CalibrationProfile twice = CalibrationProfile::identity(64);
    twice.amplitude.setConstant(2.0);
    CHECK((apply_calibration(twice, a) - 2.0 * a).norm() < 1e-15);

    CHECK_THROWS_AS(apply_calibration(CalibrationProfile::identity(63), a), std::invalid_argument);

    std::mt19937_64 rng(1);
    const CalibrationProfile p = sample_calibration(rng, kPi / 36.0, 1.0, 64);
    CVector back = apply_calibration(p, a);
    for (int i = 0; i < 64; ++i)
        back[i] /= p.weight(i);
    CHECK((back - a).norm() < 1e-15);

    std::mt19937_64 rng0(2);
    CHECK(sample_calibration(rng0, 0.0, 0.0, 64).is_identity());

    std::mt19937_64 big(3);
    const int n = 100000;
    const CalibrationProfile q = sample_calibration(big, kPi / 36.0, 1.0, n);
    CHECK(q.phase.minCoeff() >= 0.0);
    CHECK(q.phase.maxCoeff() <= kPi / 36.0);
    CHECK(q.amplitude.minCoeff() >= 1.0);
    CHECK(q.amplitude.maxCoeff() <= std::pow(10.0, 1.0 / 20.0));
    CHECK(q.phase.mean() == Approx(kPi / 72.0).epsilon(0.01));

    std::mt19937_64 r1(9), r2(9);
    const auto c1 = sample_calibration(r1, 0.1, 1.0, 32);
    const auto c2 = sample_calibration(r2, 0.1, 1.0, 32);
    CHECK(c1.phase == c2.phase);
    CHECK(c1.amplitude == c2.amplitude);
}

TEST_CASE("local velocity")
{
    const ArrayConfig cfg = test::reference_array();
    const TargetState t = test::reference_target(cfg);
    const LocalVelocity centre = local_velocity(t, 0, cfg);
    CHECK(centre.radial == Approx(10.0));
    CHECK(centre.transverse == 0.0);

    // Direct evaluation in long double at the edge element.
    const int n = cfg.element_index(0);
    const long double x = static_cast<long double>(n) * cfg.spacing();
    const long double r = t.range, th = t.theta;
    const long double rn = exact_range_ld(r, x, th);
    const LocalVelocity edge = local_velocity(t, n, cfg);
    CHECK(std::abs(edge.radial - static_cast<double>(10.0L * (r - x * std::sin(th)) / rn)) < 1e-12);
    CHECK(std::abs(edge.transverse - static_cast<double>(8.0L * x * std::cos(th) / rn)) < 1e-12);

    const TargetState far{t.theta, 100.0 * cfg.rayleigh_distance(), 10.0, 8.0};
    for (int i = 0; i < cfg.num_elements; ++i) {
        const LocalVelocity v = local_velocity(far, cfg.element_index(i), cfg);
        CHECK(std::abs(v.radial - 10.0) < 1e-2);
        CHECK(std::abs(v.transverse) < 8e-3);
    }
}

TEST_CASE("doppler steering")
{
    const ArrayConfig cfg = test::small_array();
    const TargetState still{0.3, 1.0, 0.0, 0.0};
    for (int m : {1, 5, 16})
        CHECK((doppler_steering(cfg, still, m) - CVector::Ones(64)).norm() < 1e-15);

    const TargetState radial{0.0, 2.0, 10.0, 0.0};
    const double omega = 2.0 * 10.0 / cfg.wavelength() / cfg.symbol_rate;
    for (int m : {1, 7}) {
        const CVector b = doppler_steering(cfg, radial, m);
        CHECK(std::abs(b[32] - std::polar(1.0, -kPi * m * omega)) < 1e-12);
        for (int i = 0; i < 64; ++i)
            CHECK(std::abs(b[i]) == Approx(1.0));
    }
}

TEST_CASE("space-time matrix")
{
    const ArrayConfig cfg = test::small_array();
    const TargetState still{0.3, 1.0, 0.0, 0.0};
    const CMatrix V0 = space_time_matrix(cfg, still, 1.0);
    const CVector a = spatial_steering(cfg, still);
    for (int m = 0; m < cfg.num_symbols; ++m)
        CHECK((V0.col(m) - a).norm() < 1e-15);
    CHECK(space_time_matrix(cfg, still, 0.0).norm() == 0.0);

    const TargetState moving{-0.4, 0.8, 6.0, -9.0};
    const CMatrix V = space_time_matrix(cfg, moving, 2.5);
    CHECK(V.squaredNorm() == Approx(2.5 * cfg.num_symbols).epsilon(1e-12));
    const CVector am = spatial_steering(cfg, moving);
    for (int m = 1; m <= cfg.num_symbols; m += 5)
        CHECK((V.col(m - 1) - std::sqrt(2.5) * am.cwiseProduct(doppler_steering(cfg, moving, m))).norm() < 1e-13);
}

TEST_CASE("radar equation")
{
    const double base = target_snr(1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK(base == Approx(1.0 / std::pow(4.0 * kPi, 3)));
    CHECK(target_snr(2.0, 3.0, 0.01, 5.0, 10.0) == Approx(2.0 * 9.0 * 1e-4 * 5.0 / (std::pow(4.0 * kPi, 3) * 1e4)));
    CHECK(target_snr(1.0, 1.0, 1.0, 1.0, 2.0) == Approx(base / 16.0));
    CHECK_THROWS_AS(target_snr(0.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(target_snr(1.0, 1.0, 1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("target validation")
{
    CHECK_THROWS_AS((TargetState{0.0, 0.0, 0.0, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TargetState{kPi / 2, 1.0, 0.0, 0.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((TargetState{1.5, 1.0, 0.0, 0.0}.validate()));
}
