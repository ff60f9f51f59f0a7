// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nfm/fresnel.hpp"
#include "nfm/spectrum.hpp"
#include "test_support.hpp"

using namespace nfm;

namespace {

FresnelPair quadrature(double x)
{
    using boost::math::quadrature::gauss_kronrod;
    auto c = [](double t) { return std::cos(0.5 * kPi * t * t); };
    auto s = [](double t) { return std::sin(0.5 * kPi * t * t); };
    // Split into unit pieces so the oscillation stays resolved.
    FresnelPair out;
    const double sign = x < 0 ? -1.0 : 1.0;
    const double ax = std::abs(x);
    for (double a = 0.0; a < ax; a += 0.5) {
        const double b = std::min(ax, a + 0.5);
        out.C += gauss_kronrod<double, 61>::integrate(c, a, b, 15, 1e-14);
        out.S += gauss_kronrod<double, 61>::integrate(s, a, b, 15, 1e-14);
    }
    out.C *= sign;
    out.S *= sign;
    return out;
}

double db(double v)
{
    return 10.0 * std::log10(v);
}

}  // namespace

TEST_CASE("fresnel integrals against quadrature")
{
    CHECK(fresnel(0.0).C == 0.0);
    CHECK(fresnel(0.0).S == 0.0);
    for (double x : {0.5, 1.0, 2.0, 0.01, 0.3, 1.7, 2.5, 3.3, 4.9, 5.1, 7.2, 12.0, 25.0}) {
        const FresnelPair f = fresnel(x);
        const FresnelPair q = quadrature(x);
        INFO("x = " << x);
        CHECK(std::abs(f.C - q.C) < 1e-8);
        CHECK(std::abs(f.S - q.S) < 1e-8);
    }
}

TEST_CASE("fresnel symmetry and limits")
{
    for (double x = -8.0; x <= 8.0; x += 0.173) {
        const FresnelPair p = fresnel(x), m = fresnel(-x);
        CHECK(p.C == -m.C);
        CHECK(p.S == -m.S);
        CHECK(std::abs(p.C) <= 0.9);
        CHECK(std::abs(p.S) <= 0.9);
    }
    CHECK(std::abs(fresnel(10.0).C - 0.5) < 0.02);
    // S(10) = 0.46817 sits 0.032 from its limit; the leading asymptotic term
    // 0.5 - cos(pi x^2 / 2) / (pi x) accounts for the gap.
    CHECK(std::abs(fresnel(10.0).S - 0.4681699785) < 1e-8);
    CHECK(std::abs(fresnel(10.0).S - (0.5 - 1.0 / (10.0 * kPi))) < 1e-3);
    CHECK(std::abs(fresnel(1e4).C - 0.5) < 1e-4);
}

TEST_CASE("closed-form angular gain agrees with the direct sum on the main lobe")
{
    const ArrayConfig cfg = test::reference_array();
    const double rd = cfg.rayleigh_distance();
    for (double theta_u : {0.0, kPi / 12.0, kPi / 6.0})
        for (double rf : {rd / 100.0, rd / 50.0, rd / 20.0}) {
            const double su = std::sin(theta_u);
            std::vector<double> grid, g_sum;
            for (double ds = -0.2; ds <= 0.2; ds += 0.0005)
                if (std::abs(su + ds) < 1.0) {
                    grid.push_back(std::asin(su + ds));
                    g_sum.push_back(analytic_angular_gain_sum(cfg, theta_u, rf, grid.back()));
                }
            const double peak = *std::max_element(g_sum.begin(), g_sum.end());
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (g_sum[k] <= 0.5 * peak)
                    continue;
                const double g_fr = analytic_angular_gain_fresnel(cfg, theta_u, rf, grid[k]);
                CHECK(std::abs(db(g_fr) - db(g_sum[k])) < 0.5);
            }
        }
}

TEST_CASE("closed-form gain symmetry and planar fallback")
{
    const ArrayConfig cfg = test::reference_array();
    const double rf = cfg.rayleigh_distance() / 50.0;
    for (double s : {0.01, 0.05, 0.1})
        CHECK(analytic_angular_gain_fresnel(cfg, 0.0, rf, std::asin(s)) ==
              Catch::Approx(analytic_angular_gain_fresnel(cfg, 0.0, rf, std::asin(-s))).epsilon(1e-12));
    // gamma_2 vanishes as r_f grows: the Dirichlet fallback matches the direct sum.
    const double far = 1e30;
    for (double s : {0.0, 0.003, 0.01})
        CHECK(analytic_angular_gain_fresnel(cfg, 0.2, far, std::asin(std::sin(0.2) + s)) ==
              Catch::Approx(analytic_angular_gain_sum(cfg, 0.2, far, std::asin(std::sin(0.2) + s))).margin(1e-9));
}
