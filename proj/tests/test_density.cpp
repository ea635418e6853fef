#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "common.hpp"
#include "doctest.h"
#include "mfgtrack/density.hpp"
#include "mfgtrack/estimate.hpp"
#include "oracles.hpp"

using namespace mfgtrack;

namespace {
const ModelParams p = testcfg::baseline();
const DerivedConstants c = derive_constants(p);
// the driving law whose (position, running max) pair has density phi
const double nu = -c.r_drift;   // = rho - mu^2 / (2 sigma^2)
const double vol = c.r_vol;
}  // namespace

TEST_CASE("phi point values and domain") {
    CHECK(phi_density(c, 1.0, 0.0, 1.0) == doctest::Approx(0.1905780).epsilon(1e-5));
    CHECK(phi_density(c, 0.5, 0.0, 0.0) == 0.0);  // prefactor 2y - x vanishes
    CHECK_THROWS_AS(phi_density(c, 0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(phi_density(c, -1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(phi_density(c, 1.0, 2.0, 1.0), std::domain_error);  // x > y
    CHECK_THROWS_AS(phi_density(c, 1.0, 0.0, -0.5), std::domain_error);
}

TEST_CASE("phi matches the exactly sampled joint law") {
    // 2-d histogram against exact (position, running max) draws; cell masses
    // integrated on a sub-grid because the density is supported on y >= (x)^+
    const double s = 1.0;
    const std::size_t nx = 24, ny = 24;
    const double x_lo = -3.5, x_hi = 3.5, y_lo = 0.0, y_hi = 3.5;
    const double dx = (x_hi - x_lo) / nx, dy = (y_hi - y_lo) / ny;
    std::vector<double> counts(nx * ny, 0.0);
    const std::size_t n_samples = 1000000;
    RngStream rng(2718, 0);
    std::size_t in_range = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto [x, m] = oracles::position_max_sample(nu, vol, s, rng);
        if (x < x_lo || x >= x_hi || m >= y_hi) continue;
        ++in_range;
        const auto ix = static_cast<std::size_t>((x - x_lo) / dx);
        const auto iy = static_cast<std::size_t>((m - y_lo) / dy);
        counts[ix * ny + iy] += 1.0;
    }
    CHECK(in_range > 0.99 * n_samples);

    const std::size_t sub = 12;
    double l1 = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iy = 0; iy < ny; ++iy) {
            double mass = 0.0;
            for (std::size_t a = 0; a < sub; ++a)
                for (std::size_t b = 0; b < sub; ++b) {
                    const double xm = x_lo + (ix + (a + 0.5) / sub) * dx;
                    const double ym = y_lo + (iy + (b + 0.5) / sub) * dy;
                    if (ym >= xm && ym >= 0.0) mass += phi_density(c, s, xm, ym);
                }
            mass *= dx * dy / static_cast<double>(sub * sub);
            l1 += std::fabs(counts[ix * ny + iy] / static_cast<double>(n_samples) - mass);
        }
    CHECK(l1 < 0.04);
}

TEST_CASE("quadrature equals the closed form") {
    for (double tau : {0.05, 0.25, 0.5, 1.0})
        for (double r : {0.0, 0.3, 1.0, 2.5, 6.0})
            for (double a : {0.0, 0.9, 1.0}) {
                const double got = inner_phi_integral(c, tau, r, a);
                const double want = oracles::inner_integral_closed_form(c, tau, r, a);
                CHECK(got == doctest::Approx(want).epsilon(1e-8));
            }
}

TEST_CASE("weightless integral is the running-max density") {
    for (double tau : {0.25, 1.0})
        for (double r : {0.2, 0.8, 1.5}) {
            const double got = inner_phi_integral(c, tau, r, 0.0);
            CHECK(got == doctest::Approx(oracles::running_max_density(nu, vol, tau, r)).epsilon(1e-7));
        }
}

TEST_CASE("running-max density matches exact sampling") {
    const double tau = 1.0, r = 1.0, half = 0.05;
    MeanAccumulator acc;
    RngStream rng(99, 0);
    for (std::size_t i = 0; i < 400000; ++i) {
        const auto [x, m] = oracles::position_max_sample(nu, vol, tau, rng);
        (void)x;
        acc.add(std::fabs(m - r) < half ? 1.0 / (2.0 * half) : 0.0);
    }
    const McEstimate e = acc.estimate();
    CHECK(std::fabs(e.value - inner_phi_integral(c, tau, r, 0.0)) < 3.0 * e.std_error + 2e-3);
}

TEST_CASE("short horizons put no mass under the weight") {
    CHECK(inner_phi_integral(c, 1e-4, 1.0, 1.0) < 1e-6);
}

TEST_CASE("binned Monte Carlo agrees with the quadrature") {
    // E[e^{a X} ; M in (r - h, r + h)] / (2h) -> inner integral as h -> 0
    const double tau = 0.5, r = 1.0, a = 1.0, half = 0.02;
    MeanAccumulator acc;
    RngStream rng(123, 1);
    for (std::size_t i = 0; i < 1000000; ++i) {
        const auto [x, m] = oracles::position_max_sample(nu, vol, tau, rng);
        acc.add(std::fabs(m - r) < half ? std::exp(a * x) / (2.0 * half) : 0.0);
    }
    const McEstimate e = acc.estimate();
    const double got = inner_phi_integral(c, tau, r, a);
    CHECK(std::fabs(e.value - got) < 3.0 * e.std_error + 2e-3);
}

TEST_CASE("joint normalization") {
    // integrate phi over {y >= max(x, 0)} by nested quadrature on the
    // substituted inner integral: int_0^inf (a = 0 integral) dy = 1
    for (double s : {0.25, 1.0}) {
        double total = 0.0;
        const double dy = 0.01;
        for (double y = 0.5 * dy; y < 8.0; y += dy) total += inner_phi_integral(c, s, y, 0.0) * dy;
        CHECK(total == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("tabulated integrals interpolate the direct ones") {
    const InnerIntegralTable tab(c, 1.0, 0.01, 100, 8.0, 800);
    CHECK(tab.at(0, 1.0) == 0.0);
    for (std::size_t d : {1u, 10u, 50u, 100u})
        for (double r : {0.0, 0.123, 0.87, 2.41, 5.0}) {
            const double direct = inner_phi_integral(c, 0.01 * d, r, 1.0);
            CHECK(tab.at(d, r) == doctest::Approx(direct).epsilon(2e-3).scale(1.0));
        }
}
