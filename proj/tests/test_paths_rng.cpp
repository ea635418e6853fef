#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "mfgtrack/estimate.hpp"
#include "mfgtrack/paths.hpp"
#include "oracles.hpp"

using namespace mfgtrack;

namespace {
const ModelParams p = testcfg::baseline();
const DerivedConstants c = derive_constants(p);
}  // namespace

TEST_CASE("stream determinism and independence") {
    RngStream a(42, 7), b(42, 7), d(42, 8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a.next_u64();
        all_equal = all_equal && (x == b.next_u64());
        any_diff = any_diff || (x != d.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("normal draws look standard") {
    RngStream rng(9, 0);
    MeanAccumulator m, m2;
    for (int i = 0; i < 200000; ++i) {
        const double x = rng.normal();
        m.add(x);
        m2.add(x * x);
    }
    CHECK(std::fabs(m.estimate().value) < 3.0 * m.estimate().std_error + 1e-3);
    CHECK(m2.estimate().value == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("reflected path invariants") {
    const TimeGrid grid(0.0, 1.0, 500);
    for (std::uint64_t path = 0; path < 200; ++path) {
        RngStream rng(123, path);
        const PathBundle b = simulate_reflected(c, grid, 0.7, rng);
        double prev_l = -1.0;
        for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
            CHECK(b.reflected[k] >= 0.0);  // exact, not within tolerance
            CHECK(b.local_time[k] >= prev_l);
            CHECK(b.dual[k] > 0.0);
            CHECK(b.dual[k] <= 1.0);
            if (b.local_time[k] > prev_l && k > 0) {
                // local time moved: the driver just set a new running maximum,
                // so the reflected path sits exactly on the boundary
                CHECK(b.reflected[k] == 0.0);
            }
            if (b.reflected[k] == 0.0) CHECK(b.dual[k] == 1.0);
            prev_l = b.local_time[k];
        }
        CHECK(b.local_time[0] == 0.0);
    }
}

TEST_CASE("boundary start accumulates local time immediately") {
    const TimeGrid grid(0.0, 1.0, 500);
    for (std::uint64_t path = 0; path < 50; ++path) {
        RngStream rng(5, path);
        const PathBundle b = simulate_reflected(c, grid, 0.0, rng);
        CHECK(b.tau_idx == 0);
        CHECK(b.local_time.back() > 0.0);
        CHECK(hitting_time_tau(b, grid) == 0.0);
    }
}

TEST_CASE("bit-identical reruns") {
    const TimeGrid grid(0.0, 1.0, 300);
    RngStream r1(77, 3), r2(77, 3);
    const PathBundle a = simulate_joint(p, c, grid, 1.0, 20.0, r1);
    const PathBundle b = simulate_joint(p, c, grid, 1.0, 20.0, r2);
    CHECK(a.dw == b.dw);
    CHECK(a.reflected == b.reflected);
    CHECK(a.local_time == b.local_time);
    CHECK(a.index == b.index);
    CHECK(a.tau_idx == b.tau_idx);
}

TEST_CASE("common random numbers couple R and Z") {
    const TimeGrid grid(0.0, 1.0, 200);
    RngStream r1(77, 3), r2(77, 3);
    const PathBundle joint = simulate_joint(p, c, grid, 1.0, 20.0, r1);
    const std::vector<double> z = simulate_gbm(p, grid, 20.0, r2);
    CHECK(joint.index == z);
}

TEST_CASE("far-from-boundary mean matches the unreflected drift") {
    const TimeGrid grid(0.0, 1.0, 500);
    MeanAccumulator acc;
    for (std::uint64_t path = 0; path < 100000; ++path) {
        RngStream rng(2024, path);
        const PathBundle b = simulate_reflected(c, grid, 5.0, rng);
        acc.add(b.reflected.back());
    }
    const McEstimate e = acc.estimate();
    // reflection probability at distance 5 is ~ first-passage to level 5
    const double p_reflect = oracles::first_passage_prob(-c.r_drift, c.r_vol, 5.0, 1.0);
    CHECK(p_reflect < 1e-4);
    CHECK(std::fabs(e.value - 4.5) < 3.0 * e.std_error + 10.0 * p_reflect);
}

TEST_CASE("index path matches the GBM mean and edge cases") {
    const TimeGrid grid(0.0, 1.0, 500);
    MeanAccumulator acc;
    for (std::uint64_t path = 0; path < 100000; ++path) {
        RngStream rng(11, path);
        const std::vector<double> z = simulate_gbm(p, grid, 20.0, rng);
        acc.add(z.back());
        if (path < 100)
            for (double v : z) CHECK(v > 0.0);
    }
    const McEstimate e = acc.estimate();
    CHECK(std::fabs(e.value - 20.0 * std::exp(0.2)) < 3.0 * e.std_error);

    RngStream rng(1, 0);
    const std::vector<double> z0 = simulate_gbm(p, grid, 0.0, rng);
    for (double v : z0) CHECK(v == 0.0);

    ModelParams tiny = p;
    tiny.sigma_z = 1e-8;
    RngStream rng2(1, 0);
    const std::vector<double> zdet = simulate_gbm(tiny, grid, 20.0, rng2);
    CHECK(zdet.back() == doctest::Approx(20.0 * std::exp(0.2)).epsilon(1e-5));
}

TEST_CASE("hitting probability against the first-passage formula") {
    const TimeGrid grid(0.0, 1.0, 500);
    const double level = 1.0;
    MeanAccumulator acc;
    for (std::uint64_t path = 0; path < 100000; ++path) {
        RngStream rng(31, path);
        const PathBundle b = simulate_reflected(c, grid, level, rng);
        acc.add(b.tau_idx == PathBundle::kNever ? 0.0 : 1.0);
    }
    const McEstimate e = acc.estimate();
    const double exact = oracles::first_passage_prob(-c.r_drift, c.r_vol, level, 1.0);
    // grid detection misses excursions between nodes, a O(sqrt(dt)) downward bias
    CHECK(e.value < exact);
    CHECK(std::fabs(e.value - exact) < 3.0 * e.std_error + 0.025);
}

TEST_CASE("sentinel hitting time is the horizon") {
    const TimeGrid grid(0.0, 1.0, 100);
    PathBundle b;
    b.reflected.assign(grid.n_nodes(), 1.0);
    b.tau_idx = PathBundle::kNever;
    CHECK(hitting_time_tau(b, grid) == 1.0);
}
