#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "mfgtrack/mfe.hpp"
#include "mfgtrack/nplayer.hpp"
#include "mfgtrack/strategy.hpp"

using namespace mfgtrack;

namespace {
const ModelParams p = testcfg::baseline();

SolveConfig quick_cfg() {
    SolveConfig cfg;
    cfg.curve_intervals = 50;
    cfg.sim_steps = 250;
    cfg.kernel_paths = 4000;
    cfg.certificate_paths = 8000;
    cfg.x_paths = 20000;
    cfg.seed = 616;
    return cfg;
}

StrategyConfig quick_strategy() {
    StrategyConfig scfg;
    scfg.psi_paths = 4000;
    scfg.psi_r_points = 28;
    scfg.basis_dr = 0.02;
    scfg.seed = 616;
    return scfg;
}
}  // namespace

TEST_CASE("objective evaluators agree to rounding") {
    const TimeGrid grid(0.0, 1.0, 200);
    RngStream rng(5, 0);
    std::vector<double> lt(grid.n_nodes());
    lt[0] = 0.0;
    for (std::size_t k = 1; k < lt.size(); ++k)
        lt[k] = lt[k - 1] + (rng.uniform() < 0.3 ? rng.uniform() * 0.01 : 0.0);

    const double a = discounted_local_time_stieltjes(lt, grid, 1.0, 0.0);
    const double b = discounted_local_time_ibp(lt, grid, 1.0, 0.0);
    CHECK(std::fabs(a - b) < 1e-10);
    CHECK(a <= 0.0);

    const std::vector<double> flat(grid.n_nodes(), 0.0);
    CHECK(discounted_local_time_ibp(flat, grid, 1.0, 0.0) == 0.0);

    const McEstimate obj = objective_value({lt, flat}, grid, 1.0, 0.0);
    CHECK(obj.value <= 0.0);
    CHECK(obj.n_paths == 2);
}

TEST_CASE("heterogeneity schedule stays valid and converges") {
    const auto agents = heterogeneous_agents(p, 16, 0.1);
    CHECK(agents.size() == 16);
    for (const auto& a : agents) {
        CHECK_NOTHROW(a.params.validate());
        CHECK(std::fabs(a.params.mu - p.mu) <= 0.1 * p.mu / 4.0 + 1e-12);
    }
    const auto many = heterogeneous_agents(p, 400, 0.1);
    for (const auto& a : many) CHECK(std::fabs(a.params.mu - p.mu) <= 0.1 * p.mu / 20.0 + 1e-12);
}

TEST_CASE("single agent without competition decouples exactly") {
    ModelParams q = p;
    q.lambda = 0.0;
    const MfeSolver solver(q, quick_cfg());
    const double x_hat = threshold_hat_x0(q, 20.0);
    const MfeResult res = solver.solve(0.5 * x_hat, 20.0);
    REQUIRE(res.region == Region::underperforming);
    const StrategyContext ctx(solver, res, quick_strategy());

    const auto agents = homogeneous_agents(q, 1);
    NplayerConfig ncfg;
    ncfg.n_reps = 200;
    ncfg.steps = 200;
    ncfg.seed = 99;
    const NashGapReport rep = estimate_gap(agents, {&ctx}, 0.5 * x_hat, 20.0, ncfg);
    CHECK(rep.gap_bound == 0.0);  // no coupling at all, identical noise
    for (const auto& e : rep.entries) {
        CHECK(e.sup_dl_equilibrium == 0.0);
        CHECK(e.sup_dl_deviation == 0.0);
    }
}

TEST_CASE("population simulation invariants and drift") {
    const MfeSolver solver(p, quick_cfg());
    const MfeResult res = solver.solve(2.0308, 20.0);
    const StrategyContext ctx(solver, res, quick_strategy());
    const auto agents = homogeneous_agents(p, 8);
    std::vector<const StrategyContext*> ctxs(8, &ctx);
    const TimeGrid grid(0.0, 1.0, 200);

    const PopulationPaths pop = simulate_population_once(agents, ctxs, 2.0308, 20.0, grid, 1234, 0);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(pop.local_time[j][0] == 0.0);
        for (std::size_t k = 0; k + 1 < grid.n_nodes(); ++k) {
            CHECK(pop.local_time[j][k + 1] >= pop.local_time[j][k]);
            CHECK(pop.x[j][k] >= 0.0);
        }
    }
    // same seed, same replication: identical population
    const PopulationPaths again = simulate_population_once(agents, ctxs, 2.0308, 20.0, grid, 1234, 0);
    CHECK(pop.avg_mu_theta == again.avg_mu_theta);
}

TEST_CASE("gap estimates shrink with the population") {
    const MfeSolver solver(p, quick_cfg());
    const MfeResult res = solver.solve(2.0308, 20.0);
    const StrategyContext ctx(solver, res, quick_strategy());

    double prev_bound = 1e9;
    for (std::size_t n : {2u, 16u}) {
        const auto agents = homogeneous_agents(p, n);
        std::vector<const StrategyContext*> ctxs(n, &ctx);
        NplayerConfig ncfg;
        ncfg.n_reps = 400;
        ncfg.steps = 150;
        ncfg.seed = 2025;
        const NashGapReport rep = estimate_gap(agents, ctxs, 2.0308, 20.0, ncfg);
        CHECK(rep.gap_bound >= 0.0);
        CHECK(rep.gap_bound < prev_bound);
        prev_bound = rep.gap_bound;

        // objective gaps for probed deviations cannot beat the bound by more
        // than noise
        for (const auto& e : rep.entries)
            CHECK(e.objective_gap.value <= rep.gap_bound + 3.0 * e.objective_gap.std_error + 1e-6);

        // probes all admissible under the recorded constant
        CHECK(rep.admissibility_c0 * (1.0 + 2.0308 * 2.0308 + 400.0) >= 4.0 * rep.sup_theta_sq);
    }
}
