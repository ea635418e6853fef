#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfgtrack/estimate.hpp"
#include "mfgtrack/grid.hpp"
#include "mfgtrack/params.hpp"
#include "mfgtrack/strategy.hpp"

namespace mfgtrack {

struct AgentSpec {
    ModelParams params;
    DerivedConstants consts;
    std::uint64_t noise_stream{0};
};

std::vector<AgentSpec> homogeneous_agents(const ModelParams& p, std::size_t n);

// params^{i,n} = limit * (1 + delta * u_i / sqrt(n)) with a fixed ladder
// u_i in [-1, 1]; scaling all four market parameters and lambda by the same
// factor preserves the Sharpe ordering.
std::vector<AgentSpec> heterogeneous_agents(const ModelParams& p, std::size_t n, double delta);

// Discounted local-time cost -int_t0^T e^{-rho (s-t0)} dL_s per path: the
// Stieltjes sum with left-endpoint discounting and its Abel-summation
// (integration by parts) rearrangement. They agree to rounding.
double discounted_local_time_stieltjes(const std::vector<double>& local_time, const TimeGrid& grid,
                                       double rho, double t0);
double discounted_local_time_ibp(const std::vector<double>& local_time, const TimeGrid& grid,
                                 double rho, double t0);

McEstimate objective_value(const std::vector<std::vector<double>>& local_time_paths,
                           const TimeGrid& grid, double rho, double t0);

// One replication of the coupled population under the mean-field strategies.
struct PopulationPaths {
    TimeGrid grid;
    std::vector<std::vector<double>> theta;  // per agent, per node
    std::vector<std::vector<double>> x;      // coupled reflected states
    std::vector<std::vector<double>> local_time;
    std::vector<double> avg_mu_theta;  // (1/n) sum_j mu^j theta^j per node
};

PopulationPaths simulate_population_once(const std::vector<AgentSpec>& agents,
                                         const std::vector<const StrategyContext*>& ctxs, double x0,
                                         double z0, const TimeGrid& grid, std::uint64_t seed,
                                         std::size_t replication);

struct GapEntry {
    std::string deviation_id;
    double scale{1.0};
    double sup_dl_deviation{0.0};  // sup_s E|L^{*,-i,n} - Lbar^{i,n}|
    double sup_dl_equilibrium{0.0};  // sup_s E|L^{*,i,n} - Lbar^{*,i,n}|
    double gap_bound{0.0};           // (1 + rho (T - t0)) * (both suprema)
    McEstimate objective;            // J(deviation against the equilibrium crowd)
    McEstimate objective_gap;        // J(deviation) - J(equilibrium), paired paths
};

struct NashGapReport {
    std::size_t n_agents{0};
    std::size_t n_reps{0};
    std::vector<GapEntry> entries;
    double gap_bound{0.0};  // worst probe
    McEstimate objective_equilibrium;
    std::vector<double> empirical_drift, empirical_drift_se, f_star_nodes;
    double sup_drift_gap{0.0};
    double sup_theta_sq{0.0};        // sup_s mean(theta_0^2)
    double admissibility_c0{0.0};    // 10 x sup_theta_sq / (1 + x0^2 + z0^2)
};

struct NplayerConfig {
    std::size_t n_reps{1000};
    std::size_t steps{200};
    std::uint64_t seed{7};
    std::vector<double> deviation_scales{0.0, 0.5, 1.0, 1.5, 2.0};
    std::size_t probe_agent{0};
};

NashGapReport estimate_gap(const std::vector<AgentSpec>& agents,
                           const std::vector<const StrategyContext*>& ctxs, double x0, double z0,
                           const NplayerConfig& cfg);

}  // namespace mfgtrack
