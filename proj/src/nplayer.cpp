#include "mfgtrack/nplayer.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <stdexcept>

#include "mfgtrack/parallel.hpp"
#include "mfgtrack/paths.hpp"

namespace mfgtrack {

namespace {

constexpr std::size_t kRepChunk = 8;

// Skorokhod transform of driver increments starting from x0.
void reflect_increments(double x0, const std::vector<double>& dd, std::vector<double>& x,
                        std::vector<double>& lt) {
    const std::size_t n_nodes = dd.size() + 1;
    x.resize(n_nodes);
    lt.resize(n_nodes);
    double d = x0;
    double run_max = -d > 0.0 ? -d : 0.0;
    lt[0] = run_max;
    x[0] = d + run_max;
    for (std::size_t k = 1; k < n_nodes; ++k) {
        d += dd[k - 1];
        if (-d > run_max) run_max = -d;
        lt[k] = run_max;
        x[k] = d + run_max;
    }
}

struct AgentPaths {
    std::vector<double> r, z, theta;
    std::vector<double> dw;
};

void simulate_agent(const AgentSpec& a, const StrategyContext& ctx, double z0, const TimeGrid& grid,
                    std::uint64_t seed, std::size_t stream, AgentPaths& out) {
    RngStream rng(seed, stream);
    PathBundle b = simulate_joint(a.params, a.consts, grid,
                                  ctx.region() == Region::underperforming ? ctx.r0() : 0.0, z0, rng);
    out.r = std::move(b.reflected);
    out.z = std::move(b.index);
    out.dw = std::move(b.dw);
    out.theta.resize(grid.n_nodes());
    for (std::size_t k = 0; k < grid.n_nodes(); ++k)
        out.theta[k] = ctx.theta(grid.node(k), out.r[k], out.z[k]);
}

}  // namespace

std::vector<AgentSpec> homogeneous_agents(const ModelParams& p, std::size_t n) {
    p.validate();
    std::vector<AgentSpec> agents(n);
    for (std::size_t i = 0; i < n; ++i) {
        agents[i].params = p;
        agents[i].consts = derive_constants(p);
        agents[i].noise_stream = i;
    }
    return agents;
}

std::vector<AgentSpec> heterogeneous_agents(const ModelParams& p, std::size_t n, double delta) {
    p.validate();
    std::vector<AgentSpec> agents(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        const double factor = 1.0 + delta * u / std::sqrt(static_cast<double>(n));
        ModelParams q = p;
        q.mu *= factor;
        q.sigma *= factor;
        q.mu_z *= factor;
        q.sigma_z *= factor;
        q.lambda = std::min(1.0, std::max(0.0, p.lambda * factor));
        q.validate();
        agents[i].params = q;
        agents[i].consts = derive_constants(q);
        agents[i].noise_stream = i;
    }
    return agents;
}

double discounted_local_time_stieltjes(const std::vector<double>& local_time, const TimeGrid& grid,
                                       double rho, double t0) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < local_time.size(); ++k)
        acc += std::exp(-rho * (grid.node(k) - t0)) * (local_time[k + 1] - local_time[k]);
    return -acc;
}

double discounted_local_time_ibp(const std::vector<double>& local_time, const TimeGrid& grid,
                                 double rho, double t0) {
    // Abel summation of the Stieltjes sum: a_{N-1} L_N - sum_k (a_k - a_{k-1}) L_k - a_0 L_0
    const std::size_t n = local_time.size() - 1;
    double acc = std::exp(-rho * (grid.node(n - 1) - t0)) * local_time[n];
    for (std::size_t k = 1; k < n; ++k)
        acc -= (std::exp(-rho * (grid.node(k) - t0)) - std::exp(-rho * (grid.node(k - 1) - t0)))
               * local_time[k];
    acc -= std::exp(-rho * (grid.node(0) - t0)) * local_time[0];
    return -acc;
}

McEstimate objective_value(const std::vector<std::vector<double>>& local_time_paths,
                           const TimeGrid& grid, double rho, double t0) {
    MeanAccumulator acc;
    for (const auto& lt : local_time_paths) acc.add(discounted_local_time_ibp(lt, grid, rho, t0));
    return acc.estimate();
}

PopulationPaths simulate_population_once(const std::vector<AgentSpec>& agents,
                                         const std::vector<const StrategyContext*>& ctxs, double x0,
                                         double z0, const TimeGrid& grid, std::uint64_t seed,
                                         std::size_t replication) {
    const std::size_t n = agents.size();
    if (ctxs.size() != n) throw std::invalid_argument("simulate_population_once: one context per agent");
    const std::size_t n_nodes = grid.n_nodes();
    const double dt = grid.dt();

    PopulationPaths out;
    out.grid = grid;
    out.theta.resize(n);
    out.x.resize(n);
    out.local_time.resize(n);
    out.avg_mu_theta.assign(n_nodes, 0.0);
    // population-wealth diffusion increment: each agent's wealth noise rides
    // its own Brownian motion, so the average is an O(1/sqrt(n)) term
    std::vector<double> avg_vol_inc(grid.n_steps, 0.0);

    std::vector<AgentPaths> ap(n);
    for (std::size_t j = 0; j < n; ++j) {
        simulate_agent(agents[j], *ctxs[j], z0, grid, seed, replication * n + agents[j].noise_stream, ap[j]);
        for (std::size_t k = 0; k < n_nodes; ++k)
            out.avg_mu_theta[k] += agents[j].params.mu * ap[j].theta[k] / static_cast<double>(n);
        for (std::size_t k = 0; k < grid.n_steps; ++k)
            avg_vol_inc[k] += agents[j].params.sigma * ap[j].theta[k] * ap[j].dw[k]
                              / static_cast<double>(n);
    }

    std::vector<double> dd(grid.n_steps);
    for (std::size_t j = 0; j < n; ++j) {
        const ModelParams& q = agents[j].params;
        for (std::size_t k = 0; k < grid.n_steps; ++k) {
            const double drift = ap[j].theta[k] * q.mu - q.lambda * out.avg_mu_theta[k]
                                 - (1.0 - q.lambda) * q.mu_z * ap[j].z[k];
            const double own_vol = ap[j].theta[k] * q.sigma - (1.0 - q.lambda) * q.sigma_z * ap[j].z[k];
            dd[k] = drift * dt + own_vol * ap[j].dw[k] - q.lambda * avg_vol_inc[k];
        }
        reflect_increments(x0, dd, out.x[j], out.local_time[j]);
        out.theta[j] = std::move(ap[j].theta);
    }
    return out;
}

NashGapReport estimate_gap(const std::vector<AgentSpec>& agents,
                           const std::vector<const StrategyContext*>& ctxs, double x0, double z0,
                           const NplayerConfig& cfg) {
    const std::size_t n = agents.size();
    if (n == 0 || ctxs.size() != n) throw std::invalid_argument("estimate_gap: one context per agent");
    if (cfg.probe_agent >= n) throw std::invalid_argument("estimate_gap: probe agent out of range");
    const TimeGrid grid(0.0, agents[0].params.horizon, cfg.steps);
    const std::size_t n_nodes = grid.n_nodes();
    const double dt = grid.dt();
    const std::size_t i0 = cfg.probe_agent;
    const std::size_t n_dev = cfg.deviation_scales.size();
    const Curve& f_star = ctxs[i0]->f_star();

    std::vector<double> f_nodes(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) f_nodes[k] = f_star.value(grid.node(k));

    struct ChunkAcc {
        std::vector<double> dl_dev_sum;         // n_dev x n_nodes
        std::vector<double> dl_eq_sum;          // n_nodes
        std::vector<double> drift_sum, drift_sq;  // n_nodes
        std::vector<double> theta_sq_sum;       // n_nodes
        std::vector<MeanAccumulator> obj_dev;   // n_dev
        std::vector<MeanAccumulator> obj_gap;   // n_dev (paired difference)
        MeanAccumulator obj_eq;
        std::size_t n{0};
    };
    std::vector<ChunkAcc> acc(chunk_count(cfg.n_reps, kRepChunk));

    parallel_chunks(cfg.n_reps, kRepChunk, [&](std::size_t chunk, std::size_t first, std::size_t last) {
        ChunkAcc local;
        local.dl_dev_sum.assign(n_dev * n_nodes, 0.0);
        local.dl_eq_sum.assign(n_nodes, 0.0);
        local.drift_sum.assign(n_nodes, 0.0);
        local.drift_sq.assign(n_nodes, 0.0);
        local.theta_sq_sum.assign(n_nodes, 0.0);
        local.obj_dev.assign(n_dev, {});
        local.obj_gap.assign(n_dev, {});

        std::vector<AgentPaths> ap(n);
        std::vector<double> avg_mu(n_nodes), avg_vol_inc(grid.n_steps), dd(grid.n_steps);
        std::vector<double> x_tmp, l_coupled, l_dec_eq, l_dev_coupled, l_dev_dec;

        for (std::size_t rep = first; rep < last; ++rep) {
            for (std::size_t j = 0; j < n; ++j)
                simulate_agent(agents[j], *ctxs[j], z0, grid, cfg.seed,
                               rep * n + agents[j].noise_stream, ap[j]);
            std::fill(avg_mu.begin(), avg_mu.end(), 0.0);
            std::fill(avg_vol_inc.begin(), avg_vol_inc.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n_nodes; ++k)
                    avg_mu[k] += agents[j].params.mu * ap[j].theta[k] / static_cast<double>(n);
                // each wealth diffusion rides its own Brownian motion
                for (std::size_t k = 0; k < grid.n_steps; ++k)
                    avg_vol_inc[k] += agents[j].params.sigma * ap[j].theta[k] * ap[j].dw[k]
                                      / static_cast<double>(n);
            }
            ++local.n;

            const ModelParams& q = agents[i0].params;
            const AgentPaths& a0 = ap[i0];

            for (std::size_t k = 0; k < n_nodes; ++k) {
                local.drift_sum[k] += avg_mu[k];
                local.drift_sq[k] += avg_mu[k] * avg_mu[k];
                local.theta_sq_sum[k] += a0.theta[k] * a0.theta[k];
            }

            // coupled system under the full equilibrium profile
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
                const double drift = a0.theta[k] * q.mu - q.lambda * avg_mu[k]
                                     - (1.0 - q.lambda) * q.mu_z * a0.z[k];
                const double own_vol = a0.theta[k] * q.sigma - (1.0 - q.lambda) * q.sigma_z * a0.z[k];
                dd[k] = drift * dt + own_vol * a0.dw[k] - q.lambda * avg_vol_inc[k];
            }
            reflect_increments(x0, dd, x_tmp, l_coupled);

            // decoupled system under the equilibrium strategy
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
                const double drift = a0.theta[k] * q.mu - q.lambda * f_nodes[k]
                                     - (1.0 - q.lambda) * q.mu_z * a0.z[k];
                const double vol = a0.theta[k] * q.sigma - (1.0 - q.lambda) * q.sigma_z * a0.z[k];
                dd[k] = drift * dt + vol * a0.dw[k];
            }
            reflect_increments(x0, dd, x_tmp, l_dec_eq);

            for (std::size_t k = 0; k < n_nodes; ++k)
                local.dl_eq_sum[k] += std::fabs(l_coupled[k] - l_dec_eq[k]);
            const double j_eq = discounted_local_time_ibp(l_coupled, grid, q.rho, 0.0);
            local.obj_eq.add(j_eq);

            const double self = q.lambda / static_cast<double>(n);
            for (std::size_t d = 0; d < n_dev; ++d) {
                const double scale = cfg.deviation_scales[d];
                // coupled, agent i0 deviates while the crowd keeps the equilibrium profile
                for (std::size_t k = 0; k < grid.n_steps; ++k) {
                    const double th_dev = scale * a0.theta[k];
                    const double rest_mu = avg_mu[k] - q.mu * a0.theta[k] / static_cast<double>(n);
                    const double rest_vol_inc =
                        avg_vol_inc[k] - q.sigma * a0.theta[k] * a0.dw[k] / static_cast<double>(n);
                    const double drift = th_dev * q.mu * (1.0 - self) - q.lambda * rest_mu
                                         - (1.0 - q.lambda) * q.mu_z * a0.z[k];
                    const double own_vol = th_dev * q.sigma * (1.0 - self)
                                           - (1.0 - q.lambda) * q.sigma_z * a0.z[k];
                    dd[k] = drift * dt + own_vol * a0.dw[k] - q.lambda * rest_vol_inc;
                }
                reflect_increments(x0, dd, x_tmp, l_dev_coupled);

                // decoupled benchmark under the same deviation
                for (std::size_t k = 0; k < grid.n_steps; ++k) {
                    const double th_dev = scale * a0.theta[k];
                    const double drift = th_dev * q.mu - q.lambda * f_nodes[k]
                                         - (1.0 - q.lambda) * q.mu_z * a0.z[k];
                    const double vol = th_dev * q.sigma - (1.0 - q.lambda) * q.sigma_z * a0.z[k];
                    dd[k] = drift * dt + vol * a0.dw[k];
                }
                reflect_increments(x0, dd, x_tmp, l_dev_dec);

                for (std::size_t k = 0; k < n_nodes; ++k)
                    local.dl_dev_sum[d * n_nodes + k] += std::fabs(l_dev_coupled[k] - l_dev_dec[k]);
                const double j_dev = discounted_local_time_ibp(l_dev_coupled, grid, q.rho, 0.0);
                local.obj_dev[d].add(j_dev);
                local.obj_gap[d].add(j_dev - j_eq);
            }
        }
        acc[chunk] = std::move(local);
    });

    // merge
    NashGapReport rep;
    rep.n_agents = n;
    rep.f_star_nodes = f_nodes;
    std::vector<double> dl_dev(n_dev * n_nodes, 0.0), dl_eq(n_nodes, 0.0), dsum(n_nodes, 0.0),
        dsq(n_nodes, 0.0), tsq(n_nodes, 0.0);
    std::vector<MeanAccumulator> obj_dev(n_dev), obj_gap(n_dev);
    MeanAccumulator obj_eq;
    for (const auto& a : acc) {
        rep.n_reps += a.n;
        obj_eq.merge(a.obj_eq);
        for (std::size_t d = 0; d < n_dev; ++d) {
            obj_dev[d].merge(a.obj_dev[d]);
            obj_gap[d].merge(a.obj_gap[d]);
        }
        for (std::size_t k = 0; k < n_nodes; ++k) {
            dl_eq[k] += a.dl_eq_sum[k];
            dsum[k] += a.drift_sum[k];
            dsq[k] += a.drift_sq[k];
            tsq[k] += a.theta_sq_sum[k];
        }
        for (std::size_t dk = 0; dk < n_dev * n_nodes; ++dk) dl_dev[dk] += a.dl_dev_sum[dk];
    }
    const auto dn = static_cast<double>(rep.n_reps);
    const double horizon_factor = 1.0 + agents[i0].params.rho * grid.duration();

    double sup_eq = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) sup_eq = std::max(sup_eq, dl_eq[k] / dn);

    rep.empirical_drift.resize(n_nodes);
    rep.empirical_drift_se.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double m = dsum[k] / dn;
        double var = (dsq[k] - dn * m * m) / (dn - 1.0);
        if (var < 0.0) var = 0.0;
        rep.empirical_drift[k] = m;
        rep.empirical_drift_se[k] = std::sqrt(var / dn);
        rep.sup_drift_gap = std::max(rep.sup_drift_gap, std::fabs(m - f_nodes[k]));
        rep.sup_theta_sq = std::max(rep.sup_theta_sq, tsq[k] / dn);
    }
    rep.admissibility_c0 = 10.0 * rep.sup_theta_sq / (1.0 + x0 * x0 + z0 * z0);
    rep.objective_equilibrium = obj_eq.estimate();

    for (std::size_t d = 0; d < n_dev; ++d) {
        GapEntry e;
        e.scale = cfg.deviation_scales[d];
        if (e.scale == 1.0) {
            e.deviation_id = "own";
        } else if (e.scale == 0.0) {
            e.deviation_id = "zero";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "scaled_%g", e.scale);
            e.deviation_id = buf;
        }
        double sup_dev = 0.0;
        for (std::size_t k = 0; k < n_nodes; ++k)
            sup_dev = std::max(sup_dev, dl_dev[d * n_nodes + k] / dn);
        e.sup_dl_deviation = sup_dev;
        e.sup_dl_equilibrium = sup_eq;
        e.gap_bound = horizon_factor * (sup_dev + sup_eq);
        e.objective = obj_dev[d].estimate();
        e.objective_gap = obj_gap[d].estimate();
        rep.entries.push_back(std::move(e));
        rep.gap_bound = std::max(rep.gap_bound, rep.entries.back().gap_bound);
    }
    return rep;
}

}  // namespace mfgtrack
