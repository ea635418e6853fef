#include "mfgtrack/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfgtrack/parallel.hpp"

namespace mfgtrack {

namespace {

constexpr std::size_t kChunk = 128;

std::vector<double> psi_level_grid(double r0, const DerivedConstants& c, double horizon,
                                   std::size_t n_points) {
    // dense near the boundary where psi bends hardest, coarser above
    std::vector<double> g{0.0, 0.01, 0.025, 0.05, 0.08, 0.12, 0.17, 0.25, 0.35, 0.5, 0.7, 1.0};
    const double r_max = r0 + std::max(0.0, c.r_drift) * horizon + 5.0 * c.r_vol * std::sqrt(horizon) + 0.5;
    double step = (r_max - 1.0) / static_cast<double>(n_points > g.size() ? n_points - g.size() : 8);
    if (step < 0.05) step = 0.05;
    for (double r = 1.0 + step; r < r_max; r += step) g.push_back(r);
    g.push_back(r_max);
    return g;
}

}  // namespace

StrategyContext::StrategyContext(const ModelParams& p, const DerivedConstants& c,
                                 const TimeGrid& curve_grid, const TimeGrid& sim_grid,
                                 const Curve& f_star, Region region, bool degenerate, double r0,
                                 const StrategyConfig& cfg)
    : p_(p),
      c_(c),
      curve_grid_(curve_grid),
      sim_grid_(sim_grid),
      f_star_(f_star),
      region_(region),
      degenerate_(degenerate),
      r0_(r0) {
    if (region_ == Region::underperforming) build_tables(cfg);
}

StrategyContext::StrategyContext(const MfeSolver& solver, const MfeResult& mfe,
                                 const StrategyConfig& cfg)
    : StrategyContext(solver.params(), solver.constants(), solver.curve_grid(), solver.sim_grid(),
                      mfe.f_star, mfe.region, mfe.degenerate, mfe.r_star, cfg) {}

void StrategyContext::build_tables(const StrategyConfig& cfg) {
    // quadrature basis for the two phi-integral terms
    const double r_extent = r0_ + std::max(0.0, c_.r_drift) * p_.horizon
                            + 6.0 * c_.r_vol * std::sqrt(p_.horizon) + 1.0;
    const auto n_r = static_cast<std::size_t>(std::ceil(r_extent / cfg.basis_dr));
    basis_ = std::make_shared<const KernelBasis>(p_, c_, curve_grid_, r_extent, n_r);

    const std::size_t n = curve_grid_.n_steps;
    const std::size_t n_cols = basis_->q_one().n_r() + 1;
    const double dtc = curve_grid_.dt();
    c1_.assign((n + 1) * n_cols, 0.0);
    c2_.assign((n + 1) * n_cols, 0.0);
    const double dr = basis_->q_one().r_max() / static_cast<double>(basis_->q_one().n_r());
    const double rate2 = p_.rho - c_.kappa;
    parallel_chunks(n + 1, 8, [&](std::size_t, std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            double* row1 = &c1_[i * n_cols];
            double* row2 = &c2_[i * n_cols];
            for (std::size_t j = 0; j < n_cols; ++j) {
                const double rr = static_cast<double>(j) * dr;
                double s1 = 0.0, s2 = 0.0;
                for (std::size_t d = 1; d <= n - i; ++d) {
                    const double w = (d == n - i) ? 0.5 * dtc : dtc;
                    const double tau = static_cast<double>(d) * dtc;
                    s1 += w * std::exp(-p_.rho * tau) * basis_->q_one().at(d, rr) * f_star_[i + d];
                    s2 += w * std::exp(-rate2 * tau) * basis_->q_mix().at(d, rr);
                }
                row1[j] = s1;
                row2[j] = s2;
            }
        }
    });

    // stopped-expectation table psi(time-to-go, r) from per-level ensembles
    psi_r_grid_ = psi_level_grid(r0_, c_, p_.horizon, cfg.psi_r_points);
    const std::size_t n_sim = sim_grid_.n_nodes();
    const std::size_t n_lv = psi_r_grid_.size();
    psi_.assign(n_sim * n_lv, 0.0);
    psi_se_.assign(n_sim * n_lv, 0.0);

    parallel_chunks(n_lv, 1, [&](std::size_t, std::size_t first, std::size_t last) {
        PathBundle b;
        std::vector<double> q_cum(n_sim), sum(n_sim), sum_sq(n_sim);
        for (std::size_t lv = first; lv < last; ++lv) {
            const double rg = psi_r_grid_[lv];
            if (rg == 0.0) continue;  // stopped at once, psi = 0
            std::fill(sum.begin(), sum.end(), 0.0);
            std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
            for (std::size_t path = 0; path < cfg.psi_paths; ++path) {
                RngStream rng(mix_seed(cfg.seed, 101 + lv), path);
                simulate_joint_into(b, p_, c_, sim_grid_, rg, 1.0, rng);
                const std::size_t kz = std::min(first_boundary_node(b, 0), sim_grid_.n_steps);
                q_cum[0] = 0.0;
                double prev = 1.0;  // exp(-rho*0 - (R_0 - rg)) * 1
                for (std::size_t k = 1; k < n_sim; ++k) {
                    const double cur = std::exp(-p_.rho * sim_grid_.node(k) - b.reflected[k] + rg) * b.index[k];
                    q_cum[k] = q_cum[k - 1] + 0.5 * sim_grid_.dt() * (prev + cur);
                    prev = cur;
                }
                for (std::size_t m = 0; m < n_sim; ++m) {
                    const double v = q_cum[std::min(m, kz)];
                    sum[m] += v;
                    sum_sq[m] += v * v;
                }
            }
            const auto dn = static_cast<double>(cfg.psi_paths);
            for (std::size_t m = 0; m < n_sim; ++m) {
                const double mean = sum[m] / dn;
                double var = (sum_sq[m] - dn * mean * mean) / (dn - 1.0);
                if (var < 0.0) var = 0.0;
                psi_[m * n_lv + lv] = mean;
                psi_se_[m * n_lv + lv] = std::sqrt(var / dn);
            }
        }
    });
}

double StrategyContext::c_table(const std::vector<double>& tab, double t, double r) const {
    const std::size_t n = curve_grid_.n_steps;
    const std::size_t n_cols = basis_->q_one().n_r() + 1;
    double pos = (t - curve_grid_.t_start) / curve_grid_.dt();
    if (pos < 0.0) pos = 0.0;
    if (pos > static_cast<double>(n)) pos = static_cast<double>(n);
    auto i = static_cast<std::size_t>(pos);
    if (i >= n) i = n - 1;
    const double wt = pos - static_cast<double>(i);
    const auto rc = basis_->q_one().coef(r);
    auto row_val = [&](std::size_t node) {
        const double* row = &tab[node * n_cols];
        return (1.0 - rc.w) * row[rc.j] + rc.w * row[rc.j + 1];
    };
    return (1.0 - wt) * row_val(i) + wt * row_val(i + 1);
}

namespace {

// interpolation on a sorted, non-uniform level grid
struct LevelCoef {
    std::size_t j;
    double w;
};

LevelCoef level_coef(const std::vector<double>& grid, double r) {
    if (r <= grid.front()) return {0, 0.0};
    if (r >= grid.back()) return {grid.size() - 2, 1.0};
    const auto it = std::upper_bound(grid.begin(), grid.end(), r);
    const std::size_t j = static_cast<std::size_t>(it - grid.begin()) - 1;
    return {j, (r - grid[j]) / (grid[j + 1] - grid[j])};
}

}  // namespace

double StrategyContext::psi(double t, double r) const {
    if (region_ != Region::underperforming) return 0.0;
    const std::size_t n_lv = psi_r_grid_.size();
    const double ttg = sim_grid_.t_end - t;
    double mpos = ttg / sim_grid_.dt();
    if (mpos < 0.0) mpos = 0.0;
    if (mpos > static_cast<double>(sim_grid_.n_steps)) mpos = static_cast<double>(sim_grid_.n_steps);
    auto m = static_cast<std::size_t>(mpos);
    if (m >= sim_grid_.n_steps) m = sim_grid_.n_steps - 1;
    const double wm = mpos - static_cast<double>(m);
    const auto lc = level_coef(psi_r_grid_, r);
    auto at = [&](std::size_t mm) {
        const double* row = &psi_[mm * n_lv];
        return (1.0 - lc.w) * row[lc.j] + lc.w * row[lc.j + 1];
    };
    return (1.0 - wm) * at(m) + wm * at(m + 1);
}

double StrategyContext::psi_se(double t, double r) const {
    if (region_ != Region::underperforming) return 0.0;
    const std::size_t n_lv = psi_r_grid_.size();
    const double ttg = sim_grid_.t_end - t;
    double mpos = ttg / sim_grid_.dt();
    if (mpos < 0.0) mpos = 0.0;
    auto m = static_cast<std::size_t>(std::min(mpos, static_cast<double>(sim_grid_.n_steps)));
    if (m > sim_grid_.n_steps) m = sim_grid_.n_steps;
    const auto lc = level_coef(psi_r_grid_, r);
    const double* row = &psi_se_[m * n_lv];
    return std::max(row[lc.j], row[lc.j + 1]);
}

double StrategyContext::theta(double t, double r, double z) const {
    if (region_ != Region::underperforming) return theta_outperforming(p_, c_, t, z);
    const double term1 = p_.lambda * p_.mu / (p_.sigma * p_.sigma) * c_table(c1_, t, r);
    const double term2 = (1.0 - p_.lambda) * c_.eta * p_.mu / (p_.sigma * p_.sigma) * z * c_table(c2_, t, r);
    const double term3 = (1.0 - p_.lambda) * c_.eta * p_.sigma_z / p_.sigma * z * psi(t, r);
    const double term4 = (1.0 - p_.lambda) * p_.sigma_z / p_.sigma * z;
    return term1 + term2 + term3 + term4;
}

double StrategyContext::theta_table_se(double t, double r, double z) const {
    if (region_ != Region::underperforming) return 0.0;
    return (1.0 - p_.lambda) * c_.eta * p_.sigma_z / p_.sigma * z * psi_se(t, r);
}

WealthEnsemble simulate_equilibrium_wealth(const StrategyContext& ctx, double v0, double z0,
                                           const TimeGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed) {
    if (v0 < 0.0 || z0 < 0.0)
        throw std::domain_error("simulate_equilibrium_wealth: v0, z0 must be >= 0");
    const ModelParams& p = ctx.params();
    const DerivedConstants& c = ctx.constants();
    const std::size_t n_nodes = grid.n_nodes();
    const double dt = grid.dt();
    const InitialState init = initial_auxiliary_state(p, v0, z0);

    // deterministic pieces of the benchmark and region boundary
    std::vector<double> vbar(n_nodes), f_tail(n_nodes), bound_zcoef(n_nodes), f_nodes(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double t = grid.node(k);
        vbar[k] = v0 + ctx.f_star().integral(0.0, t);
        f_tail[k] = p.lambda * ctx.f_star().integral(t, p.horizon);
        bound_zcoef[k] = (1.0 - p.lambda) * (std::exp(c.eta * (p.horizon - t)) - 1.0);
        f_nodes[k] = ctx.f_star().value(t);
    }

    struct ChunkAcc {
        std::vector<double> v_sum, v_sq, th_sum, th_sq, tse_sum;
        MeanAccumulator shortfall, terminal;
        double max_gap{0.0};
        std::size_t violations{0};
        std::size_t n{0};
    };
    std::vector<ChunkAcc> acc(chunk_count(n_paths, kChunk));
    const bool under = ctx.region() == Region::underperforming;

    parallel_chunks(n_paths, kChunk, [&](std::size_t chunk, std::size_t first, std::size_t last) {
        ChunkAcc local;
        local.v_sum.assign(n_nodes, 0.0);
        local.v_sq.assign(n_nodes, 0.0);
        local.th_sum.assign(n_nodes, 0.0);
        local.th_sq.assign(n_nodes, 0.0);
        local.tse_sum.assign(n_nodes, 0.0);
        PathBundle b;
        std::vector<double> theta(n_nodes), v(n_nodes), bigk(n_nodes);
        for (std::size_t path = first; path < last; ++path) {
            RngStream rng(seed, path);
            simulate_joint_into(b, p, c, grid, under ? ctx.r0() : 0.0, z0, rng);
            ++local.n;

            v[0] = v0;
            for (std::size_t k = 0; k < n_nodes; ++k) {
                const double t = grid.node(k);
                theta[k] = ctx.theta(t, b.reflected[k], b.index[k]);
                if (k + 1 < n_nodes)
                    v[k + 1] = v[k] + theta[k] * (p.mu * dt + p.sigma * b.dw[k]);
            }

            // auxiliary state two ways: the running-sup formula and the
            // Skorokhod transform of the driver; they must coincide
            double run_max_k = 0.0, run_max_d = 0.0, a_prev = 0.0, shortfall = 0.0;
            const double k0_val = p.lambda * vbar[0] + (1.0 - p.lambda) * z0 - v0;
            for (std::size_t k = 0; k < n_nodes; ++k) {
                bigk[k] = p.lambda * vbar[k] + (1.0 - p.lambda) * b.index[k] - v[k];
                if (bigk[k] > run_max_k) run_max_k = bigk[k];
                const double x_sup = run_max_k - bigk[k];

                const double d = init.x0 - (bigk[k] - k0_val);
                if (-d > run_max_d) run_max_d = -d;
                const double x_skor = d + run_max_d;

                const double gap = std::fabs(x_sup - x_skor);
                if (gap > local.max_gap) local.max_gap = gap;

                // region invariance, one-cell slack at the boundary
                const double x0b = f_tail[k] + bound_zcoef[k] * b.index[k];
                if (k > 0) {
                    const double move = std::fabs(bigk[k] - bigk[k - 1])
                                        + std::fabs(bound_zcoef[k] * b.index[k] - bound_zcoef[k - 1] * b.index[k - 1])
                                        + std::fabs(f_tail[k] - f_tail[k - 1]) + 1e-9;
                    const bool inside = under ? (x_sup < x0b + move) : (x_sup > x0b - move);
                    if (!inside) ++local.violations;
                }

                // largest shortfall A = max(0, running max of K)
                const double a_cur = run_max_k;
                if (k > 0) shortfall += std::exp(-p.rho * grid.node(k - 1)) * (a_cur - a_prev);
                a_prev = a_cur;

                local.v_sum[k] += v[k];
                local.v_sq[k] += v[k] * v[k];
                local.th_sum[k] += theta[k];
                local.th_sq[k] += theta[k] * theta[k];
                local.tse_sum[k] += ctx.theta_table_se(grid.node(k), b.reflected[k], b.index[k]);
            }
            const double a0 = k0_val > 0.0 ? k0_val : 0.0;
            local.shortfall.add(a0 + shortfall);
            local.terminal.add(v[n_nodes - 1]);
        }
        acc[chunk] = std::move(local);
    });

    WealthEnsemble out;
    out.grid = grid;
    out.v0 = v0;
    out.z0 = z0;
    out.f_star_on_grid = std::move(f_nodes);
    out.mean_v.assign(n_nodes, 0.0);
    out.se_v.assign(n_nodes, 0.0);
    out.mean_theta.assign(n_nodes, 0.0);
    out.se_theta.assign(n_nodes, 0.0);
    out.theta_table_se.assign(n_nodes, 0.0);

    std::vector<double> v_sum(n_nodes, 0.0), v_sq(n_nodes, 0.0), th_sum(n_nodes, 0.0),
        th_sq(n_nodes, 0.0), tse(n_nodes, 0.0);
    MeanAccumulator shortfall_acc, terminal_acc;
    for (const auto& a : acc) {
        out.n_paths += a.n;
        out.max_reconstruction_gap = std::max(out.max_reconstruction_gap, a.max_gap);
        out.region_violations += a.violations;
        shortfall_acc.merge(a.shortfall);
        terminal_acc.merge(a.terminal);
        for (std::size_t k = 0; k < n_nodes; ++k) {
            v_sum[k] += a.v_sum[k];
            v_sq[k] += a.v_sq[k];
            th_sum[k] += a.th_sum[k];
            th_sq[k] += a.th_sq[k];
            tse[k] += a.tse_sum[k];
        }
    }
    const auto dn = static_cast<double>(out.n_paths);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double mv = v_sum[k] / dn;
        const double mt = th_sum[k] / dn;
        double vv = (v_sq[k] - dn * mv * mv) / (dn - 1.0);
        double vt = (th_sq[k] - dn * mt * mt) / (dn - 1.0);
        if (vv < 0.0) vv = 0.0;
        if (vt < 0.0) vt = 0.0;
        out.mean_v[k] = mv;
        out.se_v[k] = std::sqrt(vv / dn);
        out.mean_theta[k] = mt;
        out.se_theta[k] = std::sqrt(vt / dn);
        out.theta_table_se[k] = tse[k] / dn;
    }
    out.shortfall = shortfall_acc.estimate();
    out.terminal_wealth = terminal_acc.estimate();
    return out;
}

ConsistencyReport consistency_from_ensemble(const StrategyContext& ctx, const WealthEnsemble& we,
                                            double rel_tol, double perturb) {
    const ModelParams& p = ctx.params();
    const TimeGrid& grid = we.grid;
    const double v0 = we.v0;
    const std::size_t n_nodes = grid.n_nodes();

    ConsistencyReport rep;
    rep.grid = grid;
    rep.residual.resize(n_nodes);
    rep.residual_se.resize(n_nodes);
    rep.integrated.resize(n_nodes);
    rep.integrated_se.resize(n_nodes);

    double f_sup = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) f_sup = std::max(f_sup, std::fabs(we.f_star_on_grid[k]));

    bool ok = true;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double ref = perturb * we.f_star_on_grid[k];
        const double res = std::fabs(p.mu * we.mean_theta[k] - ref);
        const double se = p.mu * combined_se(we.se_theta[k], we.theta_table_se[k]);
        rep.residual[k] = res;
        rep.residual_se[k] = se;
        if (res > rep.sup_residual) {
            rep.sup_residual = res;
            rep.worst_node = k;
        }
        if (res > std::max(3.0 * se, rel_tol * f_sup) + 1e-12 * (1.0 + std::fabs(ref))) ok = false;

        const double iref = v0 + perturb * ctx.f_star().integral(0.0, grid.node(k));
        rep.integrated[k] = std::fabs(we.mean_v[k] - iref);
        rep.integrated_se[k] = we.se_v[k];
    }
    rep.sup_rel = f_sup > 0.0 ? rep.sup_residual / f_sup : rep.sup_residual;
    rep.passed = ok;
    return rep;
}

ConsistencyReport verify_consistency(const StrategyContext& ctx, double v0, double z0,
                                     const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                     double rel_tol, double perturb) {
    const WealthEnsemble we = simulate_equilibrium_wealth(ctx, v0, z0, grid, n_paths, seed);
    return consistency_from_ensemble(ctx, we, rel_tol, perturb);
}

McEstimate primal_state_x(const ModelParams& p, const DerivedConstants& c, double t, double r,
                          double z, const Curve& f, const McConfig& mc) {
    McEstimate vr = deriv_v_r(p, c, t, r, z, f, mc);
    const double scale = std::exp(p.rho * t + r);
    vr.value *= scale;
    vr.std_error *= scale;
    return vr;
}

std::vector<double> default_dual_levels(double r_max) {
    std::vector<double> r{0.0};
    for (double v = 0.05; v < 1.0; v += 0.05) r.push_back(v);
    for (double v = 1.0; v < 3.0; v += 0.125) r.push_back(v);
    for (double v = 3.0; v <= r_max; v += 0.5) r.push_back(v);
    return r;
}

DualValueCurve::DualValueCurve(const ModelParams& p, const DerivedConstants& c, const Curve& f,
                               double z, std::vector<double> r_nodes, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed)
    : p_(p), z_(z), r_nodes_(std::move(r_nodes)) {
    const std::size_t n_lv = r_nodes_.size();
    const std::size_t n_nodes = grid.n_nodes();
    const double dt = grid.dt();

    std::vector<double> f_vals(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) f_vals[k] = f.value(grid.node(k));

    struct ChunkAcc {
        std::vector<double> sum, sq;
        std::size_t n{0};
    };
    std::vector<ChunkAcc> acc(chunk_count(n_paths, kChunk));

    parallel_chunks(n_paths, kChunk, [&](std::size_t chunk, std::size_t first, std::size_t last) {
        ChunkAcc local;
        local.sum.assign(n_lv, 0.0);
        local.sq.assign(n_lv, 0.0);
        std::vector<double> dw(grid.n_steps), w_cum(n_nodes), zpath(n_nodes);
        for (std::size_t path = first; path < last; ++path) {
            RngStream rng(seed, path);
            const double sq_dt = std::sqrt(dt);
            w_cum[0] = 0.0;
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
                dw[k] = sq_dt * rng.normal();
                w_cum[k + 1] = w_cum[k] + dw[k];
            }
            zpath[0] = z_;
            const double zdrift = (p.mu_z - 0.5 * p.sigma_z * p.sigma_z) * dt;
            for (std::size_t k = 0; k < grid.n_steps; ++k)
                zpath[k + 1] = zpath[k] * std::exp(zdrift + p.sigma_z * dw[k]);
            ++local.n;

            for (std::size_t lv = 0; lv < n_lv; ++lv) {
                const double r = r_nodes_[lv];
                double run_max = 0.0, acc_f = 0.0, acc_z = 0.0, prev_f = 0.0, prev_z = 0.0;
                for (std::size_t k = 0; k < n_nodes; ++k) {
                    const double t = grid.node(k);
                    const double d = r + c.r_drift * t + c.r_vol * w_cum[k];
                    if (-d > run_max) run_max = -d;
                    const double refl = d + run_max;
                    const double e = std::exp(-p.rho * t - refl);
                    const double cur_f = e * f_vals[k];
                    const double cur_z = e * zpath[k];
                    if (k > 0) {
                        acc_f += 0.5 * dt * (prev_f + cur_f);
                        acc_z += 0.5 * dt * (prev_z + cur_z);
                    }
                    prev_f = cur_f;
                    prev_z = cur_z;
                }
                const double val = -p.lambda * acc_f - (1.0 - p.lambda) * c.eta * acc_z;
                local.sum[lv] += val;
                local.sq[lv] += val * val;
            }
        }
        acc[chunk] = std::move(local);
    });

    v_vals_.assign(n_lv, 0.0);
    v_se_.assign(n_lv, 0.0);
    std::vector<double> sum(n_lv, 0.0), sq(n_lv, 0.0);
    std::size_t total = 0;
    for (const auto& a : acc) {
        total += a.n;
        for (std::size_t lv = 0; lv < n_lv; ++lv) {
            sum[lv] += a.sum[lv];
            sq[lv] += a.sq[lv];
        }
    }
    const auto dn = static_cast<double>(total);
    for (std::size_t lv = 0; lv < n_lv; ++lv) {
        const double m = sum[lv] / dn;
        double var = (sq[lv] - dn * m * m) / (dn - 1.0);
        if (var < 0.0) var = 0.0;
        v_vals_[lv] = m;
        v_se_[lv] = std::sqrt(var / dn);
    }
}

double DualValueCurve::u(double x) const {
    if (x < 0.0) throw std::domain_error("DualValueCurve::u: x must be >= 0");
    double best = 0.0;  // the r -> infinity tail, where v -> 0 and x e^{-r} -> 0
    for (std::size_t lv = 0; lv < r_nodes_.size(); ++lv)
        best = std::min(best, v_vals_[lv] + x * std::exp(-r_nodes_[lv]));
    return best;
}

double DualValueCurve::u_se(double x) const {
    double best = 0.0, se = 0.0;
    for (std::size_t lv = 0; lv < r_nodes_.size(); ++lv) {
        const double cand = v_vals_[lv] + x * std::exp(-r_nodes_[lv]);
        if (cand < best) {
            best = cand;
            se = v_se_[lv];
        }
    }
    return se;
}

double DualValueCurve::w(double v0) const {
    if (v0 >= z_) return -u((1.0 - p_.lambda) * (v0 - z_));
    return -u(0.0) + (1.0 - p_.lambda) * (z_ - v0);
}

double value_w(const ModelParams& p, const DerivedConstants& c, const Curve& f_star, double v0,
               double z0, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    const DualValueCurve curve(p, c, f_star, z0, default_dual_levels(), grid, n_paths, seed);
    return curve.w(v0);
}

}  // namespace mfgtrack
