#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfgtrack/config.hpp"
#include "mfgtrack/csv.hpp"
#include "mfgtrack/mfe.hpp"
#include "mfgtrack/nplayer.hpp"
#include "mfgtrack/strategy.hpp"

namespace {

using namespace mfgtrack;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitVerification = 3;

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed{0};
    bool has_seed{false};
    std::size_t paths{0};
    std::size_t steps{0};
    std::string r_list;
    std::string n_list;
    double perturb{1.0};
    std::size_t dump_paths{0};
    double hetero_delta{-1.0};
    std::size_t sweep_points{8};
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

void common_metadata(CsvWriter& w, const RunConfig& cfg, const std::string& command) {
    w.metadata("command", command);
    w.metadata("seed", static_cast<std::uint64_t>(cfg.solve.seed));
    w.metadata("curve_intervals", static_cast<std::uint64_t>(cfg.solve.curve_intervals));
    w.metadata("sim_steps", static_cast<std::uint64_t>(cfg.solve.sim_steps));
    w.metadata("kernel_paths", static_cast<std::uint64_t>(cfg.solve.kernel_paths));
    w.metadata("x_paths", static_cast<std::uint64_t>(cfg.solve.x_paths));
    w.metadata("build", build_id());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

RunConfig load_with_overrides(const CliOptions& opt, const std::string& command) {
    RunConfig cfg = load_config(opt.config_path);
    if (opt.has_seed) cfg.solve.seed = opt.seed;
    if (opt.steps) cfg.solve.sim_steps = opt.steps;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.paths) {
        if (command == "solve" || command == "curve")
            cfg.solve.kernel_paths = opt.paths;
        else if (command == "verify")
            cfg.verify_paths = opt.paths;
        else if (command == "nplayer")
            cfg.nplayer_reps = opt.paths;
    }
    cfg.validate();
    return cfg;
}

void write_f_star(const RunConfig& cfg, const MfeResult& res) {
    CsvWriter w(out_path(cfg, "f_star.csv"));
    common_metadata(w, cfg, "solve");
    w.metadata("region", res.region == Region::outperforming ? "outperforming" : "underperforming");
    w.header({"t", "f_star"});
    for (std::size_t k = 0; k < res.f_star.size(); ++k)
        w.row({res.f_star.grid().node(k), res.f_star[k]});
}

void write_solve_meta(const RunConfig& cfg, const MfeResult& res) {
    CsvWriter w(out_path(cfg, "solve_meta.csv"));
    common_metadata(w, cfg, "solve");
    w.header({"key", "value"});
    w.raw_row(std::string("region,") + (res.region == Region::outperforming ? "outperforming" : "underperforming"));
    w.raw_row(std::string("degenerate,") + (res.degenerate ? "1" : "0"));
    w.raw_row("r_star," + format_number(res.r_star));
    w.raw_row("x_hat0," + format_number(res.x_hat0));
    w.raw_row("x0," + format_number(res.x0));
    w.raw_row("z0," + format_number(res.z0));
    w.raw_row("residual," + format_number(res.residual));
    w.raw_row("residual_bound," + format_number(res.residual_bound));
}

int cmd_solve(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt, "solve");
    const MfeSolver solver(cfg.params, cfg.solve);
    const MfeResult res = solver.solve(cfg.initial_x0(), cfg.z0);

    write_f_star(cfg, res);
    write_solve_meta(cfg, res);
    if (res.region == Region::underperforming) {
        CsvWriter w(out_path(cfg, "bisection_trace.csv"));
        common_metadata(w, cfg, "solve");
        w.header({"probe", "r", "x", "se"});
        for (std::size_t i = 0; i < res.trace.size(); ++i)
            w.row({static_cast<double>(i), res.trace[i].r, res.trace[i].x, res.trace[i].se});
    }
    if (opt.dump_paths > 0) {
        const TimeGrid grid = solver.sim_grid();
        for (std::size_t i = 0; i < opt.dump_paths; ++i) {
            RngStream rng(cfg.solve.seed, i);
            const PathBundle b = simulate_joint(cfg.params, solver.constants(), grid,
                                                res.region == Region::underperforming ? res.r_star : 0.0,
                                                cfg.z0, rng);
            std::ofstream os(out_path(cfg, "path_" + std::to_string(i) + ".csv"));
            dump_path_csv(os, b, grid);
        }
    }
    if (res.region == Region::underperforming && res.residual > res.residual_bound) {
        std::cerr << "solve: out-of-sample residual " << res.residual << " exceeds bound "
                  << res.residual_bound << "\n";
        return kExitNoConvergence;
    }
    std::cout << "solve: region="
              << (res.region == Region::outperforming ? "outperforming" : "underperforming")
              << " f*(0)=" << res.f_star[0] << " residual=" << res.residual << "\n";
    return kExitOk;
}

int cmd_curve(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt, "curve");
    std::vector<double> r_list = opt.r_list.empty()
        ? std::vector<double>{1e-3, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0}
        : parse_list(opt.r_list);
    std::sort(r_list.begin(), r_list.end());

    const MfeSolver solver(cfg.params, cfg.solve);
    CsvWriter w(out_path(cfg, "x_of_r.csv"));
    common_metadata(w, cfg, "curve");
    w.header({"r", "x", "se"});
    for (double r : r_list) {
        const FixedPointResult fp = solver.fixed_point_at(r, cfg.z0);
        const McEstimate xe = solver.x_at(r, cfg.z0, fp.f);
        w.row({r, xe.value, xe.std_error});
        std::cout << "curve: r=" << r << " x=" << xe.value << " se=" << xe.std_error << "\n";
    }
    return kExitOk;
}

int cmd_verify(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt, "verify");
    const MfeSolver solver(cfg.params, cfg.solve);
    const MfeResult res = solver.solve(cfg.initial_x0(), cfg.z0);

    StrategyConfig scfg;
    scfg.psi_paths = cfg.psi_paths;
    scfg.seed = cfg.solve.seed;
    const StrategyContext ctx(solver, res, scfg);
    const double v0 = cfg.has_v0 ? cfg.v0 : cfg.z0 + cfg.initial_x0() / (1.0 - cfg.params.lambda);
    const WealthEnsemble we = simulate_equilibrium_wealth(ctx, v0, cfg.z0, solver.sim_grid(),
                                                          cfg.verify_paths, mix_seed(cfg.solve.seed, 40));
    const ConsistencyReport rep = consistency_from_ensemble(ctx, we, 0.02, opt.perturb);

    CsvWriter w(out_path(cfg, "consistency.csv"));
    common_metadata(w, cfg, "verify");
    w.metadata("verify_paths", static_cast<std::uint64_t>(cfg.verify_paths));
    w.metadata("perturb", opt.perturb);
    w.metadata("sup_residual", rep.sup_residual);
    w.metadata("sup_rel", rep.sup_rel);
    w.metadata("shortfall", we.shortfall.value);
    w.metadata("shortfall_se", we.shortfall.std_error);
    w.metadata("passed", std::string(rep.passed ? "1" : "0"));
    w.header({"t", "mean_V", "se_V", "mean_theta", "se_theta", "f_star", "residual", "residual_se",
              "integrated", "integrated_se"});
    for (std::size_t k = 0; k < rep.residual.size(); ++k)
        w.row({rep.grid.node(k), we.mean_v[k], we.se_v[k], we.mean_theta[k], we.se_theta[k],
               res.f_star.value(rep.grid.node(k)), rep.residual[k], rep.residual_se[k],
               rep.integrated[k], rep.integrated_se[k]});

    if (opt.sweep_points > 0 && res.region == Region::underperforming) {
        // feedback rule against the primal state at mid-horizon
        CsvWriter sw(out_path(cfg, "theta_sweep.csv"));
        common_metadata(sw, cfg, "verify");
        sw.header({"r", "x", "x_se", "theta"});
        const double t_mid = 0.5 * cfg.params.horizon;
        McConfig mc{40000, cfg.solve.sim_steps / 2, mix_seed(cfg.solve.seed, 41)};
        for (std::size_t i = 0; i < opt.sweep_points; ++i) {
            const double r = (res.r_star + 1.0) * static_cast<double>(i + 1)
                             / static_cast<double>(opt.sweep_points);
            const McEstimate x = primal_state_x(cfg.params, solver.constants(), t_mid, r, cfg.z0,
                                                res.f_star, mc);
            sw.row({r, x.value, x.std_error, ctx.theta(t_mid, r, cfg.z0)});
        }
    }

    std::cout << "verify: sup_residual=" << rep.sup_residual << " (" << 100.0 * rep.sup_rel
              << "% of ||f*||) " << (rep.passed ? "PASS" : "FAIL") << "\n";
    return rep.passed ? kExitOk : kExitVerification;
}

int cmd_nplayer(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt, "nplayer");
    std::vector<double> n_list = opt.n_list.empty() ? std::vector<double>{2, 10, 50, 200}
                                                    : parse_list(opt.n_list);
    const double delta = opt.hetero_delta >= 0.0 ? opt.hetero_delta : cfg.heterogeneity_delta;

    const MfeSolver solver(cfg.params, cfg.solve);
    const MfeResult res = solver.solve(cfg.initial_x0(), cfg.z0);
    StrategyConfig scfg;
    scfg.psi_paths = cfg.psi_paths;
    scfg.seed = cfg.solve.seed;
    const StrategyContext shared_ctx(solver, res, scfg);

    CsvWriter gaps(out_path(cfg, "nash_gaps.csv"));
    common_metadata(gaps, cfg, "nplayer");
    gaps.metadata("nplayer_reps", static_cast<std::uint64_t>(cfg.nplayer_reps));
    gaps.metadata("heterogeneity_delta", delta);
    gaps.header({"n", "agent_id", "deviation_id", "objective", "se", "gap_bound"});

    CsvWriter drift(out_path(cfg, "nplayer_drift.csv"));
    common_metadata(drift, cfg, "nplayer");
    drift.header({"n", "t", "empirical_drift", "se", "f_star"});

    CsvWriter meta(out_path(cfg, "nplayer_meta.csv"));
    common_metadata(meta, cfg, "nplayer");
    meta.header({"n", "equilibrium_objective", "se", "gap_bound", "sup_drift_gap",
                 "admissibility_c0", "sup_theta_sq"});

    std::unique_ptr<CsvWriter> agents_csv;
    if (delta > 0.0) {
        agents_csv = std::make_unique<CsvWriter>(out_path(cfg, "agents.csv"));
        common_metadata(*agents_csv, cfg, "nplayer");
        agents_csv->header({"n", "agent_id", "mu", "sigma", "mu_z", "sigma_z", "lambda"});
    }

    for (double nd : n_list) {
        const auto n = static_cast<std::size_t>(nd);
        std::vector<AgentSpec> agents = delta > 0.0 ? heterogeneous_agents(cfg.params, n, delta)
                                                    : homogeneous_agents(cfg.params, n);
        std::vector<std::unique_ptr<StrategyContext>> own;
        std::vector<const StrategyContext*> ctxs(n, &shared_ctx);
        if (delta > 0.0) {
            StrategyConfig coarse = scfg;
            coarse.psi_paths = std::max<std::size_t>(2000, scfg.psi_paths / 5);
            coarse.psi_r_points = 24;
            coarse.basis_dr = 0.04;
            for (std::size_t i = 0; i < n; ++i) {
                own.push_back(std::make_unique<StrategyContext>(
                    agents[i].params, agents[i].consts, solver.curve_grid(), solver.sim_grid(),
                    res.f_star, res.region, res.degenerate, res.r_star, coarse));
                ctxs[i] = own.back().get();
                agents_csv->row({nd, static_cast<double>(i), agents[i].params.mu, agents[i].params.sigma,
                                 agents[i].params.mu_z, agents[i].params.sigma_z, agents[i].params.lambda});
            }
        }

        NplayerConfig ncfg;
        ncfg.n_reps = cfg.nplayer_reps;
        ncfg.steps = cfg.nplayer_steps;
        ncfg.seed = mix_seed(cfg.solve.seed, 50);
        const NashGapReport rep = estimate_gap(agents, ctxs, cfg.initial_x0(), cfg.z0, ncfg);

        for (const auto& e : rep.entries)
            gaps.raw_row(format_number(nd) + ",0," + e.deviation_id + "," + format_number(e.objective.value)
                         + "," + format_number(e.objective.std_error) + "," + format_number(e.gap_bound));
        const TimeGrid ngrid(0.0, cfg.params.horizon, cfg.nplayer_steps);
        for (std::size_t k = 0; k < rep.empirical_drift.size(); ++k)
            drift.row({nd, ngrid.node(k), rep.empirical_drift[k], rep.empirical_drift_se[k],
                       rep.f_star_nodes[k]});
        meta.row({nd, rep.objective_equilibrium.value, rep.objective_equilibrium.std_error,
                  rep.gap_bound, rep.sup_drift_gap, rep.admissibility_c0, rep.sup_theta_sq});
        std::cout << "nplayer: n=" << n << " gap_bound=" << rep.gap_bound
                  << " sup_drift_gap=" << rep.sup_drift_gap << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field benchmark-tracking portfolio solver"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "key = value config file")->required();
        sub->add_option("--seed", opt.seed, "override RNG seed")->each([&](const std::string&) {
            opt.has_seed = true;
        });
        sub->add_option("--paths", opt.paths, "override the command's main path budget");
        sub->add_option("--steps", opt.steps, "override simulation steps");
        sub->add_option("--out", opt.out_dir, "output directory");
    };

    CLI::App* solve = app.add_subcommand("solve", "compute the equilibrium drift f*");
    add_common(solve);
    solve->add_option("--dump-paths", opt.dump_paths, "dump the first N simulated paths");

    CLI::App* curve = app.add_subcommand("curve", "sweep the dual-to-primal map x(r)");
    add_common(curve);
    curve->add_option("--r-list", opt.r_list, "comma-separated dual levels");

    CLI::App* verify = app.add_subcommand("verify", "check the consistency condition end to end");
    add_common(verify);
    verify->add_option("--perturb", opt.perturb, "scale the reference drift (fault injection)");
    verify->add_option("--sweep", opt.sweep_points, "theta-vs-x sweep points (0 disables)");

    CLI::App* nplayer = app.add_subcommand("nplayer", "finite-population gap study");
    add_common(nplayer);
    nplayer->add_option("--n-list", opt.n_list, "comma-separated player counts");
    nplayer->add_option("--hetero-delta", opt.hetero_delta, "heterogeneity schedule delta");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(opt);
        if (curve->parsed()) return cmd_curve(opt);
        if (verify->parsed()) return cmd_verify(opt);
        if (nplayer->parsed()) return cmd_nplayer(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}
