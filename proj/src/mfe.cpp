#include "mfgtrack/mfe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgtrack {

Curve apply_J(const Curve& f, const KernelTable& kt) {
    if (!(f.grid() == kt.curve_grid()))
        throw std::invalid_argument("apply_J: curve grid does not match the kernel table");
    const std::size_t n = f.grid().n_steps;
    const double dtc = f.grid().dt();
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double acc = 0.0;
        for (std::size_t j = i; j <= n; ++j) {
            const double w = (j == i || j == n) ? 0.5 * dtc : dtc;
            acc += w * kt.g(i, j) * f[j];
        }
        out[i] = acc + kt.h(i);
    }
    return Curve(f.grid(), std::move(out));
}

FixedPointResult solve_fixed_point_from(const KernelTable& kt, const Curve& f0,
                                        const FixedPointOptions& opt) {
    FixedPointResult res;
    res.contraction = kt.contraction_sup();

    Curve f = f0;
    bool converged = false;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        Curve next = apply_J(f, kt);
        const double delta = sup_distance(next, f);
        res.residual_history.push_back(delta);
        f = std::move(next);
        ++res.iterations;
        // iterate well past the requested tolerance so the reported residual
        // is dominated by table noise, not by the stopping rule
        if (delta < 1e-3 * opt.tol * (1.0 + f.sup_norm())) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        // Backward pass over the nodes: the discrete Volterra system is
        // triangular (the diagonal kernel value is the zero limit), so
        // solving from t = T downward is exact.
        const std::size_t n = kt.curve_grid().n_steps;
        const double dtc = kt.curve_grid().dt();
        std::vector<double> vals(n + 1, 0.0);
        for (std::size_t ii = n + 1; ii-- > 0;) {
            double acc = 0.0;
            for (std::size_t j = ii + 1; j <= n; ++j) {
                const double w = (j == n) ? 0.5 * dtc : dtc;
                acc += w * kt.g(ii, j) * vals[j];
            }
            vals[ii] = acc + kt.h(ii);
        }
        f = Curve(kt.curve_grid(), std::move(vals));
        res.used_backward = true;
    }

    res.residual = sup_distance(apply_J(f, kt), f);
    res.f = std::move(f);
    if (res.used_backward && res.residual > opt.tol * (1.0 + res.f.sup_norm()))
        throw std::runtime_error("solve_fixed_point: no convergence, residual "
                                 + std::to_string(res.residual));
    return res;
}

FixedPointResult solve_fixed_point(const KernelTable& kt, const FixedPointOptions& opt) {
    return solve_fixed_point_from(kt, kt.h_curve(), opt);
}

McEstimate x_of_r(const ModelParams& p, const DerivedConstants& c, double r, double z,
                  const Curve& f, const McConfig& mc) {
    if (r < 0.0 || z < 0.0) throw std::domain_error("x_of_r: r, z must be >= 0");
    if (r == 0.0) return {0.0, 0.0, 0};

    const TimeGrid grid(0.0, p.horizon, mc.steps);
    // e^r folded into the integrand exponent
    return mc_over_paths(p, c, grid, r, z, mc.seed, mc.n_paths, [&](const PathBundle& b) {
        const std::size_t stop = std::min(first_boundary_node(b, 0), grid.n_steps);
        double acc_f = 0.0, acc_z = 0.0;
        double prev_f = f.value(0.0);  // exp(-rho*0 - (R_0 - r)) = 1
        double prev_z = b.index[0];
        for (std::size_t k = 1; k <= stop; ++k) {
            const double s = grid.node(k);
            const double e = std::exp(-p.rho * s - (b.reflected[k] - r));
            const double cur_f = e * f.value(s);
            const double cur_z = e * b.index[k];
            acc_f += 0.5 * grid.dt() * (prev_f + cur_f);
            acc_z += 0.5 * grid.dt() * (prev_z + cur_z);
            prev_f = cur_f;
            prev_z = cur_z;
        }
        return p.lambda * acc_f + (1.0 - p.lambda) * c.eta * acc_z;
    });
}

namespace {

double basis_r_extent(const DerivedConstants& c, const ModelParams& p) {
    const double horizon_var = c.r_vol * c.r_vol * p.horizon;
    const double b1 = std::fabs(1.0 + c.mu_tilde / c.sigma_tilde);
    const double b2 = std::fabs(1.0 - p.sigma * p.sigma_z / p.mu + c.mu_tilde / c.sigma_tilde);
    const double b = std::max(b1, b2);
    return 2.0 * b * horizon_var + std::sqrt(120.0 * horizon_var) + 1.0;
}

}  // namespace

MfeSolver::MfeSolver(const ModelParams& p, const SolveConfig& cfg)
    : p_(p),
      c_(derive_constants(p)),
      cfg_(cfg),
      curve_grid_(0.0, p.horizon, cfg.curve_intervals),
      sim_grid_(0.0, p.horizon, cfg.sim_steps),
      basis_(p_, c_, curve_grid_, basis_r_extent(c_, p),
             static_cast<std::size_t>(std::ceil(basis_r_extent(c_, p) / 0.01))) {
    if (cfg.sim_steps % cfg.curve_intervals != 0)
        throw std::invalid_argument("SolveConfig: sim_steps must be a multiple of curve_intervals");
}

KernelTable MfeSolver::build_table(double r, double z, std::size_t n_paths, std::uint64_t seed) const {
    KernelMcConfig kmc;
    kmc.n_paths = n_paths;
    kmc.seed = seed;
    return KernelTable(basis_, sim_grid_, r, z, kmc);
}

FixedPointResult MfeSolver::fixed_point_at(double r, double z) const {
    const KernelTable kt = build_table(r, z, cfg_.kernel_paths, mix_seed(cfg_.seed, kSeedKernel));
    FixedPointOptions opt;
    opt.tol = cfg_.fp_tol;
    opt.max_iter = cfg_.fp_max_iter;
    return solve_fixed_point(kt, opt);
}

McEstimate MfeSolver::x_at(double r, double z, const Curve& f) const {
    McConfig mc;
    mc.n_paths = cfg_.x_paths;
    mc.steps = cfg_.sim_steps;
    mc.seed = mix_seed(cfg_.seed, kSeedX);
    return x_of_r(p_, c_, r, z, f, mc);
}

InversionResult MfeSolver::invert(double x, double z) const {
    const double hat = threshold_hat_x0(p_, z);
    if (!(x >= 0.0 && x < hat))
        throw std::domain_error("invert: x must lie in [0, x_hat0(z)); use the outperforming branch");

    InversionResult out;
    auto probe = [&](double r) {
        FixedPointResult fp = fixed_point_at(r, z);
        McEstimate xe = x_at(r, z, fp.f);
        out.trace.push_back({r, xe.value, xe.std_error});
        return std::pair<McEstimate, Curve>(xe, std::move(fp.f));
    };
    auto accept = [&](double xv, double se) { return std::fabs(xv - x) < cfg_.x_tol + 3.0 * se; };

    double r_lo = 1e-3;
    auto [x_lo, f_lo] = probe(r_lo);
    if (accept(x_lo.value, x_lo.std_error) || x_lo.value >= x) {
        // x at (or below) the smallest probed level; x(r) -> 0 as r -> 0
        out.r = r_lo;
        out.f = std::move(f_lo);
        out.x_achieved = x_lo.value;
        out.x_se = x_lo.std_error;
        return out;
    }

    double r_hi = 1.0;
    Curve f_hi;
    double xhi_val = 0.0, xhi_se = 0.0;
    bool bracketed = false;
    while (r_hi <= cfg_.r_hi_cap) {
        auto [xe, fc] = probe(r_hi);
        xhi_val = xe.value;
        xhi_se = xe.std_error;
        f_hi = std::move(fc);
        if (accept(xhi_val, xhi_se)) {
            out.r = r_hi;
            out.f = std::move(f_hi);
            out.x_achieved = xhi_val;
            out.x_se = xhi_se;
            return out;
        }
        if (xhi_val >= x) {
            bracketed = true;
            break;
        }
        r_lo = r_hi;
        r_hi *= 2.0;
    }
    if (!bracketed) {
        // x(r) -> x_hat0 from below; a monotone sweep that never crossed means
        // the target sits in the tail. Scan once more on a finer log grid.
        double best_r = r_lo;
        double best_gap = std::fabs(x_lo.value - x);
        Curve best_f = f_lo;
        double best_x = x_lo.value, best_se = x_lo.std_error;
        for (double rr = r_lo; rr <= cfg_.r_hi_cap; rr *= 1.3) {
            auto [xe, fc] = probe(rr);
            if (std::fabs(xe.value - x) < best_gap) {
                best_gap = std::fabs(xe.value - x);
                best_r = rr;
                best_f = std::move(fc);
                best_x = xe.value;
                best_se = xe.std_error;
            }
            if (xe.value >= x) break;
        }
        if (!accept(best_x, best_se))
            throw std::runtime_error("invert: bracket failure, closest x(r) = " + std::to_string(best_x)
                                     + " at r = " + std::to_string(best_r));
        out.r = best_r;
        out.f = std::move(best_f);
        out.x_achieved = best_x;
        out.x_se = best_se;
        return out;
    }

    Curve f_mid = f_hi;
    double r_mid = r_hi, x_mid = xhi_val, se_mid = xhi_se;
    for (std::size_t it = 0; it < 48; ++it) {
        r_mid = 0.5 * (r_lo + r_hi);
        auto [xe, fc] = probe(r_mid);
        x_mid = xe.value;
        se_mid = xe.std_error;
        f_mid = std::move(fc);
        if (accept(x_mid, se_mid)) break;
        if (x_mid < x)
            r_lo = r_mid;
        else
            r_hi = r_mid;
        if (r_hi - r_lo < 1e-5 * (1.0 + r_mid)) break;
    }
    if (!accept(x_mid, se_mid))
        throw std::runtime_error("invert: bisection did not reach tolerance, |x(r) - x| = "
                                 + std::to_string(std::fabs(x_mid - x)));
    out.r = r_mid;
    out.f = std::move(f_mid);
    out.x_achieved = x_mid;
    out.x_se = se_mid;
    return out;
}

Curve MfeSolver::closed_form_drift(double z0) const {
    const double pref = (1.0 - p_.lambda) * p_.sigma_z * p_.mu / p_.sigma;
    std::vector<double> vals(curve_grid_.n_nodes());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double t = curve_grid_.node(i);
        vals[i] = pref * std::exp(c_.eta * (p_.horizon - t) + p_.mu_z * t) * z0;
    }
    return Curve(curve_grid_, std::move(vals));
}

MfeResult MfeSolver::solve(double x0, double z0) const {
    if (x0 < 0.0 || z0 < 0.0) throw std::domain_error("solve_mfe: x0, z0 must be >= 0");

    MfeResult res;
    res.x0 = x0;
    res.z0 = z0;
    res.x_hat0 = threshold_hat_x0(p_, z0);
    res.provenance = {cfg_.seed, cfg_.curve_intervals, cfg_.sim_steps, cfg_.kernel_paths, cfg_.x_paths};
    res.residual_bound = cfg_.fp_tol;

    if (p_.lambda == 1.0) {
        // the agent tracks only the population average; no investment at all
        res.f_star = Curve::constant(curve_grid_, 0.0);
        res.region = Region::outperforming;
        res.degenerate = true;
        return res;
    }
    if (x0 >= res.x_hat0) {
        res.f_star = closed_form_drift(z0);
        res.region = Region::outperforming;
        res.residual = 0.0;  // by convention on the closed-form branch
        res.residual_bound = cfg_.fp_tol * (1.0 + res.f_star.sup_norm());
        return res;
    }

    InversionResult inv = invert(x0, z0);
    res.region = Region::underperforming;
    res.r_star = inv.r;
    res.f_star = std::move(inv.f);
    res.trace = std::move(inv.trace);

    const KernelTable fresh = build_table(inv.r, z0, cfg_.certificate_paths,
                                          mix_seed(cfg_.seed, kSeedCertificate));
    res.residual = sup_distance(apply_J(res.f_star, fresh), res.f_star);
    res.residual_bound = cfg_.fp_tol * (1.0 + res.f_star.sup_norm());
    return res;
}

MfeResult solve_mfe(const ModelParams& p, const DerivedConstants& /*c*/, double x0, double z0,
                    const SolveConfig& cfg) {
    return MfeSolver(p, cfg).solve(x0, z0);
}

}  // namespace mfgtrack
