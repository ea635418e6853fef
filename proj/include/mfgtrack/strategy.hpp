#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "mfgtrack/estimate.hpp"
#include "mfgtrack/grid.hpp"
#include "mfgtrack/kernels.hpp"
#include "mfgtrack/mfe.hpp"
#include "mfgtrack/params.hpp"

namespace mfgtrack {

// Closed-form feedback amount on the outperforming region.
inline double theta_outperforming(const ModelParams& p, const DerivedConstants& c, double t, double z) {
    return (1.0 - p.lambda) * p.sigma_z / p.sigma * std::exp(c.eta * (p.horizon - t)) * z;
}

struct StrategyConfig {
    std::size_t psi_paths{20000};
    std::size_t psi_r_points{40};
    double basis_dr{0.01};
    std::uint64_t seed{20240801};
};

// Evaluates the optimal feedback rule along the dual state (t, R_t, Z_t).
// On the underperforming branch the two phi-quadrature terms and the
// stopped expectation term are tabulated once and interpolated.
class StrategyContext {
public:
    StrategyContext(const ModelParams& p, const DerivedConstants& c, const TimeGrid& curve_grid,
                    const TimeGrid& sim_grid, const Curve& f_star, Region region, bool degenerate,
                    double r0, const StrategyConfig& cfg);
    StrategyContext(const MfeSolver& solver, const MfeResult& mfe, const StrategyConfig& cfg);

    const ModelParams& params() const { return p_; }
    const DerivedConstants& constants() const { return c_; }
    const Curve& f_star() const { return f_star_; }
    Region region() const { return region_; }
    bool degenerate() const { return degenerate_; }
    double r0() const { return r0_; }
    const TimeGrid& sim_grid() const { return sim_grid_; }

    // Feedback amount; dispatches on the region flag.
    double theta(double t, double r, double z) const;

    // varphi with unit index level: varphi(t, r, z) = z * psi(t, r).
    double psi(double t, double r) const;
    double psi_se(double t, double r) const;

    // Systematic component of the theta standard error from the psi table.
    double theta_table_se(double t, double r, double z) const;

private:
    void build_tables(const StrategyConfig& cfg);
    double c_table(const std::vector<double>& tab, double t, double r) const;

    ModelParams p_;
    DerivedConstants c_;
    TimeGrid curve_grid_;
    TimeGrid sim_grid_;
    Curve f_star_;
    Region region_;
    bool degenerate_{false};
    double r0_{0.0};

    std::shared_ptr<const KernelBasis> basis_;
    std::vector<double> c1_, c2_;  // curve nodes x basis r grid
    std::vector<double> psi_r_grid_;
    std::vector<double> psi_, psi_se_;  // sim time-to-go nodes x psi r grid
};

struct WealthEnsemble {
    TimeGrid grid;
    std::size_t n_paths{0};
    std::vector<double> mean_v, se_v;
    std::vector<double> mean_theta, se_theta, theta_table_se;
    std::vector<double> f_star_on_grid;
    double max_reconstruction_gap{0.0};  // sup-formula state vs reflected driver state
    std::size_t region_violations{0};
    McEstimate shortfall;  // E[A_0 + int_0^T e^{-rho s} dA_s]
    McEstimate terminal_wealth;
    double v0{0.0}, z0{0.0};
};

WealthEnsemble simulate_equilibrium_wealth(const StrategyContext& ctx, double v0, double z0,
                                           const TimeGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed);

struct ConsistencyReport {
    TimeGrid grid;
    std::vector<double> residual, residual_se;      // |mu E theta_t - f*(t)| per node
    std::vector<double> integrated, integrated_se;  // |E V_t - v0 - int_0^t f*|
    double sup_residual{0.0};
    double sup_rel{0.0};  // sup residual / ||f*||
    std::size_t worst_node{0};
    bool passed{false};
};

// perturb scales the reference drift; 1.1 injects a 10% fault the report must flag.
ConsistencyReport consistency_from_ensemble(const StrategyContext& ctx, const WealthEnsemble& we,
                                            double rel_tol = 0.02, double perturb = 1.0);
ConsistencyReport verify_consistency(const StrategyContext& ctx, double v0, double z0,
                                     const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                     double rel_tol = 0.02, double perturb = 1.0);

// Primal state reached by the dual level r at time t: x = e^{rho t + r} v_r(t, r, z).
// Parametrizes the x-sweeps of the feedback rule.
McEstimate primal_state_x(const ModelParams& p, const DerivedConstants& c, double t, double r,
                          double z, const Curve& f, const McConfig& mc);

// v(0, r, z) sampled on an r grid with shared noise across levels; supplies
// the primal value u(0, x, z) = min(0, min_r { v + x e^{-r} }) and the
// shortfall value w.
class DualValueCurve {
public:
    DualValueCurve(const ModelParams& p, const DerivedConstants& c, const Curve& f, double z,
                   std::vector<double> r_nodes, const TimeGrid& grid, std::size_t n_paths,
                   std::uint64_t seed);

    double u(double x) const;
    double u_se(double x) const;
    double w(double v0) const;
    const std::vector<double>& r_nodes() const { return r_nodes_; }
    const std::vector<double>& v_values() const { return v_vals_; }
    const std::vector<double>& v_se() const { return v_se_; }

private:
    ModelParams p_;
    double z_;
    std::vector<double> r_nodes_, v_vals_, v_se_;
};

std::vector<double> default_dual_levels(double r_max = 10.0);

// w(v0, z0) under the solved equilibrium drift.
double value_w(const ModelParams& p, const DerivedConstants& c, const Curve& f_star, double v0,
               double z0, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

}  // namespace mfgtrack
