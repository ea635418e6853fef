#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mfgtrack/density.hpp"
#include "mfgtrack/estimate.hpp"
#include "mfgtrack/grid.hpp"
#include "mfgtrack/params.hpp"
#include "mfgtrack/paths.hpp"

namespace mfgtrack {

// Mean over a common-random-number path ensemble of a per-path functional.
// Chunked accumulation keeps the result independent of the worker count.
McEstimate mc_over_paths(const ModelParams& p, const DerivedConstants& c, const TimeGrid& grid,
                         double r, double z, std::uint64_t seed, std::size_t n_paths,
                         const std::function<double(const PathBundle&)>& fn);

// First node index >= k0 where the reflected path sits exactly on the
// boundary; n_nodes() when it never returns.
std::size_t first_boundary_node(const PathBundle& b, std::size_t k0);

// Deterministic machinery shared by every kernel table at fixed parameters:
// inner-integral tables for the two exponent weights on the curve-grid tau
// spacing, and the time integral C2 entering H.
class KernelBasis {
public:
    KernelBasis(const ModelParams& p, const DerivedConstants& c, const TimeGrid& curve_grid,
                double r_max = 20.0, std::size_t n_r = 2000);

    const ModelParams& params() const { return p_; }
    const DerivedConstants& constants() const { return c_; }
    const TimeGrid& curve_grid() const { return curve_grid_; }
    const InnerIntegralTable& q_one() const { return q_one_; }
    const InnerIntegralTable& q_mix() const { return q_mix_; }

    // C2(i, r) = int_{t_i}^{T} exp(-(rho - kappa)(s - t_i)) q_mix(s - t_i, r) ds,
    // trapezoid on the curve grid with the s -> t_i endpoint at its zero limit.
    double c2(std::size_t node, double r) const { return c2_coef(node, q_mix_.coef(r)); }
    double c2_coef(std::size_t node, InnerIntegralTable::RCoef rc) const {
        const double* row = &c2_[node * (q_mix_.n_r() + 1)];
        return (1.0 - rc.w) * row[rc.j] + rc.w * row[rc.j + 1];
    }

private:
    ModelParams p_;
    DerivedConstants c_;
    TimeGrid curve_grid_;
    InnerIntegralTable q_one_;
    InnerIntegralTable q_mix_;
    std::vector<double> c2_;
};

struct KernelMcConfig {
    std::size_t n_paths{10000};
    std::uint64_t seed{1};
};

// Monte-Carlo tables of G(r, s_j, t_i) and H(r, z, t_i) on the curve grid,
// estimated from one joint (R, Z) ensemble simulated on a finer grid whose
// step count is a multiple of the curve intervals.
class KernelTable {
public:
    KernelTable(const KernelBasis& basis, const TimeGrid& sim_grid, double r, double z,
                const KernelMcConfig& mc, bool build_g = true, bool build_h = true);

    const TimeGrid& curve_grid() const { return curve_grid_; }
    double r_level() const { return r_; }
    double z_level() const { return z_; }
    std::size_t n_paths() const { return n_paths_; }

    double g(std::size_t i, std::size_t j) const { return j < i ? 0.0 : g_[idx(i, j)]; }
    double g_se(std::size_t i, std::size_t j) const { return j < i ? 0.0 : g_se_[idx(i, j)]; }
    double h(std::size_t i) const { return h_[i]; }
    double h_se(std::size_t i) const { return h_se_[i]; }
    Curve h_curve() const { return Curve(curve_grid_, h_); }

    // sup_t of the trapezoid integral int_t^T G(r, s, t) ds; the Picard
    // contraction constant estimate.
    double contraction_sup() const;

    void write_csv(std::ostream& os) const;
    static KernelTable read_csv(std::istream& is);

private:
    KernelTable() = default;
    std::size_t idx(std::size_t i, std::size_t j) const { return i * (curve_grid_.n_steps + 1) + j; }

    TimeGrid curve_grid_{};
    double r_{0.0};
    double z_{0.0};
    std::size_t n_paths_{0};
    std::vector<double> g_, g_se_, h_, h_se_;
};

// Point estimators used by tests and probe sweeps. Closed-form pieces are
// returned exactly (zero standard error) where the formulas degenerate.
McEstimate kernel_G(const ModelParams& p, const DerivedConstants& c, double r, double s, double t,
                    const McConfig& mc);
McEstimate kernel_H(const ModelParams& p, const DerivedConstants& c, double r, double z, double t,
                    const McConfig& mc);
McEstimate varphi_bar(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                      const McConfig& mc);
McEstimate value_v(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                   const Curve& f, const McConfig& mc);
McEstimate deriv_v_r(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                     const Curve& f, const McConfig& mc);
McEstimate deriv_v_rr(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                      const Curve& f, const McConfig& mc);

}  // namespace mfgtrack
