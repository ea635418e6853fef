#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfgtrack/estimate.hpp"
#include "mfgtrack/grid.hpp"
#include "mfgtrack/kernels.hpp"
#include "mfgtrack/params.hpp"

namespace mfgtrack {

enum class Region { outperforming, underperforming };

struct FixedPointOptions {
    double tol{1e-3};
    std::size_t max_iter{200};
};

struct FixedPointResult {
    Curve f;
    double residual{0.0};  // sup |Jf - f| on the solve table
    std::size_t iterations{0};
    bool used_backward{false};
    double contraction{0.0};  // sup_t int_t^T G(r, s, t) ds
    std::vector<double> residual_history;
};

// One Picard step: (Jf)(t_i) = trapezoid_j G(i, j) f_j + H_i on the curve grid.
Curve apply_J(const Curve& f, const KernelTable& kt);

FixedPointResult solve_fixed_point_from(const KernelTable& kt, const Curve& f0,
                                        const FixedPointOptions& opt);
FixedPointResult solve_fixed_point(const KernelTable& kt, const FixedPointOptions& opt);

// x(r) = e^r v_r(0, r, z) evaluated with the candidate drift curve, the
// dual-to-primal map used for the inversion.
McEstimate x_of_r(const ModelParams& p, const DerivedConstants& c, double r, double z,
                  const Curve& f, const McConfig& mc);

struct RProbe {
    double r{0.0};
    double x{0.0};
    double se{0.0};
};

struct SolveConfig {
    std::size_t curve_intervals{100};
    std::size_t sim_steps{500};
    std::size_t kernel_paths{10000};
    std::size_t certificate_paths{40000};
    std::size_t x_paths{100000};
    double fp_tol{1e-3};
    std::size_t fp_max_iter{200};
    double x_tol{1e-2};
    double r_hi_cap{64.0};
    std::uint64_t seed{20240801};
};

struct Provenance {
    std::uint64_t seed{0};
    std::size_t curve_intervals{0};
    std::size_t sim_steps{0};
    std::size_t kernel_paths{0};
    std::size_t x_paths{0};
};

struct MfeResult {
    Curve f_star;
    Region region{Region::outperforming};
    bool degenerate{false};  // lambda = 1: zero drift, flagged rather than rejected
    double r_star{0.0};      // dual level, underperforming branch only
    double x_hat0{0.0};
    double x0{0.0};
    double z0{0.0};
    double residual{0.0};        // out-of-sample sup-norm of Jf* - f*
    double residual_bound{0.0};  // fp_tol (1 + ||f*||)
    Provenance provenance;
    std::vector<RProbe> trace;  // bisection probes, underperforming branch
};

struct InversionResult {
    double r{0.0};
    Curve f;
    double x_achieved{0.0};
    double x_se{0.0};
    std::vector<RProbe> trace;
};

// Holds the grids and the deterministic quadrature basis so repeated probes
// (bisection, sweeps) reuse them; kernel ensembles are re-simulated per r
// with common random numbers across probes.
class MfeSolver {
public:
    MfeSolver(const ModelParams& p, const SolveConfig& cfg);

    const ModelParams& params() const { return p_; }
    const DerivedConstants& constants() const { return c_; }
    const SolveConfig& config() const { return cfg_; }
    const KernelBasis& basis() const { return basis_; }
    const TimeGrid& curve_grid() const { return curve_grid_; }
    const TimeGrid& sim_grid() const { return sim_grid_; }

    KernelTable build_table(double r, double z, std::size_t n_paths, std::uint64_t seed) const;
    FixedPointResult fixed_point_at(double r, double z) const;
    McEstimate x_at(double r, double z, const Curve& f) const;
    InversionResult invert(double x, double z) const;
    MfeResult solve(double x0, double z0) const;

    Curve closed_form_drift(double z0) const;

    // sub-seed purposes
    static constexpr std::uint64_t kSeedKernel = 1;
    static constexpr std::uint64_t kSeedCertificate = 2;
    static constexpr std::uint64_t kSeedX = 3;

private:
    ModelParams p_;
    DerivedConstants c_;
    SolveConfig cfg_;
    TimeGrid curve_grid_;
    TimeGrid sim_grid_;
    KernelBasis basis_;
};

MfeResult solve_mfe(const ModelParams& p, const DerivedConstants& c, double x0, double z0,
                    const SolveConfig& cfg);

}  // namespace mfgtrack
