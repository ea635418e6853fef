#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "mfgtrack/grid.hpp"
#include "mfgtrack/params.hpp"
#include "mfgtrack/rng.hpp"

namespace mfgtrack {

// One simulated path on the nodes of a grid. A single Brownian increment
// array drives both the reflected process and the index path, which is the
// common-random-number coupling the kernel estimators rely on.
struct PathBundle {
    static constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

    std::vector<double> dw;          // n_steps increments, sqrt(dt)-scaled normals
    std::vector<double> driver;      // D_k = r + r_drift (t_k - t_0) + r_vol W_k
    std::vector<double> local_time;  // L_k = max(0, max_{j<=k} -D_j), nondecreasing
    std::vector<double> reflected;   // R_k = D_k + L_k >= 0
    std::vector<double> dual;        // Y_k = exp(-R_k) in (0,1]
    std::vector<double> index;       // Z_k, filled by simulate_joint
    std::size_t tau_idx{kNever};     // first node with D_k <= 0
};

namespace detail {

inline void fill_increments(const TimeGrid& grid, RngStream& rng, std::vector<double>& dw) {
    const double sq = std::sqrt(grid.dt());
    dw.resize(grid.n_steps);
    for (std::size_t k = 0; k < grid.n_steps; ++k) dw[k] = sq * rng.normal();
}

// Discrete Skorokhod transform of the sampled driver: L is the running
// maximum of (-D)^+, R = D + L. R hits zero exactly (in floating point)
// whenever -D reaches a new running maximum.
inline void reflect_driver(const DerivedConstants& c, const TimeGrid& grid, double r,
                           const std::vector<double>& dw, PathBundle& out) {
    const std::size_t n = grid.n_nodes();
    out.driver.resize(n);
    out.local_time.resize(n);
    out.reflected.resize(n);
    out.dual.resize(n);
    const double dt = grid.dt();
    double d = r;
    double w = 0.0;
    double run_max = 0.0;  // max(0, max -D) so far
    out.tau_idx = PathBundle::kNever;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            w += dw[k - 1];
            d = r + c.r_drift * (static_cast<double>(k) * dt) + c.r_vol * w;
        }
        if (-d > run_max) run_max = -d;
        out.driver[k] = d;
        out.local_time[k] = run_max;
        out.reflected[k] = d + run_max;
        out.dual[k] = std::exp(-out.reflected[k]);
        if (out.tau_idx == PathBundle::kNever && d <= 0.0) out.tau_idx = k;
    }
}

}  // namespace detail

// Reflected process from level r >= 0 via the exact discrete Skorokhod
// transform of the grid driver. The _into variant reuses the bundle's storage.
inline void simulate_reflected_into(PathBundle& b, const DerivedConstants& c, const TimeGrid& grid,
                                    double r, RngStream& rng) {
    if (r < 0.0) throw std::domain_error("simulate_reflected: r must be >= 0");
    detail::fill_increments(grid, rng, b.dw);
    detail::reflect_driver(c, grid, r, b.dw, b);
}

inline PathBundle simulate_reflected(const DerivedConstants& c, const TimeGrid& grid, double r,
                                     RngStream& rng) {
    PathBundle b;
    simulate_reflected_into(b, c, grid, r, rng);
    return b;
}

// Exact log-Euler update of the index GBM from the given increments.
inline void gbm_from_increments_into(std::vector<double>& path, const ModelParams& p,
                                     const TimeGrid& grid, double z, const std::vector<double>& dw) {
    if (z < 0.0) throw std::domain_error("gbm_from_increments: z must be >= 0");
    path.resize(grid.n_nodes());
    const double drift = (p.mu_z - 0.5 * p.sigma_z * p.sigma_z) * grid.dt();
    path[0] = z;
    for (std::size_t k = 0; k < grid.n_steps; ++k)
        path[k + 1] = path[k] * std::exp(drift + p.sigma_z * dw[k]);
}

inline std::vector<double> gbm_from_increments(const ModelParams& p, const TimeGrid& grid, double z,
                                               const std::vector<double>& dw) {
    std::vector<double> path;
    gbm_from_increments_into(path, p, grid, z, dw);
    return path;
}

// Standalone index path; draws the same increment sequence a reflected path
// would draw from the same stream.
inline std::vector<double> simulate_gbm(const ModelParams& p, const TimeGrid& grid, double z,
                                        RngStream& rng) {
    std::vector<double> dw;
    detail::fill_increments(grid, rng, dw);
    return gbm_from_increments(p, grid, z, dw);
}

// Reflected path and index path from one Brownian motion.
inline void simulate_joint_into(PathBundle& b, const ModelParams& p, const DerivedConstants& c,
                                const TimeGrid& grid, double r, double z, RngStream& rng) {
    simulate_reflected_into(b, c, grid, r, rng);
    gbm_from_increments_into(b.index, p, grid, z, b.dw);
}

inline PathBundle simulate_joint(const ModelParams& p, const DerivedConstants& c, const TimeGrid& grid,
                                 double r, double z, RngStream& rng) {
    PathBundle b;
    simulate_joint_into(b, p, c, grid, r, z, rng);
    return b;
}

// Hitting time of the driver at zero, detected on grid nodes; the sentinel
// convention is tau ^ T = T when the driver stays positive.
inline double hitting_time_tau(const PathBundle& b, const TimeGrid& grid) {
    if (b.tau_idx == PathBundle::kNever) return grid.t_end;
    return grid.node(b.tau_idx);
}

// Debug dump, one row per node: k, t, D, L, R, Y, Z.
inline void dump_path_csv(std::ostream& os, const PathBundle& b, const TimeGrid& grid) {
    os << "k,t,D,L,R,Y,Z\n";
    char buf[256];
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
        const double z = b.index.empty() ? 0.0 : b.index[k];
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", k, grid.node(k),
                      b.driver[k], b.local_time[k], b.reflected[k], b.dual[k], z);
        os << buf;
    }
}

}  // namespace mfgtrack
