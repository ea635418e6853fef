#pragma once

#include <cmath>
#include <stdexcept>

#include "mfgtrack/grid.hpp"

namespace mfgtrack {

// Market and preference parameters of the tracking game.
struct ModelParams {
    double mu;       // risky asset drift
    double sigma;    // risky asset volatility
    double mu_z;     // index drift
    double sigma_z;  // index volatility
    double lambda;   // competition weight, in [0,1]
    double rho;      // discount rate
    double horizon;  // T

    // Throws std::invalid_argument; every downstream formula assumes the
    // index Sharpe ratio strictly dominates the asset Sharpe ratio.
    void validate() const {
        auto ok = [](double v) { return std::isfinite(v); };
        if (!ok(mu) || !ok(sigma) || !ok(mu_z) || !ok(sigma_z) || !ok(lambda) || !ok(rho) || !ok(horizon))
            throw std::invalid_argument("ModelParams: non-finite field");
        if (mu <= 0.0) throw std::invalid_argument("ModelParams: mu must be > 0");
        if (sigma <= 0.0) throw std::invalid_argument("ModelParams: sigma must be > 0");
        if (mu_z <= 0.0) throw std::invalid_argument("ModelParams: mu_z must be > 0");
        if (sigma_z <= 0.0) throw std::invalid_argument("ModelParams: sigma_z must be > 0");
        if (rho <= 0.0) throw std::invalid_argument("ModelParams: rho must be > 0");
        if (horizon <= 0.0) throw std::invalid_argument("ModelParams: horizon must be > 0");
        if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("ModelParams: lambda must lie in [0,1]");
        if (!(mu_z * sigma > mu * sigma_z))
            throw std::invalid_argument("ModelParams: index Sharpe ratio must strictly exceed the asset Sharpe ratio");
    }
};

// Scalar constants derived from the model parameters.
struct DerivedConstants {
    double eta;          // mu_z - mu sigma_z / sigma, > 0 under the Sharpe condition
    double kappa;        // mu_z - sigma_z^2/2 - mu sigma_z/(2 sigma) + sigma sigma_z rho / mu
    double mu_tilde;     // mu/(2 sigma) - sigma rho / mu
    double sigma_tilde;  // -mu / sigma (negative); enters formulas squared
    double r_drift;      // mu^2/(2 sigma^2) - rho, drift of the reflected process
    double r_vol;        // mu / sigma
};

struct InitialState {
    double v0;  // initial wealth
    double z0;  // initial index level
    double x0;  // initial auxiliary state, ((1-lambda)(v0-z0))^+
};

inline DerivedConstants derive_constants(const ModelParams& p) {
    p.validate();
    DerivedConstants c;
    c.eta = p.mu_z - p.mu * p.sigma_z / p.sigma;
    c.kappa = p.mu_z - 0.5 * p.sigma_z * p.sigma_z - p.mu * p.sigma_z / (2.0 * p.sigma)
              + p.sigma * p.sigma_z * p.rho / p.mu;
    c.mu_tilde = p.mu / (2.0 * p.sigma) - p.sigma * p.rho / p.mu;
    c.sigma_tilde = -p.mu / p.sigma;
    c.r_drift = p.mu * p.mu / (2.0 * p.sigma * p.sigma) - p.rho;
    c.r_vol = p.mu / p.sigma;
    return c;
}

// Initial-wealth threshold separating the outperforming region from the
// underperforming one: (1-lambda)(lambda(e^{mu_z T} - e^{eta T}) + e^{eta T} - 1) z.
inline double threshold_hat_x0(const ModelParams& p, double z) {
    if (z < 0.0) throw std::invalid_argument("threshold_hat_x0: z must be >= 0");
    const double eta = p.mu_z - p.mu * p.sigma_z / p.sigma;
    const double t = p.horizon;
    return (1.0 - p.lambda) * (p.lambda * (std::exp(p.mu_z * t) - std::exp(eta * t)) + std::exp(eta * t) - 1.0) * z;
}

// Region boundary x_0(t,z) = lambda int_t^T f + (1-lambda)(e^{eta(T-t)} - 1) z,
// with the f-integral taken exactly on the curve's own grid.
inline double boundary_x0(const ModelParams& p, const Curve& f, double t, double z) {
    if (z < 0.0) throw std::invalid_argument("boundary_x0: z must be >= 0");
    if (t < 0.0 || t > p.horizon || !f.grid().contains(t))
        throw std::domain_error("boundary_x0: t outside [0, T]");
    const double eta = p.mu_z - p.mu * p.sigma_z / p.sigma;
    return p.lambda * f.integral(t, p.horizon) + (1.0 - p.lambda) * (std::exp(eta * (p.horizon - t)) - 1.0) * z;
}

inline InitialState initial_auxiliary_state(const ModelParams& p, double v0, double z0) {
    if (v0 < 0.0 || z0 < 0.0) throw std::invalid_argument("initial_auxiliary_state: v0, z0 must be >= 0");
    InitialState s;
    s.v0 = v0;
    s.z0 = z0;
    const double raw = (1.0 - p.lambda) * (v0 - z0);
    s.x0 = raw > 0.0 ? raw : 0.0;
    return s;
}

}  // namespace mfgtrack
