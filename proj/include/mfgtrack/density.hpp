#pragma once

#include <cstddef>
#include <vector>

#include "mfgtrack/params.hpp"

namespace mfgtrack {

// Joint density phi(s, x, y) of (position, running maximum) at horizon s for
// the driving law of the dual reflected process. Domain: s > 0, y >= 0, x <= y.
double phi_density(const DerivedConstants& c, double s, double x, double y);

struct QuadResult {
    double value{0.0};
    double err_bound{0.0};
    bool converged{true};
};

// int_{-inf}^{r} e^{a x} phi(tau, x, r) dx via the substitution u = r - x and
// adaptive quadrature on [0, u_max], with the Gaussian tail truncated below
// 1e-12 relative mass.
QuadResult inner_phi_integral_ex(const DerivedConstants& c, double tau, double r, double a);
double inner_phi_integral(const DerivedConstants& c, double tau, double r, double a);

// Inner integrals tabulated on tau_i = i * dtau (row 0 holds the tau -> 0
// limit, which is zero) times a uniform r grid, linear interpolation in r.
class InnerIntegralTable {
public:
    // Precomputed r-interpolation position, reusable across tau rows.
    struct RCoef {
        std::size_t j{0};
        double w{0.0};
    };

    InnerIntegralTable() = default;
    InnerIntegralTable(const DerivedConstants& c, double a, double dtau, std::size_t n_tau,
                       double r_max, std::size_t n_r);

    double at(std::size_t tau_idx, double r) const;
    RCoef coef(double r) const {
        if (r <= 0.0) return {0, 0.0};
        if (r >= r_max_) return {n_r_ - 1, 1.0};
        const double pos = r / dr_;
        auto j = static_cast<std::size_t>(pos);
        if (j >= n_r_) j = n_r_ - 1;
        return {j, pos - static_cast<double>(j)};
    }
    double at_coef(std::size_t tau_idx, RCoef rc) const {
        const double* row = &vals_[tau_idx * (n_r_ + 1)];
        return (1.0 - rc.w) * row[rc.j] + rc.w * row[rc.j + 1];
    }
    double exponent_weight() const { return a_; }
    double dtau() const { return dtau_; }
    std::size_t n_tau() const { return n_tau_; }
    double r_max() const { return r_max_; }
    std::size_t n_r() const { return n_r_; }

private:
    double a_{0.0};
    double dtau_{0.0};
    std::size_t n_tau_{0};
    double r_max_{0.0};
    std::size_t n_r_{0};
    double dr_{0.0};
    std::vector<double> vals_;  // (n_tau+1) rows by (n_r+1) columns
};

}  // namespace mfgtrack
