#include "mfgtrack/density.hpp"

#include <cmath>
#include <stdexcept>

#include "mfgtrack/parallel.hpp"

namespace mfgtrack {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

struct Integrand {
    // pref * (r + u) * exp(b (r - u) - mu_tilde^2 tau / 2 - (r + u)^2 / (2 c))
    double pref;
    double b;
    double r;
    double c;        // sigma_tilde^2 * tau
    double exp_fix;  // b r - mu_tilde^2 tau / 2

    double operator()(double u) const {
        const double w = r + u;
        return pref * w * std::exp(exp_fix - b * u - w * w / (2.0 * c));
    }
};

// Log-scale magnitude bound used to skip quadrature where the result
// underflows anyway.
double log_magnitude_bound(const Integrand& g, double tau, double s2) {
    const double log_pref = std::log(2.0) - std::log(s2) - 0.5 * std::log(2.0 * s2 * kPi * tau * tau * tau);
    const double x = g.r + g.b * g.c;
    double log_peak;
    if (x >= 0.0) {
        // decreasing mode at u = 0
        log_peak = g.exp_fix - g.r * g.r / (2.0 * g.c) + std::log(1.0 + g.r);
    } else {
        // interior mode at u = -x
        log_peak = g.exp_fix + g.b * g.r + 0.5 * g.b * g.b * g.c + std::log(1.0 + g.r - x);
    }
    return log_pref + log_peak + std::log(1.0 + 10.0 * std::sqrt(g.c));
}

struct Segment {
    double a, b;
    double fa, fm, fb;
    double whole;
};

double simpson(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

QuadResult adaptive_simpson(const Integrand& f, double a, double b, double tol) {
    QuadResult out;
    const double m0 = 0.5 * (a + b);
    Segment root{a, b, f(a), f(m0), f(b), 0.0};
    root.whole = simpson(root.fa, root.fm, root.fb, b - a);

    std::vector<Segment> stack{root};
    double total = 0.0;
    double err = 0.0;
    std::size_t evals = 3;
    const std::size_t max_evals = 200000;
    bool ok = true;

    while (!stack.empty()) {
        Segment s = stack.back();
        stack.pop_back();
        const double m = 0.5 * (s.a + s.b);
        const double lm = 0.5 * (s.a + m);
        const double rm = 0.5 * (m + s.b);
        const double flm = f(lm);
        const double frm = f(rm);
        evals += 2;
        const double left = simpson(s.fa, flm, s.fm, m - s.a);
        const double right = simpson(s.fm, frm, s.fb, s.b - m);
        const double delta = left + right - s.whole;
        const double local_tol = tol * (s.b - s.a) / (b - a);
        if (std::fabs(delta) <= 15.0 * local_tol || (s.b - s.a) < 1e-14 * (b - a) || evals >= max_evals) {
            total += left + right + delta / 15.0;
            err += std::fabs(delta) / 15.0;
            if (evals >= max_evals && std::fabs(delta) > 15.0 * local_tol) ok = false;
        } else {
            stack.push_back({s.a, m, s.fa, flm, s.fm, left});
            stack.push_back({m, s.b, s.fm, frm, s.fb, right});
        }
    }
    out.value = total;
    out.err_bound = err;
    out.converged = ok;
    return out;
}

}  // namespace

double phi_density(const DerivedConstants& c, double s, double x, double y) {
    if (!(s > 0.0)) throw std::domain_error("phi_density: s must be > 0");
    if (y < 0.0) throw std::domain_error("phi_density: y must be >= 0");
    if (x > y) throw std::domain_error("phi_density: x must be <= y");
    const double s2 = c.sigma_tilde * c.sigma_tilde;
    const double w = 2.0 * y - x;
    const double pref = 2.0 * w / (s2 * std::sqrt(2.0 * s2 * kPi * s * s * s));
    const double expo = c.mu_tilde * x / c.sigma_tilde - 0.5 * c.mu_tilde * c.mu_tilde * s
                        - w * w / (2.0 * s2 * s);
    return pref * std::exp(expo);
}

QuadResult inner_phi_integral_ex(const DerivedConstants& c, double tau, double r, double a) {
    if (!(tau > 0.0)) throw std::domain_error("inner_phi_integral: tau must be > 0");
    if (r < 0.0) throw std::domain_error("inner_phi_integral: r must be >= 0");

    const double s2 = c.sigma_tilde * c.sigma_tilde;
    Integrand g;
    g.r = r;
    g.c = s2 * tau;
    g.b = a + c.mu_tilde / c.sigma_tilde;
    g.pref = 2.0 / (s2 * std::sqrt(2.0 * s2 * kPi * tau * tau * tau));
    g.exp_fix = g.b * r - 0.5 * c.mu_tilde * c.mu_tilde * tau;

    QuadResult out;
    if (log_magnitude_bound(g, tau, s2) < -600.0) return out;  // underflows to zero

    // Truncation point: quadratic exponent has dropped by 60 relative to u = 0.
    const double x = r + g.b * g.c;
    const double u_max = -x + std::sqrt(x * x + 120.0 * g.c);

    const double scale = std::fabs(g(0.0)) + std::fabs(g(0.25 * u_max)) + std::fabs(g(0.5 * u_max)) + 1e-300;
    const double tol = 1e-12 * scale * u_max + 1e-300;
    out = adaptive_simpson(g, 0.0, u_max, tol);
    if (out.value < 0.0) out.value = 0.0;
    return out;
}

double inner_phi_integral(const DerivedConstants& c, double tau, double r, double a) {
    const QuadResult q = inner_phi_integral_ex(c, tau, r, a);
    if (!q.converged && q.err_bound > 1e-6 * (1.0 + std::fabs(q.value)))
        throw std::runtime_error("inner_phi_integral: quadrature did not converge, error bound "
                                 + std::to_string(q.err_bound));
    return q.value;
}

InnerIntegralTable::InnerIntegralTable(const DerivedConstants& c, double a, double dtau,
                                       std::size_t n_tau, double r_max, std::size_t n_r)
    : a_(a), dtau_(dtau), n_tau_(n_tau), r_max_(r_max), n_r_(n_r) {
    if (n_r_ < 1 || r_max_ <= 0.0) throw std::invalid_argument("InnerIntegralTable: bad r grid");
    dr_ = r_max_ / static_cast<double>(n_r_);
    vals_.assign((n_tau_ + 1) * (n_r_ + 1), 0.0);
    parallel_chunks(n_tau_, 1, [&](std::size_t, std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            const std::size_t row = i + 1;  // row 0 stays at the tau -> 0 limit
            const double tau = static_cast<double>(row) * dtau_;
            for (std::size_t j = 0; j <= n_r_; ++j)
                vals_[row * (n_r_ + 1) + j] = inner_phi_integral(c, tau, static_cast<double>(j) * dr_, a_);
        }
    });
}

double InnerIntegralTable::at(std::size_t tau_idx, double r) const {
    if (tau_idx > n_tau_) throw std::out_of_range("InnerIntegralTable::at: tau index");
    if (tau_idx == 0) return 0.0;
    if (r <= 0.0) return vals_[tau_idx * (n_r_ + 1)];
    if (r >= r_max_) return vals_[tau_idx * (n_r_ + 1) + n_r_];
    const double pos = r / dr_;
    auto j = static_cast<std::size_t>(pos);
    if (j >= n_r_) j = n_r_ - 1;
    const double w = pos - static_cast<double>(j);
    const double* row = &vals_[tau_idx * (n_r_ + 1)];
    return (1.0 - w) * row[j] + w * row[j + 1];
}

}  // namespace mfgtrack
