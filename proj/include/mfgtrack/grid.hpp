#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mfgtrack {

// Uniform time grid: n_steps intervals between t_start and t_end.
struct TimeGrid {
    double t_start{0.0};
    double t_end{1.0};
    std::size_t n_steps{1};

    TimeGrid() = default;
    TimeGrid(double t0, double t1, std::size_t steps) : t_start(t0), t_end(t1), n_steps(steps) {
        if (!(t_start < t_end)) throw std::invalid_argument("TimeGrid: t_start must be < t_end");
        if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double dt() const { return (t_end - t_start) / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double node(std::size_t k) const { return t_start + static_cast<double>(k) * dt(); }
    double duration() const { return t_end - t_start; }

    bool contains(double t) const {
        const double slack = 1e-12 * (1.0 + duration());
        return t >= t_start - slack && t <= t_end + slack;
    }

    // Largest node index k with node(k) <= t, clamped to [0, n_steps].
    std::size_t floor_index(double t) const {
        if (t <= t_start) return 0;
        if (t >= t_end) return n_steps;
        auto k = static_cast<std::size_t>((t - t_start) / dt());
        while (k + 1 <= n_steps && node(k + 1) <= t) ++k;
        return k;
    }

    bool operator==(const TimeGrid& o) const {
        return t_start == o.t_start && t_end == o.t_end && n_steps == o.n_steps;
    }
};

// Piecewise-linear curve on a uniform grid. Used for the population drift f,
// kernel columns and residual profiles.
class Curve {
public:
    Curve() = default;
    Curve(const TimeGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.n_nodes())
            throw std::invalid_argument("Curve: values size must match grid node count");
    }

    static Curve constant(const TimeGrid& grid, double c) {
        return Curve(grid, std::vector<double>(grid.n_nodes(), c));
    }

    const TimeGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }

    // Linear interpolation; clamps to the end values outside the grid.
    double value(double t) const {
        if (t <= grid_.t_start) return values_.front();
        if (t >= grid_.t_end) return values_.back();
        const double pos = (t - grid_.t_start) / grid_.dt();
        auto k = static_cast<std::size_t>(pos);
        if (k >= grid_.n_steps) k = grid_.n_steps - 1;
        const double w = pos - static_cast<double>(k);
        return (1.0 - w) * values_[k] + w * values_[k + 1];
    }

    // Exact integral of the piecewise-linear interpolant over [a, b].
    double integral(double a, double b) const {
        if (b < a) return -integral(b, a);
        const double lo = a < grid_.t_start ? grid_.t_start : a;
        const double hi = b > grid_.t_end ? grid_.t_end : b;
        if (hi <= lo) return 0.0;
        const double dt = grid_.dt();
        std::size_t k_lo = grid_.floor_index(lo);
        if (k_lo == grid_.n_steps) k_lo = grid_.n_steps - 1;
        std::size_t k_hi = grid_.floor_index(hi);
        if (k_hi == grid_.n_steps) k_hi = grid_.n_steps - 1;
        if (k_lo == k_hi) {
            return 0.5 * (value(lo) + value(hi)) * (hi - lo);
        }
        double total = 0.5 * (value(lo) + values_[k_lo + 1]) * (grid_.node(k_lo + 1) - lo);
        for (std::size_t k = k_lo + 1; k < k_hi; ++k)
            total += 0.5 * (values_[k] + values_[k + 1]) * dt;
        total += 0.5 * (values_[k_hi] + value(hi)) * (hi - grid_.node(k_hi));
        return total;
    }

    double integral_to_end(double t) const { return integral(t, grid_.t_end); }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values_) {
            const double a = v < 0.0 ? -v : v;
            if (a > m) m = a;
        }
        return m;
    }

    double min_value() const {
        double m = values_.front();
        for (double v : values_)
            if (v < m) m = v;
        return m;
    }

private:
    TimeGrid grid_{};
    std::vector<double> values_{};
};

inline double sup_distance(const Curve& a, const Curve& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("sup_distance: grid mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
        if (d > m) m = d;
    }
    return m;
}

}  // namespace mfgtrack
