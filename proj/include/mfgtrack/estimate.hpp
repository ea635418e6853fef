#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace mfgtrack {

// Monte-Carlo value with its standard error.
struct McEstimate {
    double value{0.0};
    double std_error{0.0};
    std::size_t n_paths{0};
};

// Sampling budget for a single estimator call.
struct McConfig {
    std::size_t n_paths{100000};
    std::size_t steps{500};  // simulation steps over the call's horizon
    std::uint64_t seed{1};
};

struct MeanAccumulator {
    double sum{0.0};
    double sum_sq{0.0};
    std::size_t n{0};

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const MeanAccumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        double v = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    McEstimate estimate() const {
        McEstimate e;
        e.value = mean();
        e.std_error = n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
        e.n_paths = n;
        return e;
    }
};

inline double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace mfgtrack
