#pragma once

#include <cmath>
#include <cstdint>

namespace mfgtrack {

namespace detail {
inline std::uint64_t stafford_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Derives an independent sub-seed for a named purpose (kernel build, probe
// ensemble, ...) so that different estimators never share a stream by accident.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t purpose) {
    return detail::stafford_mix(seed + 0x9E3779B97F4A7C15ULL * (purpose + 1));
}

// Counter-based generator keyed by (seed, stream_id): the k-th draw depends
// only on the key and k, so identical keys give bit-identical sequences no
// matter how paths are scheduled across workers.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) {
        state_ = detail::stafford_mix(seed ^ 0x6A09E667F3BCC909ULL)
                 ^ detail::stafford_mix(stream_id * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return detail::stafford_mix(state_);
    }

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::uint64_t state_;
    double spare_{0.0};
    bool has_spare_{false};
};

}  // namespace mfgtrack
