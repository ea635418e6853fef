#pragma once

#include <cstddef>
#include <string>

#include "mfgtrack/mfe.hpp"
#include "mfgtrack/params.hpp"

namespace mfgtrack {

// One run's worth of settings, read from a flat key = value file. Model keys
// (mu, sigma, mu_z, sigma_z, lambda, rho, horizon, v0, z0) are fixed names;
// x0 may replace v0 to set the auxiliary state directly.
struct RunConfig {
    ModelParams params{};
    double z0{0.0};
    bool has_v0{false};
    double v0{0.0};
    bool has_x0{false};
    double x0{0.0};

    SolveConfig solve{};
    std::size_t verify_paths{100000};
    std::size_t psi_paths{20000};
    std::size_t nplayer_reps{1000};
    std::size_t nplayer_steps{200};
    double heterogeneity_delta{0.0};
    std::string out_dir{"."};

    // auxiliary state actually used by the run
    double initial_x0() const {
        if (has_x0) return x0;
        return initial_auxiliary_state(params, v0, z0).x0;
    }
    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace mfgtrack
