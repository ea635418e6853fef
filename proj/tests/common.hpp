#pragma once

#include "mfgtrack/params.hpp"

namespace testcfg {

// Shared fixture: (mu, sigma, mu_z, sigma_z, lambda, rho) with T = 1,
// the same setting configs/baseline.cfg uses.
inline mfgtrack::ModelParams baseline() {
    return {0.1, 0.1, 0.2, 0.1, 0.2, 1.0, 1.0};
}

}  // namespace testcfg
