#pragma once

#include <cstdint>

namespace mopt {

enum class ApproxOrder { Simulated, Leading, FirstCorrection };

/// Summary of a travelling equilibrium, from simulation or asymptotics.
/// Scaled units unless produced by scaling::from_scaled.
struct EquilibriumReport {
    double lambda = 0.0; // mean fitness (= 1 - mean mortality under frequency p)
    double zstar = 0.0;  // evolutionary lag (mean of the distribution)
    double var = 0.0;
    double skew = 0.0;
    double kurt = 0.0; // excess kurtosis
    double rho = 0.0;  // equilibrium population size, lambda_dim / (beta - mu0)

    ApproxOrder order = ApproxOrder::Simulated;
    bool converged = true;
    bool diverged = false; // mean ran away (tipping regime)
    std::int64_t iterations = 0;
    double residual = 0.0;
    std::int64_t negative_clips = 0; // upwind undershoots clipped to zero
    int expansions = 0;              // domain auto-expansions performed
};

} // namespace mopt
