#pragma once

#include "mopt/errors.hpp"
#include "mopt/report.hpp"
#include "mopt/selection.hpp"

namespace mopt {

enum class ReproductionMode { Asexual, Infinitesimal };

const char* to_string(ReproductionMode m);

/// Dimensional model parameters. beta > mu0 >= 0 keeps the population at the
/// optimum viable; alpha is the selection curvature at the optimum; sigma the
/// reproduction variance scale; c the speed of the moving optimum.
struct ModelParams {
    double beta = 1.0;
    double mu0 = 0.0;
    double alpha = 1.0;
    double sigma = 0.1;
    double c = 0.0;

    void validate() const;
    bool operator==(const ModelParams&) const = default;
};

/// Adimensional bundle. eps^2 = sigma^2 alpha / beta; the scaled speed divides
/// c by sigma*beta (asexual) or sigma^2 sqrt(alpha*beta) (infinitesimal);
/// gamma is the expansion exponent (1 asexual, 2 infinitesimal).
struct ScaledParams {
    double eps = 0.1;
    double c = 0.0;
    int gamma = 1;
    ReproductionMode mode = ReproductionMode::Asexual;

    double eps_gamma() const; // eps^gamma
};

ScaledParams to_scaled(const ModelParams& p, ReproductionMode mode);

/// Map a scaled report back to dimensional units:
/// z_dim = z sqrt(beta/alpha), lambda_dim = beta*lambda - mu0,
/// Var_dim = Var * beta/alpha; skew and kurtosis are scale-free.
EquilibriumReport from_scaled(const EquilibriumReport& scaled, const ModelParams& p,
                              ReproductionMode mode);

/// Scaled selection spec from a dimensional family constant. The quadratic
/// part is normalized away (m''(0) = 1); the remaining constants transform as
/// m_inf -> m_inf/beta and a6 -> a6 * beta^2 / alpha^3.
SelectionSpec scaled_selection(SelectionFamily family, double dim_constant,
                               const ModelParams& p);

/// Trait scale sqrt(beta/alpha): dimensional trait per scaled unit.
double trait_scale(const ModelParams& p);

} // namespace mopt
