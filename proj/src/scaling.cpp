#include "mopt/scaling.hpp"

#include <cmath>

namespace mopt {

const char* to_string(ReproductionMode m) {
    return m == ReproductionMode::Asexual ? "asexual" : "infinitesimal";
}

void ModelParams::validate() const {
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (!(mu0 >= 0.0)) throw ConfigError("mu0 must be nonnegative");
    if (!(beta > mu0)) throw ConfigError("beta > mu0 required for viability at the optimum");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(c >= 0.0)) throw ConfigError("c must be nonnegative");
}

double ScaledParams::eps_gamma() const { return gamma == 1 ? eps : eps * eps; }

double trait_scale(const ModelParams& p) { return std::sqrt(p.beta / p.alpha); }

ScaledParams to_scaled(const ModelParams& p, ReproductionMode mode) {
    p.validate();
    ScaledParams s;
    s.mode = mode;
    s.eps = p.sigma * std::sqrt(p.alpha / p.beta);
    s.gamma = mode == ReproductionMode::Asexual ? 1 : 2;
    s.c = mode == ReproductionMode::Asexual
              ? p.c / (p.sigma * p.beta)
              : p.c / (p.sigma * p.sigma * std::sqrt(p.alpha * p.beta));
    return s;
}

EquilibriumReport from_scaled(const EquilibriumReport& scaled, const ModelParams& p,
                              ReproductionMode mode) {
    p.validate();
    (void)mode; // the trait/fitness scales are mode-independent
    const double zs = trait_scale(p);
    EquilibriumReport out = scaled;
    out.lambda = p.beta * scaled.lambda - p.mu0;
    out.zstar = scaled.zstar * zs;
    out.var = scaled.var * zs * zs;
    out.rho = out.lambda / (p.beta - p.mu0);
    return out;
}

SelectionSpec scaled_selection(SelectionFamily family, double dim_constant,
                               const ModelParams& p) {
    p.validate();
    switch (family) {
        case SelectionFamily::Quadratic:
            return SelectionSpec::quadratic();
        case SelectionFamily::SuperQuadratic:
            return SelectionSpec::super_quadratic(dim_constant * p.beta * p.beta /
                                                  (p.alpha * p.alpha * p.alpha));
        case SelectionFamily::Bounded:
            return SelectionSpec::bounded(dim_constant / p.beta);
    }
    return SelectionSpec::quadratic();
}

} // namespace mopt
