#pragma once

#include <limits>
#include <vector>

#include "mopt/errors.hpp"

namespace mopt {

enum class KernelFamily { Diffusion, Uniform, Gaussian, Exponential, Gamma };

/// One of the five mutation-effect models, all normalized to unit variance in
/// adimensional units. Diffusion is an operator (no density); the other four
/// are symmetric probability densities. The Gamma family carries a shape
/// parameter; gamma_shape = 1 coincides with the Exponential family.
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double gamma_shape = 0.5; // Gamma family only, > 0

    static KernelSpec diffusion() { return {KernelFamily::Diffusion}; }
    static KernelSpec uniform() { return {KernelFamily::Uniform}; }
    static KernelSpec gaussian() { return {KernelFamily::Gaussian}; }
    static KernelSpec exponential() { return {KernelFamily::Exponential}; }
    static KernelSpec gamma(double shape) { return {KernelFamily::Gamma, shape}; }

    bool operator==(const KernelSpec&) const = default;
};

const char* to_string(KernelFamily f);

/// Half-width of the open interval on which H is finite.
/// Diffusion/Uniform/Gaussian: +inf; Exponential: sqrt(2); Gamma: sqrt(g(g+1)).
double p_max(const KernelSpec& k);

/// Two-sided Laplace transform of the kernel minus one. Even, convex,
/// H(0) = 0, H''(0) = 1. Throws DomainError for |p| >= p_max.
double hamiltonian(const KernelSpec& k, double p);

struct HamiltonianDerivs {
    double first;  // H'(p), odd, strictly increasing
    double second; // H''(p) > 0
};
HamiltonianDerivs hamiltonian_derivs(const KernelSpec& k, double p);

/// Third derivative of H; used by the profile correctors.
double hamiltonian_d3(const KernelSpec& k, double p);

enum class LagrangianOrder { Value, WithDerivs };

struct Lagrangian {
    double value;     // L(c) = p0*c - H(p0) with H'(p0) = c
    double slope;     // L'(c) = p0
    double curvature; // L''(c) = 1/H''(p0); NaN when order == Value
};

/// Legendre transform of H, via a safeguarded Newton/bisection solve of the
/// strictly monotone H'(p) = c (tolerance 1e-12 on p, bracket grown toward
/// p_max). L(0) = 0, L convex, L(c) <= c^2/2 with equality only for Diffusion.
Lagrangian lagrangian(const KernelSpec& k, double c,
                      LagrangianOrder order = LagrangianOrder::WithDerivs);

/// Speed conjugate to a tilt p0: c = H'(p0). Inverse of L'(c).
double conjugacy_speed(const KernelSpec& k, double p0);

/// Tabulated H samples for the independent Legendre oracle.
struct HTable {
    std::vector<double> p;
    std::vector<double> H;
};

/// Grid maximum of p*c - H(p) over the samples. Test oracle only; does not
/// touch the lagrangian() path. Throws BracketError if the maximizer sits on
/// the sample boundary.
double legendre_numeric_oracle(const HTable& table, double c);

/// Mass of the kernel density on [a, b] (unit-variance y units). Used to
/// discretize the reproduction operator. Throws DomainError for Diffusion.
double kernel_cell_mass(const KernelSpec& k, double a, double b);

} // namespace mopt
