#pragma once

#include <optional>
#include <vector>

#include "mopt/kernels.hpp"
#include "mopt/report.hpp"
#include "mopt/scaling.hpp"
#include "mopt/selection.hpp"

namespace mopt {

/// Small-variance closed forms for one parameter point. All quantities in
/// scaled units. The combined values are
///   lambda = lambda0 + eps^gamma * lambda1
///   z*     = zstar0  + eps^gamma * zstar1
///   Var    = var_leading + var_correction
/// with the order-tag telling which terms are populated.
struct AsymptoticPrediction {
    double lambda0 = 1.0;
    double lambda1 = 0.0;
    double zstar0 = 0.0;
    double zstar1 = 0.0;
    double var_leading = 0.0;
    double var_correction = 0.0;
    double eps = 0.0;
    int gamma = 1;
    ApproxOrder order = ApproxOrder::Leading;

    double eps_gamma() const;
    double lambda() const;
    double zstar() const;
    double var() const;
    EquilibriumReport to_report() const;
};

/// Leading order, asexual: lambda0 = 1 - L(c); m(z0*) = L(c) with z0* <= 0;
/// Var = -eps c / m'(z0*) (= eps at c = 0). Throws TippingError when
/// L(c) >= sup m.
AsymptoticPrediction asexual_leading(const KernelSpec& k, const SelectionSpec& sel,
                                     double eps, double c);

/// First correction, asexual: lambda1 = -(1/2) (1/L''(c))^(1/2);
/// z1* = 1/(2 m'(z0*)) (1/L'')^(1/2) + 1/(2c); Var from the local-shape
/// expansion of U0 + eps U1 at the corrected lag. Requires c >= 1e-6
/// (DegenerateError below; use the c = 0 forms via predict()).
AsymptoticPrediction asexual_correction(const KernelSpec& k, const SelectionSpec& sel,
                                        double eps, double c);

/// Leading order, infinitesimal: m'(z0*) = -c on the convex branch;
/// lambda0 = 1 - m(z0*); Var = eps^2. Throws TippingError when c > max m'.
AsymptoticPrediction infinitesimal_leading(const SelectionSpec& sel, double eps, double c);

/// Second order, infinitesimal:
///   z*  = z0* - eps^2 (m'''/(2 m'') + 2c)
///   lambda = lambda0 - eps^2 (2c^2 + c m'''/(2 m'') + m''/2)
///   Var = eps^2 / (1 + 2 eps^2 m'')    (derivatives at z0*)
/// DegenerateError when m''(z0*) = 0 (inflection: at tipping).
AsymptoticPrediction infinitesimal_correction(const SelectionSpec& sel, double eps, double c);

/// Convenience dispatcher; handles the documented c -> 0 seam of the asexual
/// correction (below c = 1e-6 the c = 0 closed forms lambda1 = -1/2,
/// z1* = 0 are used).
AsymptoticPrediction predict(ReproductionMode mode, const KernelSpec& k,
                             const SelectionSpec& sel, double eps, double c,
                             ApproxOrder order);

/// Log-density profiles on a trait grid. U0 is the limit shape, U1 the first
/// corrector, pinned by U1(z0*) = 0. For the asexual mode u0_prime carries
/// dU0/dz on the grid.
struct Profile {
    std::vector<double> grid;
    std::vector<double> U0;
    std::vector<double> U1;
    std::vector<double> u0_prime;
    ReproductionMode mode = ReproductionMode::Asexual;
    double lambda1 = 0.0; // corrector eigenvalue used in the U1 transport
};

/// Integrate dU0'/dz = m'(z) / (H'(U0') - c) outward from the singular point
/// z = 0 with U0'(0) = L'(c), U0(0) = 0. The grid must be increasing and
/// bracket 0. Throws SingularityError if the denominator changes sign away
/// from the lag and TippingError for bounded selection beyond c_tip; verifies
/// the algebraic residual m(z) = H(U0') - c U0' + L(c) to 1e-6 on the grid.
Profile asexual_U0(const KernelSpec& k, const SelectionSpec& sel, double c,
                   std::vector<double> grid);

/// Fill profile.U1 by integrating the corrector along the characteristics
/// dz/ds = H'(U0'(z)) - c launched on both sides of the equilibrium point,
/// using U1(z(s)) - U1(z(0)) = lambda1 s + (1/2) log |D(z(s))/D(z(0))| with
/// D = H'(U0') - c. Requires c > 0 and a filled U0.
void asexual_U1(const KernelSpec& k, const SelectionSpec& sel, double c, Profile& profile);

/// Infinitesimal profile: U0 = (z - z0*)^2 / 2 exactly and
/// U1(z0* + h) = p* h + sum 2^n log(1 + G(z0* + 2^-n h)),
/// p* = m'''(z0*)/(2 m''(z0*)) + 2c, G = m - m(z0*) - m'(z0*)(z - z0*).
/// Series truncated at relative 1e-12, capped at 60 terms. DivergenceError
/// if 1 + G <= 0 anywhere on the grid.
Profile infinitesimal_U1(const SelectionSpec& sel, double c, std::vector<double> grid);

/// Critical speeds in dimensional units. c_star is the extinction speed
/// (lambda = 0); c_tip the tipping speed, +inf for unbounded selection.
/// Leading order uses c* = sigma beta L^-1((beta-mu0)/beta) (asexual) and
/// c* = sigma^2 m'(m^-1(beta-mu0)) (infinitesimal, capped by c_tip when
/// beta-mu0 is beyond sup m); FirstCorrection solves lambda(c) = 0 with the
/// eps-order standing load included.
struct CriticalSpeeds {
    double c_star = 0.0;
    double c_tip = 0.0;
};
CriticalSpeeds critical_speeds(ReproductionMode mode, const KernelSpec& k,
                               const SelectionSpec& sel, const ModelParams& params,
                               ApproxOrder order = ApproxOrder::FirstCorrection);

enum class VarianceTrend { Increasing, Flat, Decreasing };

/// Sign of d/dc [ c / m'(|z0*(c)|) ] for the asexual model by centered finite
/// difference (step 1e-4 c), cross-checked against the convexity of
/// c -> m^-1(L(c)). Throws TippingError when the stencil reaches past c_tip.
VarianceTrend variance_trend(const KernelSpec& k, const SelectionSpec& sel, double c);

const char* to_string(VarianceTrend t);

} // namespace mopt
