#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mopt/kernels.hpp"
#include "mopt/report.hpp"
#include "mopt/scaling.hpp"
#include "mopt/selection.hpp"

namespace mopt {

/// Uniform trait grid in scaled units with the moving optimum z = 0 on a node.
struct Grid {
    double z_min = -1.0;
    double z_max = 1.0;
    int n = 201;

    double dz() const { return (z_max - z_min) / (n - 1); }
    double node(int i) const { return z_min + i * dz(); }
    std::vector<double> nodes() const;

    /// Snap requested bounds outward onto multiples of dz so that z = 0 is a
    /// grid node.
    static Grid make(double z_lo, double z_hi, double dz);

    /// Bulk-local window on the same dz lattice, without requiring z = 0
    /// inside. Needed for deep-lag regimes (|z*| >> sd): with the optimum in
    /// the domain, roundoff noise deposited near z = 0 outgrows the bulk by
    /// ~exp(2|m'| |z*|) before reproduction reabsorbs it and the march enters
    /// a spurious cycle.
    static Grid window(double z_lo, double z_hi, double dz);
};

struct Moments {
    double mass = 0.0;
    double mean = 0.0;
    double var = 0.0;
    double skew = 0.0;
    double excess_kurt = 0.0;
};

/// Nonnegative density samples on a grid; frequency formulation keeps the
/// trapezoid mass at 1 after every step.
struct Distribution {
    Grid grid;
    std::vector<double> values;

    double mass() const;
    void normalize();
    static Distribution gaussian(const Grid& g, double mean, double variance);
    static Distribution delta(const Grid& g, int node);
};

/// Trapezoid-rule central moments; skew = mu3/mu2^(3/2), excess kurtosis
/// = mu4/mu2^2 - 3 (both 0 for a point mass).
Moments moments(const Distribution& f);

/// Scaled asexual reproduction: convolution with the kernel sampled per cell
/// (taps renormalized to unit mass), zero padding outside the domain. The
/// Diffusion family applies I + (eps^2/2) * discrete Laplacian instead.
/// Throws ResolutionError if eps/dz < 4 for the density families.
Distribution reproduce_asexual(const Distribution& f, const KernelSpec& k, double eps);

/// Scaled infinitesimal reproduction: mid-parent density by self-convolution
/// resampled at 2u, then convolution with the segregation Gaussian of
/// variance eps^2/2, rescaled to the parental mass.
Distribution reproduce_infinitesimal(const Distribution& f, double eps);

/// Everything a time step needs; kernel is ignored in infinitesimal mode.
struct SolverSetup {
    ReproductionMode mode = ReproductionMode::Asexual;
    KernelSpec kernel = KernelSpec::gaussian();
    SelectionSpec sel = SelectionSpec::quadratic();
    double eps = 0.1;
    double c = 0.0; // scaled speed, >= 0
};

/// One explicit Euler step of the frequency equation
///   dt p = eps^gamma c dz p - (m - mbar) p + B(p) - p
/// with upwind transport and exact mass renormalization. Negative undershoots
/// are clipped to zero and counted. Throws CFLError when dt violates
/// dt*eps^gamma*c/dz <= 0.9, dt*max m <= 0.5, or the diffusion-variant bound
/// dt*eps^2/dz^2 <= 0.9.
struct StepResult {
    Distribution p;
    std::int64_t clipped = 0;
};
StepResult step(const Distribution& p, const SolverSetup& s, double dt);

struct SolveOptions {
    double stop_tol = 1e-9;       // on ||p_{k+1} - p_k||_inf / dt
    std::int64_t max_iters = 2000000;
    double dt = 0.0;              // 0: choose automatically
    bool allow_expand = true;     // widen the domain when tails hit the edge
    double expand_trigger = 1e-10; // boundary density relative to the max
    int max_expansions = 40;
    // divergence: mean within (1 - edge_fraction) * width of a domain edge
    double edge_fraction = 0.9;
    std::int64_t drift_window = 10000; // divergence: monotone |mean| growth window
};

/// March to the travelling equilibrium. Returns a report (lambda = 1 - mbar,
/// moments of the final frequency) plus the distribution. Divergence of the
/// mean (tipping regime) is reported, not thrown; NoConvergenceError only
/// when max_iters elapses with neither verdict.
std::pair<EquilibriumReport, Distribution> solve_equilibrium(Distribution init,
                                                             const SolverSetup& s,
                                                             const SolveOptions& opts = {});

/// Fig-5-style basin exploration: for each (c, z_init) start from
/// Gaussian(z_init, eps^gamma) on a fixed wide domain and classify.
struct TippingCell {
    double c = 0.0;      // scaled speed
    double z_init = 0.0; // scaled initial lag
    bool converged = false;
    double final_lag = 0.0;
};
struct TippingMap {
    std::vector<TippingCell> cells;
    /// Per speed: midpoint between the innermost diverging and outermost
    /// converging initial lag; +inf when nothing diverged, -inf when nothing
    /// converged. Ordered like c_list.
    std::vector<double> basin_boundary;
};
TippingMap tipping_sweep(const SolverSetup& base, const std::vector<double>& c_list,
                         const std::vector<double>& zinit_list, const Grid& grid,
                         SolveOptions opts = {});

/// Full linear convolution, direct O(N^2); the oracle path.
std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b);

/// Full linear convolution via radix-2 FFT; must agree with the direct path
/// to 1e-10.
std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b);

/// Default grid wide enough for an equilibrium predicted at (zstar, var).
Grid suggest_grid(double zstar, double var, double dz, double margin_sd = 8.0);

} // namespace mopt
