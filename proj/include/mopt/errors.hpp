#pragma once

#include <stdexcept>
#include <string>

namespace mopt {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation outside the finite Laplace domain of a kernel.
struct DomainError : Error { using Error::Error; };

/// A root find or iteration failed to reach its tolerance.
struct ConvergenceError : Error { using Error::Error; };

/// The maximizer of a tabulated objective fell on the sample boundary.
struct BracketError : Error { using Error::Error; };

/// m_inverse_pos asked for a value at or above sup m (asexual tipping).
struct BeyondRangeError : Error { using Error::Error; };

/// gradient inverse asked for a slope above max m' (infinitesimal tipping).
struct BeyondGradientError : Error { using Error::Error; };

/// Requested speed is at or beyond the tipping point for this selection.
struct TippingError : Error { using Error::Error; };

/// A correction formula is degenerate at the requested point (c ~ 0, inflection).
struct DegenerateError : Error { using Error::Error; };

/// Profile integration would cross the singular point of the characteristic flow.
struct SingularityError : Error { using Error::Error; };

/// The corrector series is undefined: 1 + G <= 0 somewhere on the grid.
struct DivergenceError : Error { using Error::Error; };

/// Grid too coarse to resolve the reproduction kernel (eps/dz < 4).
struct ResolutionError : Error { using Error::Error; };

/// Explicit time step violates a stability bound.
struct CFLError : Error { using Error::Error; };

/// Time marching hit max_iters with neither convergence nor divergence.
struct NoConvergenceError : Error {
    NoConvergenceError(const std::string& what, double residual_)
        : Error(what), residual(residual_) {}
    double residual;
};

/// Malformed experiment configuration.
struct ConfigError : Error { using Error::Error; };

} // namespace mopt
