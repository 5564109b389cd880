#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "mopt/errors.hpp"

namespace mopt::detail {

/// Newton iteration safeguarded by a maintained bracket [lo, hi].
/// f must be continuous with f(lo) and f(hi) of opposite sign; whenever a
/// Newton step leaves the bracket (or the derivative is unusable) the step
/// falls back to bisection. Tolerance is on the argument.
inline double newton_bisect(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double lo, double hi, double x0,
                            double xtol = 1e-13, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw ConvergenceError("newton_bisect: endpoints do not bracket a root");
    double x = x0;
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (fhi > 0)) { hi = x; fhi = fx; } else { lo = x; flo = fx; }
        double d = df(x);
        double step = (d != 0.0 && std::isfinite(d)) ? fx / d : std::numeric_limits<double>::infinity();
        double xn = x - step;
        if (!(xn > lo && xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= xtol * (1.0 + std::abs(xn))) return xn;
        x = xn;
    }
    throw ConvergenceError("newton_bisect: no convergence within max_iter");
}

/// Plain bisection for monotone f with a valid bracket.
inline double bisect(const std::function<double(double)>& f,
                     double lo, double hi, double xtol = 1e-13, int max_iter = 400) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw ConvergenceError("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (fhi > 0)) { hi = mid; fhi = fm; } else { lo = mid; }
        if (hi - lo <= xtol * (1.0 + std::abs(mid))) return 0.5 * (lo + hi);
    }
    return 0.5 * (lo + hi);
}

} // namespace mopt::detail
