#pragma once

#include <optional>

#include "mopt/errors.hpp"

namespace mopt {

enum class SelectionFamily { Quadratic, SuperQuadratic, Bounded };

/// Increment-of-mortality function m(z) in adimensional units: m(0) = 0,
/// m'(0) = 0, m''(0) = 1, decreasing on (-inf,0) and increasing on (0,inf).
///   Quadratic:      m(z) = z^2/2
///   SuperQuadratic: m(z) = z^2/2 + a6 z^6
///   Bounded:        m(z) = m_inf (1 - exp(-z^2 / (2 m_inf)))
struct SelectionSpec {
    SelectionFamily family = SelectionFamily::Quadratic;
    double a6 = 1.0 / 64.0; // SuperQuadratic only, >= 0
    double m_inf = 0.5;     // Bounded only, > 0

    static SelectionSpec quadratic() { return {SelectionFamily::Quadratic}; }
    static SelectionSpec super_quadratic(double a6 = 1.0 / 64.0) {
        return {SelectionFamily::SuperQuadratic, a6};
    }
    static SelectionSpec bounded(double m_inf) {
        return {SelectionFamily::Bounded, 0.0, m_inf};
    }

    bool operator==(const SelectionSpec&) const = default;
};

const char* to_string(SelectionFamily f);

struct MDerivs {
    double m, m1, m2, m3;
};

/// Closed-form m and derivatives up to the requested order (0..3); the
/// remaining fields are filled with 0.
MDerivs m_derivs(const SelectionSpec& sel, double z, int upto = 3);

/// sup m over the reals: +inf for the unbounded families, m_inf for Bounded.
double sup_m(const SelectionSpec& sel);

/// max of m' on [0, inf): +inf for unbounded-gradient families;
/// sqrt(m_inf) e^{-1/2} attained at z = sqrt(m_inf) for Bounded.
double max_gradient(const SelectionSpec& sel);

/// Unique z >= 0 with m(z) = v (v >= 0). Throws BeyondRangeError if
/// v >= sup m, which signals the asexual tipping point.
double m_inverse_pos(const SelectionSpec& sel, double v);

/// Smallest z >= 0 with m'(z) = g on the convex branch (g >= 0). Throws
/// BeyondGradientError if g > max m', which signals infinitesimal tipping.
double gradient_inverse_convex(const SelectionSpec& sel, double g);

/// Concave-branch root z > sqrt(m_inf) with m'(z) = g, when the family has an
/// inflection (Bounded) and g > 0; nullopt otherwise.
std::optional<double> gradient_inverse_concave(const SelectionSpec& sel, double g);

enum class ShapeClass { SubQuadratic, Quadratic, SuperQuadratic };

/// Shape classification at z != 0, one verdict per reproduction model:
/// asexual by the sign of m'' m / (m')^2 - 1/2, infinitesimal by the sign of
/// m''' evaluated at the negative-side representative -|z|.
struct ShapeClassification {
    ShapeClass asexual;
    ShapeClass infinitesimal;
};
ShapeClassification classify_shape(const SelectionSpec& sel, double z);

const char* to_string(ShapeClass s);

} // namespace mopt
