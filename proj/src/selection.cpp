#include "mopt/selection.hpp"

#include <cmath>
#include <limits>

#include "mopt/detail/roots.hpp"

namespace mopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_spec(const SelectionSpec& sel) {
    if (sel.family == SelectionFamily::SuperQuadratic && !(sel.a6 >= 0.0))
        throw DomainError("SuperQuadratic requires a6 >= 0");
    if (sel.family == SelectionFamily::Bounded && !(sel.m_inf > 0.0))
        throw DomainError("Bounded requires m_inf > 0");
}

} // namespace

const char* to_string(SelectionFamily f) {
    switch (f) {
        case SelectionFamily::Quadratic: return "quadratic";
        case SelectionFamily::SuperQuadratic: return "super_quadratic";
        case SelectionFamily::Bounded: return "bounded";
    }
    return "?";
}

const char* to_string(ShapeClass s) {
    switch (s) {
        case ShapeClass::SubQuadratic: return "sub_quadratic";
        case ShapeClass::Quadratic: return "quadratic";
        case ShapeClass::SuperQuadratic: return "super_quadratic";
    }
    return "?";
}

MDerivs m_derivs(const SelectionSpec& sel, double z, int upto) {
    check_spec(sel);
    MDerivs d{0, 0, 0, 0};
    switch (sel.family) {
        case SelectionFamily::Quadratic:
            d.m = 0.5 * z * z;
            if (upto >= 1) d.m1 = z;
            if (upto >= 2) d.m2 = 1.0;
            break;
        case SelectionFamily::SuperQuadratic: {
            const double z2 = z * z, z3 = z2 * z;
            d.m = 0.5 * z2 + sel.a6 * z3 * z3;
            if (upto >= 1) d.m1 = z + 6.0 * sel.a6 * z3 * z2;
            if (upto >= 2) d.m2 = 1.0 + 30.0 * sel.a6 * z2 * z2;
            if (upto >= 3) d.m3 = 120.0 * sel.a6 * z3;
            break;
        }
        case SelectionFamily::Bounded: {
            const double a = 1.0 / sel.m_inf;
            const double e = std::exp(-0.5 * a * z * z);
            d.m = sel.m_inf * (1.0 - e);
            if (upto >= 1) d.m1 = z * e;
            if (upto >= 2) d.m2 = (1.0 - a * z * z) * e;
            if (upto >= 3) d.m3 = -a * z * (3.0 - a * z * z) * e;
            break;
        }
    }
    return d;
}

double sup_m(const SelectionSpec& sel) {
    check_spec(sel);
    return sel.family == SelectionFamily::Bounded ? sel.m_inf : kInf;
}

double max_gradient(const SelectionSpec& sel) {
    check_spec(sel);
    return sel.family == SelectionFamily::Bounded
               ? std::sqrt(sel.m_inf) * std::exp(-0.5)
               : kInf;
}

double m_inverse_pos(const SelectionSpec& sel, double v) {
    check_spec(sel);
    if (!(v >= 0.0)) throw DomainError("m_inverse_pos requires v >= 0");
    if (v == 0.0) return 0.0;
    if (v >= sup_m(sel))
        throw BeyondRangeError("m_inverse_pos: value at or above sup m (lag diverges)");
    switch (sel.family) {
        case SelectionFamily::Quadratic:
            return std::sqrt(2.0 * v);
        case SelectionFamily::Bounded:
            return std::sqrt(-2.0 * sel.m_inf * std::log1p(-v / sel.m_inf));
        case SelectionFamily::SuperQuadratic: {
            double hi = std::sqrt(2.0 * v); // m(z) >= z^2/2, so the root is below
            return detail::newton_bisect(
                [&](double z) { return m_derivs(sel, z, 0).m - v; },
                [&](double z) { return m_derivs(sel, z, 1).m1; },
                0.0, hi * (1.0 + 1e-12), hi, 1e-13);
        }
    }
    return 0.0;
}

double gradient_inverse_convex(const SelectionSpec& sel, double g) {
    check_spec(sel);
    if (!(g >= 0.0)) throw DomainError("gradient_inverse_convex requires g >= 0");
    if (g == 0.0) return 0.0;
    const double gmax = max_gradient(sel);
    if (g > gmax)
        throw BeyondGradientError("gradient inverse: slope above max m' (lag diverges)");
    switch (sel.family) {
        case SelectionFamily::Quadratic:
            return g;
        case SelectionFamily::SuperQuadratic:
            return detail::newton_bisect(
                [&](double z) { return m_derivs(sel, z, 1).m1 - g; },
                [&](double z) { return m_derivs(sel, z, 2).m2; },
                0.0, g * (1.0 + 1e-12), g, 1e-13);
        case SelectionFamily::Bounded: {
            const double zpeak = std::sqrt(sel.m_inf);
            if (g == gmax) return zpeak;
            return detail::newton_bisect(
                [&](double z) { return m_derivs(sel, z, 1).m1 - g; },
                [&](double z) { return m_derivs(sel, z, 2).m2; },
                0.0, zpeak, std::min(g, 0.9 * zpeak), 1e-13);
        }
    }
    return 0.0;
}

std::optional<double> gradient_inverse_concave(const SelectionSpec& sel, double g) {
    check_spec(sel);
    if (!(g >= 0.0)) throw DomainError("gradient_inverse_concave requires g >= 0");
    if (sel.family != SelectionFamily::Bounded) return std::nullopt;
    const double gmax = max_gradient(sel);
    if (g > gmax)
        throw BeyondGradientError("gradient inverse: slope above max m' (lag diverges)");
    if (g == 0.0) return std::nullopt; // m' -> 0 only at infinity
    const double zpeak = std::sqrt(sel.m_inf);
    if (g == gmax) return zpeak;
    double hi = 2.0 * zpeak + 1.0;
    while (m_derivs(sel, hi, 1).m1 > g) hi *= 2.0;
    return detail::newton_bisect(
        [&](double z) { return m_derivs(sel, z, 1).m1 - g; },
        [&](double z) { return m_derivs(sel, z, 2).m2; },
        zpeak, hi, 0.5 * (zpeak + hi), 1e-13);
}

ShapeClassification classify_shape(const SelectionSpec& sel, double z) {
    check_spec(sel);
    if (z == 0.0) throw DomainError("classify_shape requires z != 0");
    const MDerivs d = m_derivs(sel, z, 3);
    ShapeClassification out{};

    const double ratio = d.m2 * d.m / (d.m1 * d.m1) - 0.5;
    out.asexual = std::abs(ratio) <= 1e-9
                      ? ShapeClass::Quadratic
                      : (ratio > 0 ? ShapeClass::SuperQuadratic : ShapeClass::SubQuadratic);

    // Criterion stated at the trailing (negative) lag: m''' > 0 sub-quadratic,
    // m''' < 0 super-quadratic.
    const double m3neg = m_derivs(sel, -std::abs(z), 3).m3;
    out.infinitesimal = std::abs(m3neg) <= 1e-12
                            ? ShapeClass::Quadratic
                            : (m3neg < 0 ? ShapeClass::SuperQuadratic : ShapeClass::SubQuadratic);
    return out;
}

} // namespace mopt
