#include "mopt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mopt/detail/roots.hpp"

namespace mopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt2 = std::sqrt(2.0);

void check_gamma_shape(const KernelSpec& k) {
    if (k.family == KernelFamily::Gamma && !(k.gamma_shape > 0.0))
        throw DomainError("Gamma kernel requires shape > 0");
}

void check_domain(const KernelSpec& k, double p) {
    if (!(std::abs(p) < p_max(k)))
        throw DomainError("|p| >= p_max: Laplace transform diverges");
}

// sinh(x)/x and derivatives. S(x) = sum_k x^(2k)/(2k+1)!; the closed forms
// cancel catastrophically near 0, so small |x| uses the series directly.
// deriv_order d sums c_k * (2k)(2k-1)...(2k-d+1) * x^(2k-d).
double S_series(double x, int d) {
    double sum = 0.0;
    double ck = 1.0; // 1/(2k+1)! at k=0
    for (int k = 0; k <= 10; ++k) {
        if (k > 0) ck /= (2.0 * k) * (2.0 * k + 1.0);
        const int e = 2 * k - d;
        if (e < 0) continue;
        double fall = 1.0;
        for (int j = 0; j < d; ++j) fall *= (2.0 * k - j);
        if (fall == 0.0) continue;
        sum += ck * fall * std::pow(x, e);
    }
    return sum;
}
double S0(double x) {
    return std::abs(x) < 0.5 ? S_series(x, 0) : std::sinh(x) / x;
}
double S1(double x) {
    return std::abs(x) < 0.5 ? S_series(x, 1)
                             : (x * std::cosh(x) - std::sinh(x)) / (x * x);
}
double S2(double x) {
    return std::abs(x) < 0.5
               ? S_series(x, 2)
               : ((x * x + 2.0) * std::sinh(x) - 2.0 * x * std::cosh(x)) / (x * x * x);
}
double S3(double x) {
    return std::abs(x) < 0.5
               ? S_series(x, 3)
               : ((x * x * x + 6.0 * x) * std::cosh(x) - (3.0 * x * x + 6.0) * std::sinh(x)) /
                     (x * x * x * x);
}

// 24-point Gauss-Legendre on [-1, 1] (12 symmetric node pairs).
constexpr int kGL = 12;
constexpr double kGLx[kGL] = {
    0.0640568928626056260850430826247, 0.1911188674736163091586398207570,
    0.3150426796961633743867932913198, 0.4337935076260451384870842319133,
    0.5454214713888395356583756172183, 0.6480936519369755692524957869107,
    0.7401241915785543642438281030999, 0.8200019859739029219539498726697,
    0.8864155270044010342131543419821, 0.9382745520027327585236490017087,
    0.9747285559713094981983919930081, 0.9951872199970213601799974097007};
constexpr double kGLw[kGL] = {
    0.1279381953467521569740561652246, 0.1258374563468282961213753825111,
    0.1216704729278033912044631534762, 0.1155056680537256013533444839067,
    0.1074442701159656347825773424466, 0.0976186521041138882698806644642,
    0.0861901615319532759171852029837, 0.0733464814110803057340336152531,
    0.0592985849154367807463677585001, 0.0442774388174198061686027482113,
    0.0285313886289336631813078159518, 0.0123412297999871995468056670700};

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a), sum = 0.0;
    for (int i = 0; i < kGL; ++i)
        sum += kGLw[i] * (f(c + h * kGLx[i]) + f(c - h * kGLx[i]));
    return sum * h;
}

// One-sided Gamma mass: integral over [a, b] (0 <= a <= b) of
// C y^(g-1) exp(-y/theta), C = (1/theta)^g / (2 Gamma(g)).
// For g < 1 the substitution t = y^g removes the endpoint singularity.
double gamma_mass_positive(double g, double theta, double a, double b) {
    const double rate = 1.0 / theta;
    const double C = std::pow(rate, g) / (2.0 * std::tgamma(g));
    if (b <= a) return 0.0;
    if (g >= 1.0) {
        return C * gauss_legendre([&](double y) {
            return std::pow(y, g - 1.0) * std::exp(-rate * y);
        }, a, b);
    }
    const double ta = std::pow(a, g), tb = std::pow(b, g);
    return (C / g) * gauss_legendre([&](double t) {
        return std::exp(-rate * std::pow(t, 1.0 / g));
    }, ta, tb);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

} // namespace

const char* to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::Diffusion: return "diffusion";
        case KernelFamily::Uniform: return "uniform";
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::Gamma: return "gamma";
    }
    return "?";
}

double p_max(const KernelSpec& k) {
    check_gamma_shape(k);
    switch (k.family) {
        case KernelFamily::Diffusion:
        case KernelFamily::Uniform:
        case KernelFamily::Gaussian: return kInf;
        case KernelFamily::Exponential: return kSqrt2;
        case KernelFamily::Gamma: return std::sqrt(k.gamma_shape * (k.gamma_shape + 1.0));
    }
    return kInf;
}

double hamiltonian(const KernelSpec& k, double p) {
    check_domain(k, p);
    switch (k.family) {
        case KernelFamily::Diffusion: return 0.5 * p * p;
        case KernelFamily::Uniform: return S0(kSqrt3 * p) - 1.0;
        case KernelFamily::Gaussian: return std::expm1(0.5 * p * p);
        case KernelFamily::Exponential: return 1.0 / (1.0 - 0.5 * p * p) - 1.0;
        case KernelFamily::Gamma: {
            const double g = k.gamma_shape;
            const double th = 1.0 / p_max(k);
            return 0.5 * (std::pow(1.0 - th * p, -g) + std::pow(1.0 + th * p, -g)) - 1.0;
        }
    }
    return 0.0;
}

HamiltonianDerivs hamiltonian_derivs(const KernelSpec& k, double p) {
    check_domain(k, p);
    switch (k.family) {
        case KernelFamily::Diffusion: return {p, 1.0};
        case KernelFamily::Uniform: {
            const double x = kSqrt3 * p;
            return {kSqrt3 * S1(x), 3.0 * S2(x)};
        }
        case KernelFamily::Gaussian: {
            const double e = std::exp(0.5 * p * p);
            return {p * e, (1.0 + p * p) * e};
        }
        case KernelFamily::Exponential: {
            const double q = 1.0 - 0.5 * p * p;
            return {p / (q * q), (1.0 + 1.5 * p * p) / (q * q * q)};
        }
        case KernelFamily::Gamma: {
            const double g = k.gamma_shape;
            const double th = 1.0 / p_max(k);
            const double um = 1.0 - th * p, up = 1.0 + th * p;
            const double d1 = 0.5 * g * th * (std::pow(um, -g - 1.0) - std::pow(up, -g - 1.0));
            const double d2 = 0.5 * g * (g + 1.0) * th * th *
                              (std::pow(um, -g - 2.0) + std::pow(up, -g - 2.0));
            return {d1, d2};
        }
    }
    return {0.0, 1.0};
}

double hamiltonian_d3(const KernelSpec& k, double p) {
    check_domain(k, p);
    switch (k.family) {
        case KernelFamily::Diffusion: return 0.0;
        case KernelFamily::Uniform: return 3.0 * kSqrt3 * S3(kSqrt3 * p);
        case KernelFamily::Gaussian: return p * (3.0 + p * p) * std::exp(0.5 * p * p);
        case KernelFamily::Exponential: {
            const double q = 1.0 - 0.5 * p * p;
            return 3.0 * p * (2.0 + p * p) / (q * q * q * q);
        }
        case KernelFamily::Gamma: {
            const double g = k.gamma_shape;
            const double th = 1.0 / p_max(k);
            const double um = 1.0 - th * p, up = 1.0 + th * p;
            return 0.5 * g * (g + 1.0) * (g + 2.0) * th * th * th *
                   (std::pow(um, -g - 3.0) - std::pow(up, -g - 3.0));
        }
    }
    return 0.0;
}

Lagrangian lagrangian(const KernelSpec& k, double c, LagrangianOrder order) {
    check_gamma_shape(k);
    if (c == 0.0) return {0.0, 0.0, 1.0};
    const double sign = c > 0 ? 1.0 : -1.0;
    const double cc = std::abs(c);
    const double pm = p_max(k);

    // Grow the bracket [0, hi] toward p_max until H'(hi) >= c.
    double hi = std::isfinite(pm) ? 0.5 * pm : 1.0;
    int grow = 0;
    while (hamiltonian_derivs(k, hi).first < cc) {
        hi = std::isfinite(pm) ? 0.5 * (hi + pm) : 2.0 * hi;
        if (++grow > 200)
            throw ConvergenceError("lagrangian: bracket for H'(p)=c did not close");
    }
    const double p0 = detail::newton_bisect(
        [&](double p) { return hamiltonian_derivs(k, p).first - cc; },
        [&](double p) { return hamiltonian_derivs(k, p).second; },
        0.0, hi, std::min(cc, 0.9 * hi), 1e-12);

    Lagrangian out;
    out.value = p0 * cc - hamiltonian(k, p0);
    out.slope = sign * p0;
    out.curvature = (order == LagrangianOrder::WithDerivs)
                        ? 1.0 / hamiltonian_derivs(k, p0).second
                        : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double conjugacy_speed(const KernelSpec& k, double p0) {
    return hamiltonian_derivs(k, p0).first;
}

double legendre_numeric_oracle(const HTable& table, double c) {
    if (table.p.size() != table.H.size() || table.p.size() < 3)
        throw BracketError("legendre oracle: need at least 3 samples");
    std::size_t best = 0;
    double vbest = -kInf;
    for (std::size_t i = 0; i < table.p.size(); ++i) {
        const double v = table.p[i] * c - table.H[i];
        if (v > vbest) { vbest = v; best = i; }
    }
    if (best == 0 || best + 1 == table.p.size())
        throw BracketError("legendre oracle: maximizer on sample boundary");
    return vbest;
}

double kernel_cell_mass(const KernelSpec& k, double a, double b) {
    check_gamma_shape(k);
    if (b < a) std::swap(a, b);
    switch (k.family) {
        case KernelFamily::Diffusion:
            throw DomainError("diffusion approximation has no density");
        case KernelFamily::Uniform: {
            const double lo = std::max(a, -kSqrt3), hi = std::min(b, kSqrt3);
            return hi > lo ? (hi - lo) / (2.0 * kSqrt3) : 0.0;
        }
        case KernelFamily::Gaussian:
            return std_normal_cdf(b) - std_normal_cdf(a);
        case KernelFamily::Exponential: {
            auto cdf = [](double y) {
                return y < 0 ? 0.5 * std::exp(kSqrt2 * y) : 1.0 - 0.5 * std::exp(-kSqrt2 * y);
            };
            return cdf(b) - cdf(a);
        }
        case KernelFamily::Gamma: {
            const double g = k.gamma_shape;
            const double th = 1.0 / p_max(k);
            double mass = 0.0;
            if (b > 0.0) mass += gamma_mass_positive(g, th, std::max(a, 0.0), b);
            if (a < 0.0) mass += gamma_mass_positive(g, th, std::max(-b, 0.0), -a);
            return mass;
        }
    }
    return 0.0;
}

} // namespace mopt
