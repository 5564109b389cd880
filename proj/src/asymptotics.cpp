#include "mopt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mopt/detail/roots.hpp"

namespace mopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSmallSpeed = 1e-6; // seam to the c = 0 closed forms

struct U0Launch {
    double p0;     // U0'(0) = L'(c)
    double d2U0;   // U0''(0) = (1/H''(p0))^(1/2), scaled m''(0) = 1
    double d3U0;   // U0'''(0)
    double Lvalue; // L(c)
};

U0Launch u0_launch(const KernelSpec& k, const SelectionSpec& sel, double c) {
    const Lagrangian L = lagrangian(k, c);
    const double p0 = L.slope;
    const double h2 = hamiltonian_derivs(k, p0).second;
    const double h3 = hamiltonian_d3(k, p0);
    const double m2 = m_derivs(sel, 0.0, 2).m2; // = 1 in scaled units
    const double m3 = m_derivs(sel, 0.0, 3).m3; // = 0 for the symmetric families
    U0Launch out;
    out.p0 = p0;
    out.d2U0 = std::sqrt(m2 / h2);
    out.d3U0 = (m3 - h3 * out.d2U0 * out.d2U0 * out.d2U0) / (3.0 * h2 * out.d2U0);
    out.Lvalue = L.value;
    return out;
}

// Solve H(p) - c p + L(c) = m on the branch sign(z), seeded by the local
// quadratic expansion around p0 and polished by Newton.
double branch_tilt(const KernelSpec& k, double c, double Lval, double p0, double m,
                   int branch_sign) {
    if (m <= 0.0) return p0;
    const double h2 = hamiltonian_derivs(k, p0).second;
    double p = p0 + branch_sign * std::sqrt(2.0 * m / h2);
    const double pm = p_max(k);
    if (std::abs(p) >= pm) p = branch_sign * 0.5 * (std::abs(p0) + pm);
    for (int it = 0; it < 100; ++it) {
        const double f = hamiltonian(k, p) - c * p + Lval - m;
        const double d = hamiltonian_derivs(k, p).first - c;
        if (d == 0.0) break;
        double pn = p - f / d;
        // keep the iterate on its branch and inside the domain
        if (branch_sign > 0) pn = std::min(std::max(pn, p0), 0.5 * (p + pm));
        else pn = std::max(std::min(pn, p0), 0.5 * (p - pm));
        if (!std::isfinite(pn)) break;
        if (std::abs(pn - p) <= 1e-14 * (1.0 + std::abs(pn))) return pn;
        p = pn;
    }
    return p;
}

} // namespace

double AsymptoticPrediction::eps_gamma() const { return gamma == 1 ? eps : eps * eps; }

double AsymptoticPrediction::lambda() const {
    return order == ApproxOrder::Leading ? lambda0 : lambda0 + eps_gamma() * lambda1;
}

double AsymptoticPrediction::zstar() const {
    return order == ApproxOrder::Leading ? zstar0 : zstar0 + eps_gamma() * zstar1;
}

double AsymptoticPrediction::var() const { return var_leading + var_correction; }

EquilibriumReport AsymptoticPrediction::to_report() const {
    EquilibriumReport r;
    r.lambda = lambda();
    r.zstar = zstar();
    r.var = var();
    r.rho = r.lambda; // scaled convention (beta = 1, mu0 = 0)
    r.order = order;
    return r;
}

AsymptoticPrediction asexual_leading(const KernelSpec& k, const SelectionSpec& sel,
                                     double eps, double c) {
    if (!(c >= 0.0)) throw DomainError("asexual_leading requires c >= 0");
    const Lagrangian L = lagrangian(k, c, LagrangianOrder::Value);
    AsymptoticPrediction out;
    out.eps = eps;
    out.gamma = 1;
    out.order = ApproxOrder::Leading;
    if (L.value >= sup_m(sel))
        throw TippingError("lag load exceeds sup m: beyond the tipping speed");
    out.lambda0 = 1.0 - L.value;
    if (c == 0.0) {
        out.zstar0 = 0.0;
        out.var_leading = eps; // eps / d2U0(0) with d2U0(0) = 1
        return out;
    }
    out.zstar0 = -m_inverse_pos(sel, L.value);
    const double m1 = m_derivs(sel, out.zstar0, 1).m1;
    out.var_leading = -eps * c / m1;
    return out;
}

AsymptoticPrediction asexual_correction(const KernelSpec& k, const SelectionSpec& sel,
                                        double eps, double c) {
    if (c < kSmallSpeed)
        throw DegenerateError("asexual correction degenerates as c -> 0; use the c = 0 forms");
    AsymptoticPrediction out = asexual_leading(k, sel, eps, c);
    out.order = ApproxOrder::FirstCorrection;
    const Lagrangian L = lagrangian(k, c);
    const double sqrt_invLpp = std::sqrt(1.0 / L.curvature);
    const MDerivs md = m_derivs(sel, out.zstar0, 2);
    out.lambda1 = -0.5 * sqrt_invLpp;
    out.zstar1 = 0.5 / md.m1 * sqrt_invLpp + 0.5 / c;

    // Local shape of U0 + eps U1 at the corrected lag gives the refined variance.
    const double d2U = -md.m1 / c -
                       0.5 * eps * ((md.m2 / (c * md.m1)) * sqrt_invLpp +
                                    (md.m1 / (c * c)) * (md.m1 / (c * c)));
    if (!(d2U > 0.0))
        throw DegenerateError("corrected local shape is not convex at this point");
    out.var_correction = eps / d2U - out.var_leading;
    return out;
}

AsymptoticPrediction infinitesimal_leading(const SelectionSpec& sel, double eps, double c) {
    if (!(c >= 0.0)) throw DomainError("infinitesimal_leading requires c >= 0");
    AsymptoticPrediction out;
    out.eps = eps;
    out.gamma = 2;
    out.order = ApproxOrder::Leading;
    if (c > max_gradient(sel))
        throw TippingError("speed above the maximal selection gradient: beyond tipping");
    out.zstar0 = c == 0.0 ? 0.0 : -gradient_inverse_convex(sel, c);
    out.lambda0 = 1.0 - m_derivs(sel, out.zstar0, 0).m;
    out.var_leading = eps * eps;
    return out;
}

AsymptoticPrediction infinitesimal_correction(const SelectionSpec& sel, double eps, double c) {
    AsymptoticPrediction out = infinitesimal_leading(sel, eps, c);
    out.order = ApproxOrder::FirstCorrection;
    const MDerivs md = m_derivs(sel, out.zstar0, 3);
    if (std::abs(md.m2) < 1e-12)
        throw DegenerateError("m''(z0*) = 0: inflection point (at tipping)");
    const double ratio = md.m3 / (2.0 * md.m2);
    out.zstar1 = -(ratio + 2.0 * c);
    out.lambda1 = -(2.0 * c * c + c * ratio + 0.5 * md.m2);
    const double eps2 = eps * eps;
    out.var_correction = eps2 / (1.0 + 2.0 * eps2 * md.m2) - eps2;
    return out;
}

AsymptoticPrediction predict(ReproductionMode mode, const KernelSpec& k,
                             const SelectionSpec& sel, double eps, double c,
                             ApproxOrder order) {
    if (mode == ReproductionMode::Infinitesimal) {
        return order == ApproxOrder::Leading ? infinitesimal_leading(sel, eps, c)
                                             : infinitesimal_correction(sel, eps, c);
    }
    if (order == ApproxOrder::Leading) return asexual_leading(k, sel, eps, c);
    if (c >= kSmallSpeed) return asexual_correction(k, sel, eps, c);
    // c = 0 closed forms: L''(0) = 1 for every family, z1* = 0 by symmetry.
    AsymptoticPrediction out = asexual_leading(k, sel, eps, c);
    out.order = ApproxOrder::FirstCorrection;
    out.lambda1 = -0.5;
    out.zstar1 = 0.0;
    return out;
}

Profile asexual_U0(const KernelSpec& k, const SelectionSpec& sel, double c,
                   std::vector<double> grid) {
    if (grid.size() < 5 || !std::is_sorted(grid.begin(), grid.end()))
        throw DomainError("asexual_U0 needs an increasing grid with >= 5 nodes");
    if (grid.front() > 0.0 || grid.back() < 0.0)
        throw DomainError("asexual_U0 grid must bracket z = 0");
    const Lagrangian L = lagrangian(k, c);
    if (L.value >= sup_m(sel))
        throw TippingError("asexual_U0: beyond the tipping speed for this selection");

    const U0Launch launch = u0_launch(k, sel, c);
    Profile prof;
    prof.mode = ReproductionMode::Asexual;
    prof.grid = std::move(grid);
    const std::size_t n = prof.grid.size();
    prof.U0.assign(n, 0.0);
    prof.u0_prime.assign(n, 0.0);

    const double span = std::max(std::abs(prof.grid.front()), std::abs(prof.grid.back()));
    const double hmicro = std::min(2.5e-4, span / 4096.0);
    const double delta = 4.0 * hmicro; // launch offset off the singular point

    auto rhs = [&](double z, double u) {
        const double denom = hamiltonian_derivs(k, u).first - c;
        return m_derivs(sel, z, 1).m1 / denom;
    };

    // March one side (dir = +1 or -1) from the series launch at z = dir*delta,
    // filling every grid node on that side by RK4 with aligned sub-steps.
    auto march = [&](int dir) {
        double z = dir * delta;
        double u = branch_tilt(k, c, launch.Lvalue, launch.p0,
                               m_derivs(sel, z, 0).m, dir);
        double U = launch.p0 * z + 0.5 * launch.d2U0 * z * z +
                   launch.d3U0 * z * z * z / 6.0;
        // nodes on this side, ordered by increasing |z|
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if ((dir > 0 && prof.grid[i] > 0) || (dir < 0 && prof.grid[i] < 0)) idx.push_back(i);
        if (dir < 0) std::reverse(idx.begin(), idx.end());
        for (std::size_t i : idx) {
            const double target = prof.grid[i];
            if (std::abs(target) <= delta) {
                // inside the launch ball: series values
                prof.U0[i] = launch.p0 * target + 0.5 * launch.d2U0 * target * target +
                             launch.d3U0 * target * target * target / 6.0;
                prof.u0_prime[i] = branch_tilt(k, c, launch.Lvalue, launch.p0,
                                               m_derivs(sel, target, 0).m, dir);
                continue;
            }
            while (dir * (target - z) > 1e-15) {
                double h = std::min(hmicro, std::abs(target - z)) * dir;
                const double k1 = rhs(z, u);
                const double k2 = rhs(z + 0.5 * h, u + 0.5 * h * k1);
                const double k3 = rhs(z + 0.5 * h, u + 0.5 * h * k2);
                const double k4 = rhs(z + h, u + h * k3);
                const double unew = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                U += 0.5 * h * (u + unew); // trapezoid on U0' over the sub-step
                u = unew;
                z += h;
                const double denom = hamiltonian_derivs(k, u).first - c;
                if (dir * denom <= 0.0)
                    throw SingularityError(
                        "asexual_U0: H'(U0') - c changed sign away from the lag");
            }
            prof.U0[i] = U;
            prof.u0_prime[i] = u;
        }
    };
    march(+1);
    march(-1);
    for (std::size_t i = 0; i < n; ++i)
        if (prof.grid[i] == 0.0) { prof.U0[i] = 0.0; prof.u0_prime[i] = launch.p0; }

    // Algebraic residual of the stationary profile equation.
    double max_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = prof.u0_prime[i];
        const double res = std::abs(m_derivs(sel, prof.grid[i], 0).m -
                                    (hamiltonian(k, u) - c * u + launch.Lvalue));
        max_res = std::max(max_res, res);
    }
    if (max_res > 1e-6)
        throw ConvergenceError("asexual_U0: profile residual above 1e-6");
    return prof;
}

void asexual_U1(const KernelSpec& k, const SelectionSpec& sel, double c, Profile& profile) {
    if (!(c > 0.0)) throw DomainError("asexual_U1 requires c > 0");
    if (profile.U0.size() != profile.grid.size() || profile.grid.empty())
        throw DomainError("asexual_U1 requires a filled U0 profile");
    const std::size_t n = profile.grid.size();
    if (n < 8) throw SingularityError("asexual_U1: grid too coarse to launch characteristics");

    const Lagrangian L = lagrangian(k, c);
    const U0Launch launch = u0_launch(k, sel, c);
    const double h2p0 = hamiltonian_derivs(k, launch.p0).second;
    const double h3p0 = hamiltonian_d3(k, launch.p0);
    const double lambda1 = -0.5 * h2p0 * launch.d2U0; // = -(1/2)(1/L'')^(1/2)
    // dU1/dz at the characteristic equilibrium, from differentiating the
    // corrector equation once.
    const double du1_0 = (h3p0 * launch.d2U0 * launch.d2U0 + h2p0 * launch.d3U0) /
                         (2.0 * h2p0 * launch.d2U0);
    profile.lambda1 = lambda1;
    profile.U1.assign(n, 0.0);

    const double span = std::max(std::abs(profile.grid.front()), std::abs(profile.grid.back()));
    const double hmicro = std::min(2.5e-4, span / 4096.0);
    // Launch offset decoupled from the micro-step: the travel-time integrand
    // behaves like 1/(kappa z), so the quadrature error scales with
    // (hmicro/delta)^2 while the linearized launch costs O(delta^2).
    const double delta = 1e-2 * std::min(1.0, span);

    auto tilt_at = [&](double z, int dir) {
        return branch_tilt(k, c, L.value, launch.p0, m_derivs(sel, z, 0).m, dir);
    };
    auto D_at = [&](double z, int dir) {
        return hamiltonian_derivs(k, tilt_at(z, dir)).first - c;
    };

    auto march = [&](int dir) {
        double z = dir * delta;
        double D0 = D_at(z, dir);
        double s = 0.0;           // travel time along the characteristic
        double invD_prev = 1.0 / D0;
        const double U1_launch = du1_0 * z;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if ((dir > 0 && profile.grid[i] > 0) || (dir < 0 && profile.grid[i] < 0))
                idx.push_back(i);
        if (dir < 0) std::reverse(idx.begin(), idx.end());
        for (std::size_t i : idx) {
            const double target = profile.grid[i];
            if (std::abs(target) <= delta) {
                profile.U1[i] = du1_0 * target;
                continue;
            }
            while (dir * (target - z) > 1e-15) {
                const double h = std::min(hmicro, std::abs(target - z)) * dir;
                const double zn = z + h;
                const double invD_new = 1.0 / D_at(zn, dir);
                s += 0.5 * h * (invD_prev + invD_new); // ds = dz / D
                invD_prev = invD_new;
                z = zn;
            }
            const double Dz = D_at(z, dir);
            profile.U1[i] = U1_launch + lambda1 * s + 0.5 * std::log(std::abs(Dz / D0));
        }
    };
    march(+1);
    march(-1);
    for (std::size_t i = 0; i < n; ++i)
        if (profile.grid[i] == 0.0) profile.U1[i] = 0.0;

    // Pin the free additive constant: U1(z0*) = 0.
    const double z0 = -m_inverse_pos(sel, L.value);
    double u1_at_lag = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (profile.grid[i] <= z0 && z0 <= profile.grid[i + 1]) {
            const double t = (z0 - profile.grid[i]) / (profile.grid[i + 1] - profile.grid[i]);
            u1_at_lag = (1.0 - t) * profile.U1[i] + t * profile.U1[i + 1];
            break;
        }
    }
    for (double& v : profile.U1) v -= u1_at_lag;
}

Profile infinitesimal_U1(const SelectionSpec& sel, double c, std::vector<double> grid) {
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()))
        throw DomainError("infinitesimal_U1 needs an increasing grid");
    const AsymptoticPrediction lead = infinitesimal_leading(sel, 1.0, c);
    const double z0 = lead.zstar0;
    const MDerivs md0 = m_derivs(sel, z0, 3);
    if (std::abs(md0.m2) < 1e-12)
        throw DegenerateError("infinitesimal_U1: inflection at the lag");
    const double pstar = md0.m3 / (2.0 * md0.m2) + 2.0 * c;

    auto G = [&](double z) {
        return m_derivs(sel, z, 0).m - md0.m - md0.m1 * (z - z0);
    };

    Profile prof;
    prof.mode = ReproductionMode::Infinitesimal;
    prof.grid = std::move(grid);
    const std::size_t n = prof.grid.size();
    prof.U0.assign(n, 0.0);
    prof.U1.assign(n, 0.0);
    // Direct evaluation of G(z0 + u) cancels catastrophically once u is tiny
    // (difference of O(m(z0)) terms for an O(u^2) result) and the 2^n factor
    // amplifies that noise, so the dyadic tail is summed analytically from its
    // local expansion G ~ m''/2 u^2 + m'''/6 u^3.
    constexpr double u_switch = 1e-4;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = prof.grid[i];
        const double h = z - z0;
        prof.U0[i] = 0.5 * h * h;
        double sum = pstar * h;
        double scale = 1.0;
        for (int nn = 0; nn < 60; ++nn) {
            const double u = h / scale;
            if (std::abs(u) <= u_switch) {
                const double inv = 1.0 / scale; // sum_{k>=n} 2^-k = 2 * 2^-n etc.
                sum += 0.5 * md0.m2 * h * h * (2.0 * inv) +
                       md0.m3 / 6.0 * h * h * h * (inv * inv * 4.0 / 3.0);
                break;
            }
            const double g = G(z0 + u);
            if (1.0 + g <= 0.0)
                throw DivergenceError("infinitesimal_U1: 1 + G <= 0 on the grid");
            const double term = scale * std::log1p(g);
            sum += term;
            if (std::abs(term) < 1e-13 * (1.0 + std::abs(sum))) break;
            scale *= 2.0;
        }
        prof.U1[i] = sum;
    }
    return prof;
}

CriticalSpeeds critical_speeds(ReproductionMode mode, const KernelSpec& k,
                               const SelectionSpec& sel, const ModelParams& params,
                               ApproxOrder order) {
    params.validate();
    CriticalSpeeds out;
    const ScaledParams sp = to_scaled(params, mode);
    const double viability = (params.beta - params.mu0) / params.beta; // scaled target load

    if (mode == ReproductionMode::Asexual) {
        const double sm = sup_m(sel);
        out.c_tip = std::isfinite(sm) ? params.sigma * params.beta * std::sqrt(2.0 * sm)
                                      : kInf;
        auto lambda_scaled = [&](double cs) {
            const Lagrangian L = lagrangian(k, cs);
            double v = 1.0 - L.value;
            if (order == ApproxOrder::FirstCorrection)
                v -= 0.5 * sp.eps * std::sqrt(1.0 / L.curvature);
            return v - params.mu0 / params.beta;
        };
        double hi = 1.0;
        while (lambda_scaled(hi) > 0.0) hi *= 2.0;
        const double cs = detail::bisect(lambda_scaled, 0.0, hi, 1e-14);
        out.c_star = cs * params.sigma * params.beta;
        return out;
    }

    const double gmax = max_gradient(sel);
    const double gradient_to_dim = params.sigma * params.sigma * std::sqrt(params.alpha * params.beta);
    out.c_tip = std::isfinite(gmax) ? gradient_to_dim * gmax : kInf;

    if (order == ApproxOrder::Leading) {
        if (viability >= sup_m(sel)) {
            out.c_star = out.c_tip; // extinction level unreachable: tipping decides
            return out;
        }
        const double z0 = m_inverse_pos(sel, viability);
        out.c_star = gradient_to_dim * m_derivs(sel, z0, 1).m1;
        return out;
    }

    auto lambda_scaled = [&](double cs) {
        const AsymptoticPrediction p = infinitesimal_correction(sel, sp.eps, cs);
        return p.lambda() - params.mu0 / params.beta;
    };
    const double cs_hi = std::isfinite(gmax) ? gmax * (1.0 - 1e-9) : [&] {
        double hi = 1.0;
        while (lambda_scaled(hi) > 0.0) hi *= 2.0;
        return hi;
    }();
    if (std::isfinite(gmax) && lambda_scaled(cs_hi) > 0.0) {
        out.c_star = out.c_tip; // still viable at tipping
        return out;
    }
    const double cs = detail::bisect(lambda_scaled, 0.0, cs_hi, 1e-14);
    out.c_star = cs * gradient_to_dim;
    return out;
}

VarianceTrend variance_trend(const KernelSpec& k, const SelectionSpec& sel, double c) {
    if (!(c > 0.0)) throw DomainError("variance_trend requires c > 0");
    auto V = [&](double cc) {
        const Lagrangian L = lagrangian(k, cc, LagrangianOrder::Value);
        if (L.value >= sup_m(sel))
            throw TippingError("variance_trend: stencil reaches past the tipping speed");
        const double lag = m_inverse_pos(sel, L.value);
        return cc / m_derivs(sel, lag, 1).m1;
    };
    const double h = 1e-4 * c;
    const double v0 = V(c);
    const double d = (V(c + h) - V(c - h)) / (2.0 * h);
    const double rel = d * c / v0;

    // Cross-check: Var increases with c iff c -> m^-1(L(c)) is convex.
    auto lag = [&](double cc) { return m_inverse_pos(sel, lagrangian(k, cc).value); };
    const double h2 = 1e-3 * c;
    const double curv = (lag(c + h2) - 2.0 * lag(c) + lag(c - h2)) / (h2 * h2);
    const double curv_rel = curv * c * c / std::max(lag(c), 1e-300);

    if (std::abs(rel) <= 1e-6) return VarianceTrend::Flat;
    const VarianceTrend fd = rel > 0 ? VarianceTrend::Increasing : VarianceTrend::Decreasing;
    // Convexity of the lag is sufficient (not necessary) for an increasing
    // variance, so only a decisively convex lag may contradict the stencil.
    if (curv_rel > 1e-5 && fd == VarianceTrend::Decreasing && std::abs(rel) > 1e-5)
        throw ConvergenceError("variance_trend: finite-difference and convexity checks disagree");
    return fd;
}

const char* to_string(VarianceTrend t) {
    switch (t) {
        case VarianceTrend::Increasing: return "increasing";
        case VarianceTrend::Flat: return "flat";
        case VarianceTrend::Decreasing: return "decreasing";
    }
    return "?";
}

} // namespace mopt
