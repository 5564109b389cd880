#include "mopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mopt/detail/fft.hpp"

namespace mopt {

namespace {

double trapz(const std::vector<double>& v, double dz) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * dz;
}

// Kernel taps as per-cell masses of K_eps on the grid spacing; symmetric,
// truncated when the remaining tail is negligible, renormalized to 1.
std::vector<double> kernel_taps_uncached(const KernelSpec& k, double eps, double dz) {
    const double step = dz / eps; // cell width in unit-variance units
    std::vector<double> half;     // j = 0, 1, 2, ...
    half.push_back(kernel_cell_mass(k, -0.5 * step, 0.5 * step));
    double cum = half[0];
    for (int j = 1;; ++j) {
        const double m = kernel_cell_mass(k, (j - 0.5) * step, (j + 0.5) * step);
        half.push_back(m);
        cum += 2.0 * m;
        if (1.0 - cum < 1e-14 && j * step > 3.0) break;
        if (j > 200000) break;
    }
    const int w = int(half.size()) - 1;
    std::vector<double> taps(2 * w + 1);
    for (int j = -w; j <= w; ++j) taps[j + w] = half[std::abs(j)];
    const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (double& t : taps) t /= total;
    return taps;
}

// Time stepping reuses identical taps thousands of times; keyed per thread.
const std::vector<double>& kernel_taps(const KernelSpec& k, double eps, double dz) {
    struct Key {
        KernelFamily fam;
        double shape, eps, dz;
        bool operator==(const Key&) const = default;
    };
    static thread_local Key key{KernelFamily::Diffusion, -1, -1, -1};
    static thread_local std::vector<double> taps;
    const Key want{k.family, k.gamma_shape, eps, dz};
    if (!(want == key)) {
        taps = kernel_taps_uncached(k, eps, dz);
        key = want;
    }
    return taps;
}

// Centered convolution of densities with mass taps, zero padding outside.
std::vector<double> apply_taps(const std::vector<double>& f, const std::vector<double>& taps) {
    const int n = int(f.size());
    const int w = (int(taps.size()) - 1) / 2;
    std::vector<double> out(f.size(), 0.0);
    if (std::size_t(n) * taps.size() > 200000) {
        std::vector<double> full = convolve_fft(f, taps);
        for (int i = 0; i < n; ++i) out[i] = full[i + w];
        return out;
    }
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        const int jlo = std::max(-w, i - (n - 1));
        const int jhi = std::min(w, i);
        for (int j = jlo; j <= jhi; ++j) s += taps[j + w] * f[i - j];
        out[i] = s;
    }
    return out;
}

const std::vector<double>& gaussian_taps(double sd, double dz) {
    static thread_local double key_sd = -1.0, key_dz = -1.0;
    static thread_local std::vector<double> taps;
    if (sd != key_sd || dz != key_dz) {
        auto cdf = [&](double x) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); };
        const int w = std::max(2, int(std::ceil(9.0 * sd / dz)));
        taps.assign(2 * w + 1, 0.0);
        for (int j = -w; j <= w; ++j) taps[j + w] = cdf((j + 0.5) * dz) - cdf((j - 0.5) * dz);
        const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
        for (double& t : taps) t /= total;
        key_sd = sd;
        key_dz = dz;
    }
    return taps;
}

double max_m_on_grid(const SelectionSpec& sel, const Grid& g) {
    return std::max(m_derivs(sel, g.z_min, 0).m, m_derivs(sel, g.z_max, 0).m);
}

// Mortality increment sampled on the grid, cached per thread across steps.
const std::vector<double>& m_on_grid(const SelectionSpec& sel, const Grid& g) {
    struct Key {
        SelectionSpec sel;
        double z_min, dz;
        int n;
        bool operator==(const Key&) const = default;
    };
    static thread_local Key key{{}, 1e300, 0, 0};
    static thread_local std::vector<double> mvals;
    const Key want{sel, g.z_min, g.dz(), g.n};
    if (!(want == key)) {
        mvals.resize(g.n);
        for (int i = 0; i < g.n; ++i) mvals[i] = m_derivs(sel, g.node(i), 0).m;
        key = want;
    }
    return mvals;
}

double mean_of(const Distribution& p) {
    const double dz = p.grid.dz();
    std::vector<double> w(p.values.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = p.grid.node(int(i)) * p.values[i];
    return trapz(w, dz) / p.mass();
}

} // namespace

std::vector<double> Grid::nodes() const {
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = node(i);
    return z;
}

Grid Grid::make(double z_lo, double z_hi, double dz) {
    if (!(dz > 0.0) || !(z_lo < 0.0) || !(z_hi > 0.0))
        throw DomainError("Grid::make needs dz > 0 and bounds bracketing 0");
    const int k_lo = int(std::ceil(-z_lo / dz - 1e-12));
    const int k_hi = int(std::ceil(z_hi / dz - 1e-12));
    Grid g;
    g.z_min = -k_lo * dz;
    g.z_max = k_hi * dz;
    g.n = k_lo + k_hi + 1;
    return g;
}

Grid Grid::window(double z_lo, double z_hi, double dz) {
    if (!(dz > 0.0) || !(z_lo < z_hi))
        throw DomainError("Grid::window needs dz > 0 and z_lo < z_hi");
    const long k_lo = long(std::floor(z_lo / dz + 1e-12));
    const long k_hi = long(std::ceil(z_hi / dz - 1e-12));
    Grid g;
    g.z_min = k_lo * dz;
    g.z_max = k_hi * dz;
    g.n = int(k_hi - k_lo) + 1;
    return g;
}

double Distribution::mass() const { return trapz(values, grid.dz()); }

void Distribution::normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw DomainError("cannot normalize a massless distribution");
    for (double& v : values) v /= m;
}

Distribution Distribution::gaussian(const Grid& g, double mean, double variance) {
    Distribution d;
    d.grid = g;
    d.values.resize(g.n);
    const double s2 = 2.0 * variance;
    for (int i = 0; i < g.n; ++i) {
        const double z = g.node(i) - mean;
        d.values[i] = std::exp(-z * z / s2);
    }
    d.normalize();
    return d;
}

Distribution Distribution::delta(const Grid& g, int node) {
    Distribution d;
    d.grid = g;
    d.values.assign(g.n, 0.0);
    d.values[node] = 1.0 / g.dz();
    return d;
}

Moments moments(const Distribution& f) {
    const double dz = f.grid.dz();
    Moments mo;
    mo.mass = f.mass();
    if (!(mo.mass > 0.0)) throw DomainError("moments need positive mass");
    auto weighted = [&](auto&& fn) {
        std::vector<double> w(f.values.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = fn(f.grid.node(int(i))) * f.values[i];
        return trapz(w, dz) / mo.mass;
    };
    mo.mean = weighted([](double z) { return z; });
    const double mu = mo.mean;
    mo.var = weighted([mu](double z) { return (z - mu) * (z - mu); });
    if (mo.var > 1e-300) {
        const double mu3 = weighted([mu](double z) { return std::pow(z - mu, 3); });
        const double mu4 = weighted([mu](double z) { return std::pow(z - mu, 4); });
        mo.skew = mu3 / std::pow(mo.var, 1.5);
        mo.excess_kurt = mu4 / (mo.var * mo.var) - 3.0;
    }
    return mo;
}

Distribution reproduce_asexual(const Distribution& f, const KernelSpec& k, double eps) {
    Distribution out;
    out.grid = f.grid;
    const double dz = f.grid.dz();
    if (k.family == KernelFamily::Diffusion) {
        const int n = f.grid.n;
        out.values.assign(n, 0.0);
        const double coef = 0.5 * eps * eps / (dz * dz);
        for (int i = 0; i < n; ++i) {
            const double left = i > 0 ? f.values[i - 1] : 0.0;
            const double right = i + 1 < n ? f.values[i + 1] : 0.0;
            out.values[i] = f.values[i] + coef * (left - 2.0 * f.values[i] + right);
        }
        return out;
    }
    if (eps / dz < 4.0)
        throw ResolutionError("reproduce_asexual: eps/dz < 4, kernel under-resolved");
    out.values = apply_taps(f.values, kernel_taps(k, eps, dz));
    return out;
}

Distribution reproduce_infinitesimal(const Distribution& f, double eps) {
    const double dz = f.grid.dz();
    if (eps / dz < 4.0)
        throw ResolutionError("reproduce_infinitesimal: eps/dz < 4, segregation under-resolved");
    const double m0 = f.mass();
    if (!(m0 > 0.0)) throw DomainError("reproduce_infinitesimal needs positive mass");
    const int n = f.grid.n;

    // Mid-parent density: s(u) = 2 (F*F)(2u) / mass^2. The full convolution
    // lives on {2 z_min + k dz}; the value at 2 * node(i) is entry 2i.
    std::vector<double> conv =
        std::size_t(n) * n > 200000 ? convolve_fft(f.values, f.values)
                                    : convolve_direct(f.values, f.values);
    std::vector<double> mid(n);
    for (int i = 0; i < n; ++i) mid[i] = 2.0 * conv[2 * i] * dz / (m0 * m0);
    // Exact unit mass for the mid-parent law keeps reproduction conservative.
    const double mm = trapz(mid, dz);
    if (mm > 0.0)
        for (double& v : mid) v /= mm;

    Distribution out;
    out.grid = f.grid;
    out.values = apply_taps(mid, gaussian_taps(eps / std::sqrt(2.0), dz));
    for (double& v : out.values) v *= m0;
    return out;
}

StepResult step(const Distribution& p, const SolverSetup& s, double dt) {
    const Grid& g = p.grid;
    const double dz = g.dz();
    const int n = g.n;
    const double a = (s.mode == ReproductionMode::Asexual ? s.eps : s.eps * s.eps) * s.c;
    if (dt * std::abs(a) / dz > 0.9)
        throw CFLError("step: dt * eps^gamma * c / dz exceeds 0.9");
    if (dt * max_m_on_grid(s.sel, g) > 0.5)
        throw CFLError("step: dt * max m exceeds 0.5");
    if (s.mode == ReproductionMode::Asexual && s.kernel.family == KernelFamily::Diffusion &&
        dt * s.eps * s.eps / (dz * dz) > 0.9)
        throw CFLError("step: diffusion stability bound dt * eps^2 / dz^2 exceeds 0.9");

    const Distribution birth = s.mode == ReproductionMode::Asexual
                                   ? reproduce_asexual(p, s.kernel, s.eps)
                                   : reproduce_infinitesimal(p, s.eps);

    const std::vector<double>& m = m_on_grid(s.sel, g);
    double mbar = 0.0;
    {
        std::vector<double> w(p.values.size());
        for (int i = 0; i < n; ++i) w[i] = m[i] * p.values[i];
        mbar = trapz(w, dz) / p.mass();
    }

    StepResult out;
    out.p.grid = g;
    out.p.values.resize(n);
    for (int i = 0; i < n; ++i) {
        // One-sided upwind difference oriented by the sign of the transport
        // coefficient, second order in the interior (the first-order stencil
        // carries an O(dz) numerical diffusion that inflates the standing
        // variance and displaces deep lags), first order at the boundary with
        // zero inflow.
        double adv;
        if (a >= 0.0) {
            const double p1 = i + 1 < n ? p.values[i + 1] : 0.0;
            if (i + 2 < n)
                adv = (-3.0 * p.values[i] + 4.0 * p1 - p.values[i + 2]) / (2.0 * dz);
            else
                adv = (p1 - p.values[i]) / dz;
        } else {
            const double p1 = i > 0 ? p.values[i - 1] : 0.0;
            if (i >= 2)
                adv = (3.0 * p.values[i] - 4.0 * p1 + p.values[i - 2]) / (2.0 * dz);
            else
                adv = (p.values[i] - p1) / dz;
        }
        double v = p.values[i] +
                   dt * (a * adv - (m[i] - mbar) * p.values[i] + birth.values[i] - p.values[i]);
        if (v < 0.0) {
            ++out.clipped;
            v = 0.0;
        }
        out.p.values[i] = v;
    }
    out.p.normalize();
    return out;
}

namespace {

double auto_dt(const SolverSetup& s, const Grid& g) {
    const double a = (s.mode == ReproductionMode::Asexual ? s.eps : s.eps * s.eps) * s.c;
    double dt = 0.45 / (1.0 + max_m_on_grid(s.sel, g));
    // The second-order one-sided transport stencil under forward Euler is only
    // weakly damped; keep the advective number small so the reaction and
    // reproduction terms dominate its residual growth.
    if (a > 0.0) dt = std::min(dt, 0.2 * g.dz() / a);
    if (s.mode == ReproductionMode::Asexual && s.kernel.family == KernelFamily::Diffusion)
        dt = std::min(dt, 0.45 * g.dz() * g.dz() / (s.eps * s.eps));
    return dt;
}

// Widen by 30% on the side whose boundary density is too large; contents are
// copied, new cells start at zero.
Distribution expand(const Distribution& p, bool left) {
    const Grid& g = p.grid;
    const double width = g.z_max - g.z_min;
    const double dz = g.dz();
    const int extra = std::max(8, int(std::ceil(0.3 * width / dz)));
    Grid ng;
    ng.z_min = left ? g.z_min - extra * dz : g.z_min;
    ng.z_max = left ? g.z_max : g.z_max + extra * dz;
    ng.n = g.n + extra;
    Distribution out;
    out.grid = ng;
    out.values.assign(ng.n, 0.0);
    const int off = left ? extra : 0;
    std::copy(p.values.begin(), p.values.end(), out.values.begin() + off);
    return out;
}

} // namespace

std::pair<EquilibriumReport, Distribution> solve_equilibrium(Distribution init,
                                                             const SolverSetup& s,
                                                             const SolveOptions& opts) {
    if (!(s.c >= 0.0)) throw DomainError("solve_equilibrium requires c >= 0");
    Distribution p = std::move(init);
    p.normalize();
    double dt = opts.dt > 0.0 ? opts.dt : auto_dt(s, p.grid);

    EquilibriumReport rep;
    std::int64_t clip_total = 0;
    int expansions = 0;
    double prev_abs_mean = std::abs(mean_of(p));
    std::int64_t drift_run = 0;
    double drift_start_abs = prev_abs_mean;
    double residual = std::numeric_limits<double>::infinity();
    // Divergence tests are phrased in distance to the domain edges so they
    // also make sense on bulk-local windows far from the optimum.
    auto near_edge = [&](double mean) {
        const double margin = (1.0 - opts.edge_fraction) * (p.grid.z_max - p.grid.z_min);
        return mean < p.grid.z_min + margin || mean > p.grid.z_max - margin;
    };
    // Outward displacement a converging transient could plausibly cover; a
    // monotone run beyond this is classified as divergence.
    auto drift_threshold = [&] {
        return std::max(0.5, 0.25 * (p.grid.z_max - p.grid.z_min));
    };

    for (std::int64_t it = 1; it <= opts.max_iters; ++it) {
        StepResult sr = step(p, s, dt);
        clip_total += sr.clipped;
        residual = 0.0;
        for (std::size_t i = 0; i < p.values.size(); ++i)
            residual = std::max(residual, std::abs(sr.p.values[i] - p.values[i]));
        residual /= dt;
        p = std::move(sr.p);

        if (it % 25 == 0 || residual < opts.stop_tol) {
            const double peak = *std::max_element(p.values.begin(), p.values.end());
            const bool hot_left = p.values.front() > opts.expand_trigger * peak;
            const bool hot_right = p.values.back() > opts.expand_trigger * peak;
            if ((hot_left || hot_right) && opts.allow_expand &&
                expansions < opts.max_expansions) {
                p = expand(p, hot_left);
                ++expansions;
                dt = opts.dt > 0.0 ? opts.dt : auto_dt(s, p.grid);
                prev_abs_mean = std::abs(mean_of(p));
                drift_run = 0;
                continue;
            }
        }

        const double cur_mean = mean_of(p);
        const double abs_mean = std::abs(cur_mean);
        if (near_edge(cur_mean)) {
            rep.diverged = true;
            rep.converged = false;
        }
        if (abs_mean > prev_abs_mean + 1e-15) {
            if (drift_run == 0) drift_start_abs = prev_abs_mean;
            ++drift_run;
            if (drift_run >= opts.drift_window &&
                abs_mean - drift_start_abs > drift_threshold()) {
                rep.diverged = true;
                rep.converged = false;
            }
        } else {
            drift_run = 0;
        }
        prev_abs_mean = abs_mean;

        if (residual < opts.stop_tol && !rep.diverged) {
            // A runaway state pressed against the zero-inflow wall can reach a
            // spurious stationary profile with order-one boundary density;
            // interior equilibria stay orders of magnitude below the peak even
            // with the fat near-tipping tails (~1e-4 relative on the
            // recommended arenas).
            const double peak = *std::max_element(p.values.begin(), p.values.end());
            if (std::max(p.values.front(), p.values.back()) > 1e-2 * peak) {
                rep.diverged = true;
                rep.converged = false;
            }
        }
        if (rep.diverged || residual < opts.stop_tol) {
            rep.iterations = it;
            break;
        }
        if (it == opts.max_iters)
            throw NoConvergenceError("solve_equilibrium: max_iters reached", residual);
    }

    rep.residual = residual;
    rep.negative_clips = clip_total;
    rep.expansions = expansions;
    if (!rep.diverged) rep.converged = true;

    // lambda = 1 - mean mortality under the final frequency
    {
        const Grid& g = p.grid;
        std::vector<double> w(p.values.size());
        for (int i = 0; i < g.n; ++i) w[i] = m_derivs(s.sel, g.node(i), 0).m * p.values[i];
        const double mbar = trapz(w, g.dz()) / p.mass();
        rep.lambda = 1.0 - mbar;
    }
    const Moments mo = moments(p);
    rep.zstar = mo.mean;
    rep.var = mo.var;
    rep.skew = mo.skew;
    rep.kurt = mo.excess_kurt;
    rep.rho = rep.lambda; // scaled convention (beta = 1, mu0 = 0)
    rep.order = ApproxOrder::Simulated;
    return {rep, std::move(p)};
}

TippingMap tipping_sweep(const SolverSetup& base, const std::vector<double>& c_list,
                         const std::vector<double>& zinit_list, const Grid& grid,
                         SolveOptions opts) {
    opts.allow_expand = false; // classification needs a fixed arena
    TippingMap map;
    const double eps_gamma =
        base.mode == ReproductionMode::Asexual ? base.eps : base.eps * base.eps;
    for (double c : c_list) {
        SolverSetup s = base;
        s.c = c;
        bool any_conv = false, any_div = false;
        double conv_out = 0.0; // most negative converging initial lag
        double div_in = -std::numeric_limits<double>::infinity(); // least negative diverging
        for (double z0 : zinit_list) {
            TippingCell cell;
            cell.c = c;
            cell.z_init = z0;
            Distribution init = Distribution::gaussian(grid, z0, eps_gamma);
            try {
                auto [rep, dist] = solve_equilibrium(std::move(init), s, opts);
                cell.converged = rep.converged && !rep.diverged;
                cell.final_lag = rep.zstar;
            } catch (const NoConvergenceError&) {
                cell.converged = false;
                cell.final_lag = std::numeric_limits<double>::quiet_NaN();
            }
            if (cell.converged) {
                any_conv = true;
                conv_out = std::min(conv_out, z0);
            } else {
                any_div = true;
                div_in = std::max(div_in, z0);
            }
            map.cells.push_back(cell);
        }
        double boundary;
        if (!any_div) boundary = std::numeric_limits<double>::infinity();
        else if (!any_conv) boundary = -std::numeric_limits<double>::infinity();
        else boundary = 0.5 * (conv_out + div_in);
        map.basin_boundary.push_back(boundary);
    }
    return map;
}

std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t need = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < need) n <<= 1;
    std::vector<std::complex<double>> fa(n);
    std::copy(a.begin(), a.end(), fa.begin());
    detail::fft_pow2(fa, false);
    if (a.data() == b.data() && a.size() == b.size()) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = fa[i].real(), im = fa[i].imag();
            fa[i] = {r * r - im * im, 2.0 * r * im};
        }
    } else {
        std::vector<std::complex<double>> fb(n);
        std::copy(b.begin(), b.end(), fb.begin());
        detail::fft_pow2(fb, false);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = fa[i].real() * fb[i].real() - fa[i].imag() * fb[i].imag();
            const double im = fa[i].real() * fb[i].imag() + fa[i].imag() * fb[i].real();
            fa[i] = {r, im};
        }
    }
    detail::fft_pow2(fa, true);
    std::vector<double> out(need);
    for (std::size_t i = 0; i < need; ++i) out[i] = fa[i].real();
    return out;
}

Grid suggest_grid(double zstar, double var, double dz, double margin_sd) {
    const double sd = std::sqrt(std::max(var, 1e-12));
    // Bulk far below the optimum: keep the domain local to the bulk (see
    // Grid::window). Otherwise include the optimum as a node.
    if (zstar + (margin_sd + 2.0) * sd < 0.0)
        return Grid::window(zstar - margin_sd * sd - 2.0 * dz,
                            zstar + margin_sd * sd + 2.0 * dz, dz);
    const double lo = std::min(zstar - margin_sd * sd, -4.0 * sd) - 2.0 * dz;
    const double hi = std::max(zstar + margin_sd * sd, 4.0 * sd) + 2.0 * dz;
    return Grid::make(lo, hi, dz);
}

} // namespace mopt
