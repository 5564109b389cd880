// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line so the whole gate can be read off a single run of this binary
// (also split into acceptance_c1..c10 ctest entries).
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mopt/asymptotics.hpp"
#include "mopt/experiments.hpp"
#include "mopt/simulator.hpp"

using namespace mopt;
using Clock = std::chrono::steady_clock;

namespace {

double secs(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void verdict(int crit, const std::string& name, bool pass, const std::string& detail) {
    std::printf("ACCEPTANCE C%-2d %-28s %s  %s\n", crit, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

const std::vector<KernelSpec> kFive = {KernelSpec::diffusion(), KernelSpec::uniform(),
                                       KernelSpec::gaussian(), KernelSpec::exponential(),
                                       KernelSpec::gamma(0.5)};

// Sample-table Legendre maximizer, coarse-to-fine, independent of lagrangian().
double brute_force_legendre(const KernelSpec& k, double c) {
    const double pm = std::min(p_max(k) * (1.0 - 1e-9), 3.0);
    auto table = [&](double lo, double hi, double step) {
        HTable t;
        for (double p = lo; p <= hi + 0.5 * step; p += step) {
            t.p.push_back(p);
            t.H.push_back(hamiltonian(k, p));
        }
        return t;
    };
    const HTable coarse = table(-pm, pm, 1e-3);
    std::size_t best = 0;
    for (std::size_t i = 0; i < coarse.p.size(); ++i)
        if (coarse.p[i] * c - coarse.H[i] > coarse.p[best] * c - coarse.H[best]) best = i;
    return legendre_numeric_oracle(
        table(std::max(-pm, coarse.p[best] - 2e-3), std::min(pm, coarse.p[best] + 2e-3), 1e-6),
        c);
}

struct SimPoint {
    ReproductionMode mode;
    double c; // scaled
    EquilibriumReport rep;
};

EquilibriumReport run_point(ReproductionMode mode, const KernelSpec& k,
                            const SelectionSpec& sel, double eps, double c, double dz,
                            double stop_tol = 1e-9) {
    SolverSetup s{mode, k, sel, eps, c};
    const AsymptoticPrediction pred = predict(mode, k, sel, eps, c, ApproxOrder::FirstCorrection);
    const Grid g = suggest_grid(pred.zstar(), pred.var(), dz);
    SolveOptions opts;
    opts.stop_tol = stop_tol;
    auto [rep, dist] = solve_equilibrium(Distribution::gaussian(g, pred.zstar(), pred.var()), s,
                                         opts);
    return rep;
}

} // namespace

TEST_CASE("criterion_1 kernel duality") {
    const auto t0 = Clock::now();
    double worst = 0.0;
    bool ordered = true;
    for (int i = 0; i <= 10; ++i) {
        const double c = 0.05 * i;
        double prev = 1e300;
        for (const KernelSpec& k : kFive) {
            const double lib = lagrangian(k, c).value;
            worst = std::max(worst, std::abs(lib - brute_force_legendre(k, c)));
            if (lib > prev + 1e-15) ordered = false;
            prev = lib;
        }
    }
    const double dt = secs(t0);
    const bool pass = worst <= 1e-8 && ordered && dt < 1.0;
    verdict(1, "kernel duality", pass,
            "max|L - oracle| = " + std::to_string(worst) +
                (ordered ? ", ordering ok" : ", ORDERING BROKEN") + ", " +
                std::to_string(dt) + " s");
    CHECK(worst <= 1e-8);
    CHECK(ordered);
    CHECK(dt < 1.0);
}

TEST_CASE("criterion_2 diffusion closed form") {
    const auto t0 = Clock::now();
    double sup = 0.0;
    for (double c : {0.2, 0.4}) {
        std::vector<double> grid;
        for (int i = -300; i <= 300; ++i) grid.push_back(i * 0.01);
        const Profile p =
            asexual_U0(KernelSpec::diffusion(), SelectionSpec::quadratic(), c, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            sup = std::max(sup,
                           std::abs(p.U0[i] - (c * grid[i] + 0.5 * grid[i] * grid[i])));
    }
    const double dt = secs(t0);
    const bool pass = sup <= 1e-6 && dt < 1.0;
    verdict(2, "diffusion U0 closed form", pass,
            "sup err = " + std::to_string(sup) + ", " + std::to_string(dt) + " s");
    CHECK(sup <= 1e-6);
    CHECK(dt < 1.0);
}

namespace {
std::vector<SimPoint> asexual_crossval_points() {
    std::vector<SimPoint> pts;
    for (double c : {0.1, 0.2, 0.3})
        pts.push_back({ReproductionMode::Asexual, c,
                       run_point(ReproductionMode::Asexual, KernelSpec::gaussian(),
                                 SelectionSpec::quadratic(), 0.1, c, 0.01)});
    return pts;
}
std::vector<SimPoint> infinitesimal_crossval_points() {
    std::vector<SimPoint> pts;
    for (double c : {0.1, 0.3})
        pts.push_back({ReproductionMode::Infinitesimal, c,
                       run_point(ReproductionMode::Infinitesimal, KernelSpec::gaussian(),
                                 SelectionSpec::quadratic(), 0.1, c, 0.00625)});
    return pts;
}
} // namespace

TEST_CASE("criterion_3 asexual cross-validation") {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (const SimPoint& pt : asexual_crossval_points()) {
        const auto corr = asexual_correction(KernelSpec::gaussian(), SelectionSpec::quadratic(),
                                             0.1, pt.c);
        const double dl = std::abs(pt.rep.lambda - corr.lambda());
        const double dz = std::abs(pt.rep.zstar - corr.zstar0);
        const double var_pred = corr.var_leading;
        const double dv = std::abs(pt.rep.var - var_pred) / var_pred;
        pass = pass && pt.rep.converged && dl <= 0.02 && dz <= 0.05 && dv <= 0.15;
        char buf[128];
        std::snprintf(buf, sizeof buf, "[c=%.1f dl=%.4f dz=%.4f dv=%.1f%%] ", pt.c, dl, dz,
                      100 * dv);
        detail += buf;
        CHECK(dl <= 0.02);
        CHECK(dz <= 0.05);
        CHECK(dv <= 0.15);
    }
    const double dt = secs(t0);
    pass = pass && dt < 120.0;
    verdict(3, "asexual cross-validation", pass, detail + std::to_string(dt) + " s");
    CHECK(dt < 120.0);
}

TEST_CASE("criterion_4 infinitesimal cross-validation") {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (const SimPoint& pt : infinitesimal_crossval_points()) {
        const auto corr = infinitesimal_correction(SelectionSpec::quadratic(), 0.1, pt.c);
        const double dl = std::abs(pt.rep.lambda - corr.lambda());
        const double dzs = std::abs(pt.rep.zstar - corr.zstar());
        const double dv = std::abs(pt.rep.var - corr.var()) / corr.var();
        pass = pass && pt.rep.converged && dl <= 0.01 && dzs <= 0.02 && dv <= 0.10;
        char buf[128];
        std::snprintf(buf, sizeof buf, "[c=%.1f dl=%.4f dz=%.4f dv=%.1f%%] ", pt.c, dl, dzs,
                      100 * dv);
        detail += buf;
        CHECK(dl <= 0.01);
        CHECK(dzs <= 0.02);
        CHECK(dv <= 0.10);
    }
    const double dt = secs(t0);
    pass = pass && dt < 300.0;
    verdict(4, "infinitesimal cross-validation", pass, detail + std::to_string(dt) + " s");
    CHECK(dt < 300.0);
}

TEST_CASE("criterion_5 generic identities") {
    // Identities extracted from the simulated equilibria of the two
    // cross-validation suites, as stated: |lambda - (1 - m(z*))| <= 5e-3 and
    // |Var m'(z*) + eps^gamma c| <= 10% relative.
    bool pass = true;
    std::string detail;
    auto check_point = [&](const SimPoint& pt) {
        const double gamma_eps = pt.mode == ReproductionMode::Asexual ? 0.1 : 0.01;
        const MDerivs md = m_derivs(SelectionSpec::quadratic(), pt.rep.zstar, 1);
        const double id1 = std::abs(pt.rep.lambda - (1.0 - md.m));
        const double id2 =
            std::abs(pt.rep.var * md.m1 + gamma_eps * pt.c) / (gamma_eps * pt.c);
        char buf[160];
        std::snprintf(buf, sizeof buf, "[%s c=%.1f id1=%.2e id2=%.2f%%] ",
                      pt.mode == ReproductionMode::Asexual ? "asex" : "inf", pt.c, id1,
                      100 * id2);
        detail += buf;
        pass = pass && id1 <= 5e-3 && id2 <= 0.10;
        CHECK(id1 <= 5e-3);
        CHECK(id2 <= 0.10);
    };
    for (const SimPoint& pt : asexual_crossval_points()) check_point(pt);
    for (const SimPoint& pt : infinitesimal_crossval_points()) check_point(pt);
    verdict(5, "generic identities", pass, detail);
}

TEST_CASE("criterion_6 tipping asexual bounded") {
    const auto t0 = Clock::now();
    const ModelParams mp{1.0, 0.0, 1.0, 0.1, 0.0};
    const CriticalSpeeds cs = critical_speeds(ReproductionMode::Asexual, KernelSpec::gaussian(),
                                              SelectionSpec::bounded(0.5), mp);
    const bool tip_ok = std::abs(cs.c_tip - 0.1) <= 1e-12;

    SolverSetup s{ReproductionMode::Asexual, KernelSpec::gaussian(), SelectionSpec::bounded(0.5),
                  0.1, 0.9};
    const Grid g = Grid::make(-10.0, 2.0, 0.0125);
    SolveOptions opts;
    opts.allow_expand = false;
    bool conv_ok = true;
    for (double z0 : {-1.0, 0.0}) {
        auto [rep, d] = solve_equilibrium(Distribution::gaussian(g, z0, 0.1), s, opts);
        conv_ok = conv_ok && rep.converged && !rep.diverged;
    }
    s.c = 1.1;
    bool div_ok = true;
    for (double z0 : {-1.0, 0.0}) {
        auto [rep, d] = solve_equilibrium(Distribution::gaussian(g, z0, 0.1), s, opts);
        div_ok = div_ok && rep.diverged;
    }
    const bool pass = tip_ok && conv_ok && div_ok;
    verdict(6, "tipping asexual bounded", pass,
            "c_tip err = " + std::to_string(std::abs(cs.c_tip - 0.1)) +
                (conv_ok ? ", converges below" : ", NO convergence below") +
                (div_ok ? ", diverges above" : ", NO divergence above") + ", " +
                std::to_string(secs(t0)) + " s");
    CHECK(tip_ok);
    CHECK(conv_ok);
    CHECK(div_ok);
}

TEST_CASE("criterion_7 tipping infinitesimal bounded") {
    const auto t0 = Clock::now();
    const ModelParams mp{1.0, 0.0, 1.0, 0.1, 0.0};
    const SelectionSpec sel = SelectionSpec::bounded(1.0);
    const CriticalSpeeds cs =
        critical_speeds(ReproductionMode::Infinitesimal, KernelSpec::gaussian(), sel, mp);
    const double tip_expect = 0.01 * std::exp(-0.5);
    const bool tip_ok = std::abs(cs.c_tip - tip_expect) <= 1e-9;

    const double c = 0.8 * std::exp(-0.5); // scaled 0.8 c_tip
    const double zs = -gradient_inverse_convex(sel, c);
    const double zu = -*gradient_inverse_concave(sel, c);
    SolverSetup s{ReproductionMode::Infinitesimal, KernelSpec::gaussian(), sel, 0.1, c};
    const Grid g = Grid::make(-6.0, 1.5, 0.01);
    SolveOptions opts;
    opts.allow_expand = false;

    auto [r1, d1] = solve_equilibrium(Distribution::gaussian(g, zs, 0.01), s, opts);
    const auto corr = infinitesimal_correction(sel, 0.1, c);
    const bool stable_ok =
        r1.converged && !r1.diverged && std::abs(r1.zstar - corr.zstar()) <= 0.05;
    auto [r2, d2] = solve_equilibrium(Distribution::gaussian(g, 1.5 * zu, 0.01), s, opts);
    const bool unstable_ok = r2.diverged;

    const bool pass = tip_ok && stable_ok && unstable_ok;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "c_tip err=%.1e, z_s*=%.3f -> z*=%.3f (%s), 1.5 z_u*=%.3f -> %s, %.1f s",
                  std::abs(cs.c_tip - tip_expect), zs, r1.zstar,
                  stable_ok ? "stable" : "NOT STABLE", 1.5 * zu,
                  unstable_ok ? "diverges" : "DOES NOT DIVERGE", secs(t0));
    verdict(7, "tipping infinitesimal bounded", pass, buf);
    CHECK(tip_ok);
    CHECK(stable_ok);
    CHECK(unstable_ok);
}

TEST_CASE("criterion_8 skewness signs") {
    const auto t0 = Clock::now();
    const ModelParams mp{1.0, 0.0, 1.0, 0.1, 0.0};
    const CriticalSpeeds cs =
        critical_speeds(ReproductionMode::Asexual, KernelSpec::gaussian(),
                        SelectionSpec::quadratic(), mp);
    const double c_scaled = 0.3 * cs.c_star / (mp.sigma * mp.beta);

    const EquilibriumReport rs = run_point(ReproductionMode::Asexual, KernelSpec::gaussian(),
                                           SelectionSpec::super_quadratic(), 0.1, c_scaled, 0.01);
    const EquilibriumReport rb = run_point(ReproductionMode::Asexual, KernelSpec::gaussian(),
                                           SelectionSpec::bounded(0.5), 0.1, c_scaled, 0.01);

    const CriticalSpeeds ci = critical_speeds(ReproductionMode::Infinitesimal,
                                              KernelSpec::gaussian(), SelectionSpec::quadratic(),
                                              mp);
    const double ci_scaled = 0.3 * ci.c_star / (mp.sigma * mp.sigma);
    const EquilibriumReport rq =
        run_point(ReproductionMode::Infinitesimal, KernelSpec::gaussian(),
                  SelectionSpec::quadratic(), 0.1, ci_scaled, 0.00625);

    const bool pass = rs.skew > 0.05 && rb.skew < -0.05 && std::abs(rq.kurt) <= 0.1;
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "superquad skew=%.4f (>0.05), bounded skew=%.4f (<-0.05), inf kurt=%.4f "
                  "(|.|<=0.1), %.1f s",
                  rs.skew, rb.skew, rq.kurt, secs(t0));
    verdict(8, "skewness signs", pass, buf);
    CHECK(rs.skew > 0.05);
    CHECK(rb.skew < -0.05);
    CHECK(std::abs(rq.kurt) <= 0.1);
}

TEST_CASE("criterion_9 extinction speed selection-independence") {
    const ModelParams mp{1.0, 0.0, 1.0, 0.1, 0.0};
    double worst = 0.0;
    for (const KernelSpec& k : kFive) {
        const double c1 =
            critical_speeds(ReproductionMode::Asexual, k, SelectionSpec::quadratic(), mp).c_star;
        const double c2 =
            critical_speeds(ReproductionMode::Asexual, k, SelectionSpec::super_quadratic(), mp)
                .c_star;
        const double c3 =
            critical_speeds(ReproductionMode::Asexual, k, SelectionSpec::bounded(0.5), mp).c_star;
        worst = std::max({worst, std::abs(c1 - c2), std::abs(c1 - c3)});
    }
    const bool pass = worst <= 1e-12;
    verdict(9, "c* selection-independence", pass, "max spread = " + std::to_string(worst));
    CHECK(worst <= 1e-12);
}

TEST_CASE("criterion_10 distribution reconstruction") {
    // Runs the two distribution presets end to end (dimensional c = 0.09
    // asexual / 0.05 infinitesimal at sigma = 0.1, alpha = beta = 1) and reads
    // the bulk log gaps from their summaries.
    const auto t0 = Clock::now();
    auto preset_gaps = [](const std::string& name, const std::string& dir) {
        const ExperimentConfig cfg = preset(name);
        run_distribution(cfg, dir);
        std::ifstream in(dir + "/summary.txt");
        REQUIRE(in.good());
        double g0 = std::numeric_limits<double>::quiet_NaN();
        double g1 = std::numeric_limits<double>::quiet_NaN();
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("bulk_log_gap_F0:", 0) == 0) g0 = std::stod(line.substr(16));
            if (line.rfind("bulk_log_gap_F1:", 0) == 0) g1 = std::stod(line.substr(16));
        }
        return std::pair<double, double>(g0, g1);
    };
    const auto [a0, a1] = preset_gaps("distribution-asexual", "acceptance-c10/asexual");
    const auto [b0, b1] =
        preset_gaps("distribution-infinitesimal", "acceptance-c10/infinitesimal");
    const bool pass = a0 <= 0.3 && b1 <= 0.3 && b0 > 0.3;
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "asex gap0=%.3f (<=0.3) gap1=%.3f; inf gap1=%.3f (<=0.3) gap0=%.3f (>0.3), %.1f s",
                  a0, a1, b1, b0, secs(t0));
    verdict(10, "distribution reconstruction", pass, buf);
    CHECK(a0 <= 0.3);
    CHECK(b1 <= 0.3);
    CHECK(b0 > 0.3);
}
