#include "mopt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace mopt {

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    write_file(out_dir + "/manifest.toml", emit_config(cfg));
    write_file(out_dir + "/config_schema.txt", config_schema());
}

SelectionSpec scaled_sel(const ExperimentConfig& cfg, SelectionFamily fam,
                         const ModelParams& params) {
    const double dim_const = fam == SelectionFamily::Bounded ? cfg.m_inf : cfg.a6;
    return scaled_selection(fam, dim_const, params);
}

struct PointSetup {
    ScaledParams sp;
    SelectionSpec sel;
    SolverSetup solver;
};

PointSetup make_point(const ExperimentConfig& cfg, KernelFamily kf, SelectionFamily sf,
                      const ModelParams& params) {
    PointSetup ps;
    ps.sp = to_scaled(params, cfg.mode);
    ps.sel = scaled_sel(cfg, sf, params);
    ps.solver.mode = cfg.mode;
    ps.solver.kernel = {kf, cfg.gamma_shape};
    ps.solver.sel = ps.sel;
    ps.solver.eps = ps.sp.eps;
    ps.solver.c = ps.sp.c;
    return ps;
}

double auto_dz(const ExperimentConfig& cfg, const ScaledParams& sp, double pred_sd) {
    if (cfg.dz > 0.0) return cfg.dz;
    const double by_kernel = sp.mode == ReproductionMode::Asexual ? sp.eps / 5.0 : sp.eps / 8.0;
    return std::min(by_kernel, pred_sd / 8.0);
}

SolveOptions solve_options(const ExperimentConfig& cfg) {
    SolveOptions o;
    o.stop_tol = cfg.stop_tol;
    o.max_iters = cfg.max_iters;
    o.dt = cfg.dt;
    return o;
}

struct CompareRow {
    std::string kernel, selection, status = "ok";
    double sweep_value = 0.0;
    double c_dim = 0.0, c_scaled = 0.0, eps = 0.0;
    EquilibriumReport sim;   // scaled
    bool has_sim = false;
    AsymptoticPrediction lead, corr;
    bool has_lead = false, has_corr = false;
};

std::string csv_or_nan(bool has, double v) { return has ? fmt17(v) : "nan"; }

CompareRow compare_point(const ExperimentConfig& cfg, KernelFamily kf, SelectionFamily sf,
                         double sweep_value) {
    CompareRow row;
    row.kernel = to_string(kf);
    row.selection = to_string(sf);
    row.sweep_value = sweep_value;

    ModelParams params = cfg.params;
    if (cfg.axis == SweepAxis::C) params.c = sweep_value;
    else if (cfg.axis == SweepAxis::Alpha) params.alpha = sweep_value;

    const PointSetup ps = make_point(cfg, kf, sf, params);
    row.c_dim = params.c;
    row.c_scaled = ps.sp.c;
    row.eps = ps.sp.eps;

    const KernelSpec kernel = ps.solver.kernel;
    bool tipped = false;
    try {
        row.lead = predict(cfg.mode, kernel, ps.sel, ps.sp.eps, ps.sp.c, ApproxOrder::Leading);
        row.has_lead = true;
        row.corr = predict(cfg.mode, kernel, ps.sel, ps.sp.eps, ps.sp.c,
                           ApproxOrder::FirstCorrection);
        row.has_corr = true;
    } catch (const TippingError&) {
        tipped = true;
        row.status = "tipping";
    } catch (const BeyondRangeError&) {
        tipped = true;
        row.status = "tipping";
    } catch (const BeyondGradientError&) {
        tipped = true;
        row.status = "tipping";
    } catch (const Error& e) {
        row.status = std::string("prediction_error: ") + e.what();
    }

    // Simulation: skipped beyond tipping or when the predicted lag cannot fit
    // a reasonable grid.
    if (!tipped && row.has_lead) {
        const double zs = row.has_corr ? row.corr.zstar() : row.lead.zstar();
        const double vs = row.has_corr ? row.corr.var() : row.lead.var();
        if (std::abs(zs) > cfg.max_zstar) {
            row.status = "domain_exceeded";
            return row;
        }
        try {
            const double dz = auto_dz(cfg, ps.sp, std::sqrt(vs));
            Grid grid = cfg.domain_halfwidth > 0.0
                            ? Grid::make(-cfg.domain_halfwidth, cfg.domain_halfwidth, dz)
                            : suggest_grid(zs, vs, dz);
            Distribution init = Distribution::gaussian(grid, zs, vs);
            auto [rep, dist] = solve_equilibrium(std::move(init), ps.solver, solve_options(cfg));
            row.sim = rep;
            row.has_sim = true;
            if (rep.diverged) row.status = "diverged";
        } catch (const Error& e) {
            row.status = std::string("sim_error: ") + e.what();
        }
    }
    return row;
}

int hardware_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 2 : int(hc);
}

} // namespace

RunStatus run_compare(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.axis != SweepAxis::C && cfg.axis != SweepAxis::Alpha)
        throw ConfigError("compare needs sweep.axis = c or alpha");
    if (cfg.sweep_values.empty()) throw ConfigError("compare needs sweep.values");
    write_manifest(cfg, out_dir);

    std::vector<KernelFamily> kernels =
        cfg.kernel_series.empty() ? std::vector<KernelFamily>{cfg.kernel} : cfg.kernel_series;
    if (cfg.mode == ReproductionMode::Infinitesimal)
        kernels = {cfg.kernel}; // reproduction ignores the kernel
    std::vector<SelectionFamily> selections = cfg.selection_series.empty()
                                                  ? std::vector<SelectionFamily>{cfg.selection}
                                                  : cfg.selection_series;

    struct Task {
        KernelFamily kf;
        SelectionFamily sf;
        double value;
    };
    std::vector<Task> tasks;
    std::vector<double> values = cfg.sweep_values;
    std::sort(values.begin(), values.end());
    for (KernelFamily kf : kernels)
        for (SelectionFamily sf : selections)
            for (double v : values) tasks.push_back({kf, sf, v});

    std::vector<CompareRow> rows(tasks.size());
    const int pool = std::min<int>(hardware_threads(), int(tasks.size()));
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < pool; ++t)
        futs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                rows[i] = compare_point(cfg, tasks[i].kf, tasks[i].sf, tasks[i].value);
        }));
    for (auto& f : futs) f.get();

    std::ostringstream csv;
    csv << "kernel,selection,sweep_axis,sweep_value,c_dim,c_scaled,eps,"
           "lambda_sim,zstar_sim,var_sim,skew_sim,kurt_sim,"
           "lambda_lead,zstar_lead,var_lead,lambda_corr,zstar_corr,var_corr,"
           "gap_lambda_corr,gap_zstar_corr,relgap_var_lead,status\n";
    RunStatus rs;
    double max_gap_lambda = 0.0, max_gap_zstar = 0.0, max_relgap_var = 0.0;
    for (const CompareRow& r : rows) {
        ++rs.points;
        const bool cmp = r.has_sim && r.has_corr && !r.sim.diverged;
        const double gl = cmp ? std::abs(r.sim.lambda - r.corr.lambda()) : 0.0;
        const double gz = cmp ? std::abs(r.sim.zstar - r.corr.zstar()) : 0.0;
        const double gv =
            cmp ? std::abs(r.sim.var - r.lead.var()) / std::max(r.lead.var(), 1e-300) : 0.0;
        if (cmp) {
            max_gap_lambda = std::max(max_gap_lambda, gl);
            max_gap_zstar = std::max(max_gap_zstar, gz);
            max_relgap_var = std::max(max_relgap_var, gv);
        }
        if (r.status.rfind("sim_error", 0) == 0 || r.status.rfind("prediction_error", 0) == 0)
            ++rs.failed;
        csv << r.kernel << ',' << r.selection << ',' << to_string(cfg.axis) << ','
            << fmt17(r.sweep_value) << ',' << fmt17(r.c_dim) << ',' << fmt17(r.c_scaled) << ','
            << fmt17(r.eps) << ',' << csv_or_nan(r.has_sim, r.sim.lambda) << ','
            << csv_or_nan(r.has_sim, r.sim.zstar) << ',' << csv_or_nan(r.has_sim, r.sim.var)
            << ',' << csv_or_nan(r.has_sim, r.sim.skew) << ','
            << csv_or_nan(r.has_sim, r.sim.kurt) << ','
            << csv_or_nan(r.has_lead, r.has_lead ? r.lead.lambda() : 0) << ','
            << csv_or_nan(r.has_lead, r.has_lead ? r.lead.zstar() : 0) << ','
            << csv_or_nan(r.has_lead, r.has_lead ? r.lead.var() : 0) << ','
            << csv_or_nan(r.has_corr, r.has_corr ? r.corr.lambda() : 0) << ','
            << csv_or_nan(r.has_corr, r.has_corr ? r.corr.zstar() : 0) << ','
            << csv_or_nan(r.has_corr, r.has_corr ? r.corr.var() : 0) << ','
            << csv_or_nan(cmp, gl) << ',' << csv_or_nan(cmp, gz) << ',' << csv_or_nan(cmp, gv)
            << ',' << r.status << '\n';
    }
    write_file(out_dir + "/compare.csv", csv.str());

    std::ostringstream sum;
    sum << "points: " << rs.points << "\nfailed: " << rs.failed
        << "\nmax |lambda_sim - lambda_corr|: " << fmt17(max_gap_lambda)
        << "\nmax |zstar_sim - zstar_corr|: " << fmt17(max_gap_zstar)
        << "\nmax relative var gap (leading): " << fmt17(max_relgap_var) << "\n";
    write_file(out_dir + "/summary.txt", sum.str());
    return rs;
}

RunStatus run_tipping(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.tipping_z_inits.empty()) throw ConfigError("tipping needs tipping.z_inits");
    write_manifest(cfg, out_dir);
    RunStatus rs;

    ModelParams params = cfg.params;
    const PointSetup base = make_point(cfg, cfg.kernel, cfg.selection, params);
    const CriticalSpeeds crit =
        critical_speeds(cfg.mode, base.solver.kernel, base.sel, params);
    if (!std::isfinite(crit.c_tip))
        throw ConfigError("tipping requires a selection with a finite tipping speed");

    // Dimensional speeds: explicit values or fractions of c_tip.
    std::vector<double> c_dims;
    if (!cfg.tipping_c_fractions.empty())
        for (double f : cfg.tipping_c_fractions) c_dims.push_back(f * crit.c_tip);
    else if (cfg.axis == SweepAxis::C && !cfg.sweep_values.empty())
        c_dims = cfg.sweep_values;
    else
        throw ConfigError("tipping needs tipping.c_fractions or a c sweep");
    std::sort(c_dims.begin(), c_dims.end());

    // One wide fixed arena for every run.
    const double dz = cfg.dz > 0.0 ? cfg.dz : base.sp.eps / 6.0;
    double zmin = -4.0;
    for (double z0 : cfg.tipping_z_inits) zmin = std::min(zmin, 2.0 * z0);
    const Grid grid = cfg.domain_halfwidth > 0.0
                          ? Grid::make(-cfg.domain_halfwidth, 0.35 * cfg.domain_halfwidth, dz)
                          : Grid::make(zmin - 2.0, std::max(1.5, -0.25 * zmin), dz);

    std::ostringstream csv;
    csv << "c_dim,c_scaled,z_init,outcome,final_lag,zstar_stable,zstar_unstable,"
           "c_tip_dim,basin_boundary\n";

    SolveOptions opts = solve_options(cfg);
    opts.allow_expand = false;
    for (double c_dim : c_dims) {
        ModelParams pp = params;
        pp.c = c_dim;
        const ScaledParams sp = to_scaled(pp, cfg.mode);
        SolverSetup setup = base.solver;
        setup.c = sp.c;
        TippingMap map = tipping_sweep(setup, {sp.c}, cfg.tipping_z_inits, grid, opts);
        // analytic overlay (scaled lags)
        double z_s = std::numeric_limits<double>::quiet_NaN();
        double z_u = std::numeric_limits<double>::quiet_NaN();
        try {
            z_s = predict(cfg.mode, setup.kernel, base.sel, sp.eps, sp.c, ApproxOrder::Leading)
                      .zstar0;
            if (cfg.mode == ReproductionMode::Infinitesimal) {
                const auto zu = gradient_inverse_concave(base.sel, sp.c);
                if (zu) z_u = -*zu;
            }
        } catch (const Error&) {
            // beyond tipping: no finite equilibrium to overlay
        }
        for (const TippingCell& cell : map.cells) {
            ++rs.points;
            csv << fmt17(c_dim) << ',' << fmt17(cell.c) << ',' << fmt17(cell.z_init) << ','
                << (cell.converged ? "converged" : "diverged") << ','
                << fmt17(cell.final_lag) << ',' << fmt17(z_s) << ',' << fmt17(z_u) << ','
                << fmt17(crit.c_tip) << ',' << fmt17(map.basin_boundary[0]) << '\n';
        }
    }
    write_file(out_dir + "/tipping.csv", csv.str());
    write_file(out_dir + "/summary.txt",
               "c_tip_dim: " + fmt17(crit.c_tip) + "\npoints: " + std::to_string(rs.points) +
                   "\n");
    return rs;
}

RunStatus run_distribution(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_manifest(cfg, out_dir);
    RunStatus rs;
    rs.points = 1;

    const PointSetup ps = make_point(cfg, cfg.kernel, cfg.selection, cfg.params);
    const int gamma = ps.sp.gamma;
    const double eg = ps.sp.eps_gamma();

    AsymptoticPrediction pred;
    bool have_pred = true;
    try {
        pred = predict(cfg.mode, ps.solver.kernel, ps.sel, ps.sp.eps, ps.sp.c,
                       ApproxOrder::FirstCorrection);
    } catch (const Error&) {
        try {
            pred = predict(cfg.mode, ps.solver.kernel, ps.sel, ps.sp.eps, ps.sp.c,
                           ApproxOrder::Leading);
        } catch (const Error&) {
            have_pred = false;
        }
    }

    const double zs = have_pred ? pred.zstar() : 0.0;
    const double vs = have_pred ? pred.var() : eg;
    const double dz = auto_dz(cfg, ps.sp, std::sqrt(vs));
    Grid grid = cfg.domain_halfwidth > 0.0
                    ? Grid::make(-cfg.domain_halfwidth, cfg.domain_halfwidth, dz)
                    : suggest_grid(zs, vs, dz);

    Distribution init = Distribution::gaussian(grid, zs, vs);
    auto [rep, dist] = solve_equilibrium(std::move(init), ps.solver, solve_options(cfg));
    grid = dist.grid; // may have expanded

    std::string status_F0 = "ok", status_F1 = "ok";
    std::vector<double> F0(grid.n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> F1(grid.n, std::numeric_limits<double>::quiet_NaN());
    Profile prof;
    try {
        if (cfg.mode == ReproductionMode::Asexual) {
            prof = asexual_U0(ps.solver.kernel, ps.sel, ps.sp.c, grid.nodes());
            try {
                asexual_U1(ps.solver.kernel, ps.sel, ps.sp.c, prof);
            } catch (const Error& e) {
                status_F1 = std::string("U1: ") + e.what();
                prof.U1.assign(prof.grid.size(), 0.0);
            }
        } else {
            prof = infinitesimal_U1(ps.sel, ps.sp.c, grid.nodes());
        }
        double mass0 = 0.0, mass1 = 0.0;
        std::vector<double> raw0(grid.n), raw1(grid.n);
        for (int i = 0; i < grid.n; ++i) {
            raw0[i] = std::exp(-prof.U0[i] / eg);
            raw1[i] = std::exp(-prof.U0[i] / eg - (status_F1 == "ok" ? prof.U1[i] : 0.0));
            mass0 += raw0[i];
            mass1 += raw1[i];
        }
        mass0 *= grid.dz();
        mass1 *= grid.dz();
        for (int i = 0; i < grid.n; ++i) {
            F0[i] = raw0[i] / mass0;
            if (status_F1 == "ok") F1[i] = raw1[i] / mass1;
        }
    } catch (const Error& e) {
        status_F0 = std::string("U0: ") + e.what();
        status_F1 = status_F0;
        ++rs.failed;
    }
    (void)gamma;

    std::ostringstream csv;
    csv << "z,F_sim,F0,F1\n";
    for (int i = 0; i < grid.n; ++i)
        csv << fmt17(grid.node(i)) << ',' << fmt17(dist.values[i]) << ',' << fmt17(F0[i]) << ','
            << fmt17(F1[i]) << '\n';
    write_file(out_dir + "/distribution.csv", csv.str());

    // Bulk (|z - z*| <= 3 sd) sup gap of log densities, for the summary.
    auto bulk_gap = [&](const std::vector<double>& F) {
        double gap = 0.0;
        const double sd = std::sqrt(rep.var);
        bool any = false;
        for (int i = 0; i < grid.n; ++i) {
            if (std::abs(grid.node(i) - rep.zstar) > 3.0 * sd) continue;
            if (!(dist.values[i] > 0.0) || !(F[i] > 0.0)) continue;
            gap = std::max(gap, std::abs(std::log(dist.values[i]) - std::log(F[i])));
            any = true;
        }
        return any ? gap : std::numeric_limits<double>::quiet_NaN();
    };
    std::ostringstream sum;
    sum << "converged: " << (rep.converged && !rep.diverged) << "\nlambda_sim: "
        << fmt17(rep.lambda) << "\nzstar_sim: " << fmt17(rep.zstar)
        << "\nvar_sim: " << fmt17(rep.var) << "\nbulk_log_gap_F0: " << fmt17(bulk_gap(F0))
        << "\nbulk_log_gap_F1: " << fmt17(bulk_gap(F1)) << "\nstatus_F0: " << status_F0
        << "\nstatus_F1: " << status_F1;
    const double g0 = bulk_gap(F0);
    if (std::isfinite(g0) && g0 > 0.3) sum << "\nnote: first-order column is a poor fit";
    sum << "\n";
    write_file(out_dir + "/summary.txt", sum.str());
    return rs;
}

RunStatus run_kernels_table(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_manifest(cfg, out_dir);
    RunStatus rs;
    const std::vector<KernelFamily> fams = {KernelFamily::Diffusion, KernelFamily::Uniform,
                                            KernelFamily::Gaussian, KernelFamily::Exponential,
                                            KernelFamily::Gamma};
    std::ostringstream hcsv;
    hcsv << "family,gamma_shape,p,H,H1,H2\n";
    for (KernelFamily f : fams) {
        const KernelSpec k{f, cfg.gamma_shape};
        const double pm = std::min(3.0, 0.95 * p_max(k));
        for (int i = -60; i <= 60; ++i) {
            const double p = pm * i / 60.0;
            const auto d = hamiltonian_derivs(k, p);
            hcsv << to_string(f) << ',' << fmt17(cfg.gamma_shape) << ',' << fmt17(p) << ','
                 << fmt17(hamiltonian(k, p)) << ',' << fmt17(d.first) << ',' << fmt17(d.second)
                 << '\n';
            ++rs.points;
        }
    }
    write_file(out_dir + "/hamiltonians.csv", hcsv.str());

    std::ostringstream lcsv;
    lcsv << "family,gamma_shape,c,L,L1,L2\n";
    for (KernelFamily f : fams) {
        const KernelSpec k{f, cfg.gamma_shape};
        for (int i = 0; i <= 40; ++i) {
            const double c = i * 0.025;
            const Lagrangian L = lagrangian(k, c);
            lcsv << to_string(f) << ',' << fmt17(cfg.gamma_shape) << ',' << fmt17(c) << ','
                 << fmt17(L.value) << ',' << fmt17(L.slope) << ',' << fmt17(L.curvature) << '\n';
            ++rs.points;
        }
    }
    write_file(out_dir + "/lagrangians.csv", lcsv.str());
    return rs;
}

RunStatus run_asymptotics_table(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_manifest(cfg, out_dir);
    RunStatus rs;
    rs.points = 1;
    const PointSetup ps = make_point(cfg, cfg.kernel, cfg.selection, cfg.params);

    std::ostringstream csv;
    csv << "mode,kernel,selection,eps,c_scaled,order,lambda,zstar,var,"
           "lambda_dim,zstar_dim,var_dim,c_star_dim,c_tip_dim,status\n";
    const CriticalSpeeds crit =
        critical_speeds(cfg.mode, ps.solver.kernel, ps.sel, cfg.params);
    for (ApproxOrder order : {ApproxOrder::Leading, ApproxOrder::FirstCorrection}) {
        std::string status = "ok";
        AsymptoticPrediction pred;
        try {
            pred = predict(cfg.mode, ps.solver.kernel, ps.sel, ps.sp.eps, ps.sp.c, order);
        } catch (const Error& e) {
            status = e.what();
            ++rs.failed;
        }
        const EquilibriumReport scaled = pred.to_report();
        const EquilibriumReport dim = from_scaled(scaled, cfg.params, cfg.mode);
        csv << to_string(cfg.mode) << ',' << to_string(cfg.kernel) << ','
            << to_string(cfg.selection) << ',' << fmt17(ps.sp.eps) << ',' << fmt17(ps.sp.c)
            << ',' << (order == ApproxOrder::Leading ? "leading" : "first_correction") << ','
            << fmt17(scaled.lambda) << ',' << fmt17(scaled.zstar) << ',' << fmt17(scaled.var)
            << ',' << fmt17(dim.lambda) << ',' << fmt17(dim.zstar) << ',' << fmt17(dim.var)
            << ',' << fmt17(crit.c_star) << ',' << fmt17(crit.c_tip) << ',' << status << '\n';
    }
    write_file(out_dir + "/asymptotics.csv", csv.str());
    return rs;
}

RunStatus run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_manifest(cfg, out_dir);
    RunStatus rs;
    rs.points = 1;
    const PointSetup ps = make_point(cfg, cfg.kernel, cfg.selection, cfg.params);

    double zs = 0.0, vs = ps.sp.eps_gamma();
    try {
        const AsymptoticPrediction pred = predict(cfg.mode, ps.solver.kernel, ps.sel, ps.sp.eps,
                                                  ps.sp.c, ApproxOrder::FirstCorrection);
        zs = pred.zstar();
        vs = pred.var();
    } catch (const Error&) {
        // beyond tipping or degenerate: start centered on the optimum
    }
    const double dz = auto_dz(cfg, ps.sp, std::sqrt(vs));
    Grid grid = cfg.domain_halfwidth > 0.0
                    ? Grid::make(-cfg.domain_halfwidth, cfg.domain_halfwidth, dz)
                    : suggest_grid(zs, vs, dz);
    Distribution init = Distribution::gaussian(grid, zs, vs);
    EquilibriumReport rep;
    Distribution dist;
    try {
        std::tie(rep, dist) = solve_equilibrium(std::move(init), ps.solver, solve_options(cfg));
    } catch (const NoConvergenceError& e) {
        write_file(out_dir + "/summary.txt", std::string("no convergence: ") + e.what() + "\n");
        ++rs.failed;
        return rs;
    }
    const EquilibriumReport dim = from_scaled(rep, cfg.params, cfg.mode);

    std::ostringstream report;
    report << "mode,kernel,selection,eps,c_scaled,lambda,zstar,var,skew,kurt,rho,"
              "lambda_dim,zstar_dim,var_dim,converged,diverged,iterations,residual,"
              "negative_clips,expansions\n";
    report << to_string(cfg.mode) << ',' << to_string(cfg.kernel) << ','
           << to_string(cfg.selection) << ',' << fmt17(ps.sp.eps) << ',' << fmt17(ps.sp.c) << ','
           << fmt17(rep.lambda) << ',' << fmt17(rep.zstar) << ',' << fmt17(rep.var) << ','
           << fmt17(rep.skew) << ',' << fmt17(rep.kurt) << ',' << fmt17(rep.rho) << ','
           << fmt17(dim.lambda) << ',' << fmt17(dim.zstar) << ',' << fmt17(dim.var) << ','
           << rep.converged << ',' << rep.diverged << ',' << rep.iterations << ','
           << fmt17(rep.residual) << ',' << rep.negative_clips << ',' << rep.expansions << '\n';
    write_file(out_dir + "/report.csv", report.str());

    std::ostringstream csv;
    csv << "z,density\n";
    for (int i = 0; i < dist.grid.n; ++i)
        csv << fmt17(dist.grid.node(i)) << ',' << fmt17(dist.values[i]) << '\n';
    write_file(out_dir + "/distribution.csv", csv.str());
    if (rep.diverged) write_file(out_dir + "/summary.txt", "diverged (tipping regime)\n");
    return rs;
}

} // namespace mopt
