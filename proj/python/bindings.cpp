#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mopt/asymptotics.hpp"
#include "mopt/experiments.hpp"
#include "mopt/kernels.hpp"
#include "mopt/scaling.hpp"
#include "mopt/selection.hpp"
#include "mopt/simulator.hpp"

namespace py = pybind11;
using namespace mopt;

PYBIND11_MODULE(_core, m) {
    m.doc() = "travelling-equilibrium solver for adaptation to a moving optimum";

    py::register_exception<Error>(m, "MoptError", PyExc_RuntimeError);

    py::enum_<KernelFamily>(m, "KernelFamily")
        .value("Diffusion", KernelFamily::Diffusion)
        .value("Uniform", KernelFamily::Uniform)
        .value("Gaussian", KernelFamily::Gaussian)
        .value("Exponential", KernelFamily::Exponential)
        .value("Gamma", KernelFamily::Gamma);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init<KernelFamily, double>(), py::arg("family"),
             py::arg("gamma_shape") = 0.5)
        .def_readwrite("family", &KernelSpec::family)
        .def_readwrite("gamma_shape", &KernelSpec::gamma_shape);

    m.def("p_max", &p_max);
    m.def("hamiltonian", &hamiltonian, py::arg("kernel"), py::arg("p"));
    m.def("hamiltonian_derivs", [](const KernelSpec& k, double p) {
        const auto d = hamiltonian_derivs(k, p);
        return py::make_tuple(d.first, d.second);
    });
    m.def("lagrangian", [](const KernelSpec& k, double c) {
        const auto L = lagrangian(k, c);
        return py::make_tuple(L.value, L.slope, L.curvature);
    });
    m.def("conjugacy_speed", &conjugacy_speed);

    py::enum_<SelectionFamily>(m, "SelectionFamily")
        .value("Quadratic", SelectionFamily::Quadratic)
        .value("SuperQuadratic", SelectionFamily::SuperQuadratic)
        .value("Bounded", SelectionFamily::Bounded);

    py::class_<SelectionSpec>(m, "SelectionSpec")
        .def(py::init([](SelectionFamily f, double a6, double m_inf) {
                 return SelectionSpec{f, a6, m_inf};
             }),
             py::arg("family") = SelectionFamily::Quadratic,
             py::arg("a6") = 1.0 / 64.0, py::arg("m_inf") = 0.5)
        .def_readwrite("family", &SelectionSpec::family)
        .def_readwrite("a6", &SelectionSpec::a6)
        .def_readwrite("m_inf", &SelectionSpec::m_inf);

    m.def("m_derivs", [](const SelectionSpec& s, double z) {
        const auto d = m_derivs(s, z);
        return py::make_tuple(d.m, d.m1, d.m2, d.m3);
    });
    m.def("m_inverse_pos", &m_inverse_pos);
    m.def("gradient_inverse_convex", &gradient_inverse_convex);
    m.def("gradient_inverse_concave", &gradient_inverse_concave);
    m.def("sup_m", &sup_m);
    m.def("max_gradient", &max_gradient);

    py::enum_<ReproductionMode>(m, "ReproductionMode")
        .value("Asexual", ReproductionMode::Asexual)
        .value("Infinitesimal", ReproductionMode::Infinitesimal);

    py::enum_<ApproxOrder>(m, "ApproxOrder")
        .value("Simulated", ApproxOrder::Simulated)
        .value("Leading", ApproxOrder::Leading)
        .value("FirstCorrection", ApproxOrder::FirstCorrection);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double beta, double mu0, double alpha, double sigma, double c) {
                 return ModelParams{beta, mu0, alpha, sigma, c};
             }),
             py::arg("beta") = 1.0, py::arg("mu0") = 0.0, py::arg("alpha") = 1.0,
             py::arg("sigma") = 0.1, py::arg("c") = 0.0)
        .def_readwrite("beta", &ModelParams::beta)
        .def_readwrite("mu0", &ModelParams::mu0)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("c", &ModelParams::c);

    py::class_<ScaledParams>(m, "ScaledParams")
        .def_readonly("eps", &ScaledParams::eps)
        .def_readonly("c", &ScaledParams::c)
        .def_readonly("gamma", &ScaledParams::gamma);

    m.def("to_scaled", &to_scaled);
    m.def("scaled_selection", &scaled_selection);

    py::class_<AsymptoticPrediction>(m, "AsymptoticPrediction")
        .def_readonly("lambda0", &AsymptoticPrediction::lambda0)
        .def_readonly("lambda1", &AsymptoticPrediction::lambda1)
        .def_readonly("zstar0", &AsymptoticPrediction::zstar0)
        .def_readonly("zstar1", &AsymptoticPrediction::zstar1)
        .def("lambda_", &AsymptoticPrediction::lambda)
        .def("zstar", &AsymptoticPrediction::zstar)
        .def("var", &AsymptoticPrediction::var);

    m.def("asexual_leading", &asexual_leading);
    m.def("asexual_correction", &asexual_correction);
    m.def("infinitesimal_leading", &infinitesimal_leading);
    m.def("infinitesimal_correction", &infinitesimal_correction);
    m.def("predict", &predict);

    py::class_<CriticalSpeeds>(m, "CriticalSpeeds")
        .def_readonly("c_star", &CriticalSpeeds::c_star)
        .def_readonly("c_tip", &CriticalSpeeds::c_tip);
    m.def("critical_speeds", &critical_speeds, py::arg("mode"), py::arg("kernel"),
          py::arg("selection"), py::arg("params"),
          py::arg("order") = ApproxOrder::FirstCorrection);

    py::class_<Grid>(m, "Grid")
        .def_readonly("z_min", &Grid::z_min)
        .def_readonly("z_max", &Grid::z_max)
        .def_readonly("n", &Grid::n)
        .def("nodes", &Grid::nodes)
        .def_static("make", &Grid::make);

    py::class_<EquilibriumReport>(m, "EquilibriumReport")
        .def_readonly("lambda_", &EquilibriumReport::lambda)
        .def_readonly("zstar", &EquilibriumReport::zstar)
        .def_readonly("var", &EquilibriumReport::var)
        .def_readonly("skew", &EquilibriumReport::skew)
        .def_readonly("kurt", &EquilibriumReport::kurt)
        .def_readonly("rho", &EquilibriumReport::rho)
        .def_readonly("converged", &EquilibriumReport::converged)
        .def_readonly("diverged", &EquilibriumReport::diverged)
        .def_readonly("iterations", &EquilibriumReport::iterations)
        .def_readonly("residual", &EquilibriumReport::residual);

    m.def("from_scaled", &from_scaled);

    m.def(
        "solve_equilibrium",
        [](ReproductionMode mode, const KernelSpec& kernel, const SelectionSpec& sel,
           double eps, double c, double z_lo, double z_hi, double dz, double init_mean,
           double init_var, double stop_tol, std::int64_t max_iters) {
            SolverSetup s{mode, kernel, sel, eps, c};
            const Grid grid = Grid::make(z_lo, z_hi, dz);
            SolveOptions opts;
            opts.stop_tol = stop_tol;
            opts.max_iters = max_iters;
            auto [rep, dist] = solve_equilibrium(
                Distribution::gaussian(grid, init_mean, init_var), s, opts);
            return py::make_tuple(rep, dist.grid.nodes(), dist.values);
        },
        py::arg("mode"), py::arg("kernel"), py::arg("selection"), py::arg("eps"),
        py::arg("c"), py::arg("z_lo"), py::arg("z_hi"), py::arg("dz"),
        py::arg("init_mean") = 0.0, py::arg("init_var") = 0.01,
        py::arg("stop_tol") = 1e-9, py::arg("max_iters") = 2000000);

    m.def("preset_names", &preset_names);
    m.def("run_preset", [](const std::string& name, const std::string& out_dir) {
        const ExperimentConfig cfg = preset(name);
        const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
        RunStatus rs;
        if (name.rfind("tipping", 0) == 0) rs = run_tipping(cfg, dir);
        else if (name.rfind("distribution", 0) == 0) rs = run_distribution(cfg, dir);
        else rs = run_compare(cfg, dir);
        return py::make_tuple(rs.points, rs.failed);
    });
}
