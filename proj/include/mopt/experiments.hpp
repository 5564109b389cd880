#pragma once

#include <string>
#include <vector>

#include "mopt/asymptotics.hpp"
#include "mopt/simulator.hpp"

namespace mopt {

enum class SweepAxis { None, C, Alpha, ZInit, Kernel };

const char* to_string(SweepAxis a);

/// Declarative description of one experiment. Dimensional parameters; the
/// runners convert to scaled units internally. Exactly one sweep axis; the
/// kernels/selections lists enumerate series, not axes.
struct ExperimentConfig {
    ReproductionMode mode = ReproductionMode::Asexual;

    KernelFamily kernel = KernelFamily::Gaussian;
    double gamma_shape = 0.5;
    std::vector<KernelFamily> kernel_series; // empty: just `kernel`

    SelectionFamily selection = SelectionFamily::Quadratic;
    double a6 = 1.0 / 64.0; // dimensional
    double m_inf = 0.5;     // dimensional
    std::vector<SelectionFamily> selection_series; // empty: just `selection`

    ModelParams params;

    SweepAxis axis = SweepAxis::None;
    std::vector<double> sweep_values;

    std::vector<double> tipping_z_inits; // scaled initial lags
    std::vector<double> tipping_c_fractions; // speeds as fractions of c_tip

    // solver overrides (scaled units); zeros mean "choose automatically"
    double dz = 0.0;
    double stop_tol = 1e-9;
    std::int64_t max_iters = 2000000;
    double domain_halfwidth = 0.0;
    double max_zstar = 20.0; // skip simulation when the predicted |z*| exceeds this
    double dt = 0.0;

    std::string out_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parse the key/value + nested-table text format (TOML subset). Throws
/// ConfigError with a line reference on malformed input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical emission; parse(emit_config(cfg)) == cfg.
std::string emit_config(const ExperimentConfig& cfg);

/// Key-by-key schema (types, defaults, meaning); written next to each run's
/// manifest.
std::string config_schema();

/// Built-in experiment presets, named by what they sweep.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

struct RunStatus {
    int points = 0;
    int failed = 0; // unexpected per-point failures (tipping outcomes are data)
};

/// Simulated vs asymptotic sweep table (compare.csv + summary.txt).
RunStatus run_compare(const ExperimentConfig& cfg, const std::string& out_dir);

/// Basin-of-attraction map over (c, z_init) with analytic overlays
/// (tipping.csv).
RunStatus run_tipping(const ExperimentConfig& cfg, const std::string& out_dir);

/// Equilibrium profile against the reconstructions F0 and F1
/// (distribution.csv).
RunStatus run_distribution(const ExperimentConfig& cfg, const std::string& out_dir);

/// H and L tables for the five kernel families (hamiltonians.csv,
/// lagrangians.csv).
RunStatus run_kernels_table(const ExperimentConfig& cfg, const std::string& out_dir);

/// Closed-form predictions and critical speeds for the configured point
/// (asymptotics.csv).
RunStatus run_asymptotics_table(const ExperimentConfig& cfg, const std::string& out_dir);

/// One full equilibrium solve (report.csv + distribution.csv).
RunStatus run_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace mopt
