#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mopt/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_optional = false) {
    auto* cfg = sub->add_option("--config", args.config_path, "experiment config file");
    auto* pre = sub->add_option("--preset", args.preset_name, "built-in preset name");
    sub->add_option("--out", args.out_dir, "output directory (overrides config)");
    cfg->excludes(pre);
    if (!config_optional) {
        // exactly one source of configuration
        sub->callback([sub, &args] {
            if (args.config_path.empty() && args.preset_name.empty())
                throw CLI::ValidationError(sub->get_name() +
                                           ": one of --config or --preset is required");
        });
    }
}

mopt::ExperimentConfig resolve(const CommonArgs& args) {
    mopt::ExperimentConfig cfg;
    if (!args.preset_name.empty()) cfg = mopt::preset(args.preset_name);
    else if (!args.config_path.empty()) cfg = mopt::load_config_file(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

int finish(const mopt::RunStatus& rs) { return rs.failed > 0 ? 2 : 0; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"travelling-equilibrium solver for adaptation to a moving optimum"};
    app.require_subcommand(1);

    CommonArgs kernels_args, asym_args, sim_args, cmp_args, tip_args, dist_args;

    auto* sub_kernels =
        app.add_subcommand("kernels", "tabulate Hamiltonians and Lagrangians");
    add_common(sub_kernels, kernels_args, /*config_optional=*/true);

    auto* sub_asym =
        app.add_subcommand("asymptotics", "closed-form predictions for one parameter set");
    add_common(sub_asym, asym_args);

    auto* sub_sim = app.add_subcommand("simulate", "solve one travelling equilibrium");
    add_common(sub_sim, sim_args);

    auto* sub_cmp =
        app.add_subcommand("compare", "sweep: simulated vs asymptotic equilibria");
    add_common(sub_cmp, cmp_args);

    auto* sub_tip = app.add_subcommand("tipping", "basin map over (c, initial lag)");
    add_common(sub_tip, tip_args);

    auto* sub_dist =
        app.add_subcommand("distribution", "equilibrium profile vs reconstructions");
    add_common(sub_dist, dist_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sub_kernels->parsed()) {
            mopt::ExperimentConfig cfg;
            if (!kernels_args.preset_name.empty() || !kernels_args.config_path.empty())
                cfg = resolve(kernels_args);
            if (!kernels_args.out_dir.empty()) cfg.out_dir = kernels_args.out_dir;
            return finish(mopt::run_kernels_table(cfg, cfg.out_dir));
        }
        if (sub_asym->parsed()) {
            const auto cfg = resolve(asym_args);
            return finish(mopt::run_asymptotics_table(cfg, cfg.out_dir));
        }
        if (sub_sim->parsed()) {
            const auto cfg = resolve(sim_args);
            return finish(mopt::run_simulate(cfg, cfg.out_dir));
        }
        if (sub_cmp->parsed()) {
            const auto cfg = resolve(cmp_args);
            return finish(mopt::run_compare(cfg, cfg.out_dir));
        }
        if (sub_tip->parsed()) {
            const auto cfg = resolve(tip_args);
            return finish(mopt::run_tipping(cfg, cfg.out_dir));
        }
        if (sub_dist->parsed()) {
            const auto cfg = resolve(dist_args);
            return finish(mopt::run_distribution(cfg, cfg.out_dir));
        }
    } catch (const mopt::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
