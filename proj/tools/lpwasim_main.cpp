#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "lpwasim/config_io.hpp"
#include "lpwasim/harness.hpp"
#include "lpwasim/rng.hpp"

namespace {

int cmd_run(const std::string& spec_path, const std::string& out_override, int threads,
            bool quiet, const std::string& dump_schedule, const std::string& dump_allocation) {
    using namespace lpwasim;
    const ExperimentSpec spec = load_experiment_file(spec_path);
    RunnerOptions opts;
    opts.threads = threads;
    if (!quiet) opts.log = [](const std::string& msg) { std::cerr << "[run] " << msg << "\n"; };

    if (!dump_schedule.empty() || !dump_allocation.empty()) {
        // One representative trial: first density, first configuration, trial 0.
        ScenarioConfig cfg = spec.base;
        cfg.num_nodes = 0;
        cfg.density_per_km2 = spec.densities_per_km2.front();
        TrialRun run = run_trial(cfg, spec.configs.front(), trial_seed(spec.seed_base, 0));
        if (!dump_schedule.empty()) write_file(dump_schedule, schedule_to_csv(run.result.schedule));
        if (!dump_allocation.empty())
            write_file(dump_allocation, allocation_to_dump(run.scenario, run.result));
    }

    const RunReport report = run_experiment(spec, opts);
    const std::string out_path = out_override.empty() ? spec.output_path : out_override;
    write_file(out_path, report_to_csv(spec, report));
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!quiet)
        std::cerr << "wrote " << report.points.size() << " rows to " << out_path << " in "
                  << report.wall_seconds << " s\n";
    if (report.any_constraint_violation) {
        std::cerr << "error: at least one trial failed constraint validation\n";
        return 1;
    }
    return 0;
}

int cmd_validate(const std::string& dump_path) {
    const lpwasim::ValidationReport report = lpwasim::validate_allocation_dump(dump_path);
    std::cout << report.summary() << "\n";
    return report.pass() ? 0 : 1;
}

int cmd_recipes(const std::string& name, const std::string& out_path) {
    const lpwasim::ExperimentSpec spec = lpwasim::recipe(name);
    const std::string text = lpwasim::experiment_to_text(spec);
    if (out_path.empty())
        std::cout << text;
    else
        lpwasim::write_file(out_path, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slot-based simulator and resource optimizer for energy-harvesting LPWA "
                 "uplinks with a SIC gateway"};
    app.require_subcommand(1);

    std::string spec_path, out_path, dump_schedule, dump_allocation;
    int threads = 0;
    bool quiet = false;
    CLI::App* run = app.add_subcommand("run", "Run an experiment spec and write the results CSV");
    run->add_option("spec", spec_path, "experiment spec file")->required();
    run->add_option("--out", out_path, "override the spec's output path");
    run->add_option("--threads", threads, "worker threads (default: all cores)");
    run->add_flag("--quiet", quiet, "suppress progress output");
    run->add_option("--dump-schedule", dump_schedule,
                    "write the first trial's transmission schedule CSV here");
    run->add_option("--dump-allocation", dump_allocation,
                    "write the first trial's allocation dump here (see `validate`)");

    std::string dump_path;
    CLI::App* validate = app.add_subcommand("validate", "Check an allocation dump against the "
                                                        "power and energy constraints");
    validate->add_option("dump", dump_path, "allocation dump file")->required();

    std::string recipe_name, recipe_out;
    CLI::App* recipes = app.add_subcommand("recipes", "Print a prebaked experiment spec");
    recipes->add_option("name", recipe_name, "fig1a | fig1b | fig1c")->required();
    recipes->add_option("--out", recipe_out, "write the spec here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(spec_path, out_path, threads, quiet, dump_schedule, dump_allocation);
        if (validate->parsed()) return cmd_validate(dump_path);
        if (recipes->parsed()) return cmd_recipes(recipe_name, recipe_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
