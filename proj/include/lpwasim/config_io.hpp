#ifndef LPWASIM_CONFIG_IO_HPP
#define LPWASIM_CONFIG_IO_HPP

#include <string>
#include <vector>

#include "lpwasim/allocator.hpp"
#include "lpwasim/keyvalue.hpp"
#include "lpwasim/scenario.hpp"

namespace lpwasim {

inline constexpr int kSchemaVersion = 1;

/// Scenario schema: reads the ScenarioConfig keys out of `kv` (shared with the
/// experiment schema, which layers its own keys on the same file).
ScenarioConfig scenario_from_keyvalues(KeyValueFile& kv);
ScenarioConfig load_scenario_file(const std::string& path);
std::string scenario_to_text(const ScenarioConfig& cfg);

/// One allocator flag combination of an experiment.
struct RunConfig {
    EhSourceKind eh_source = EhSourceKind::Solar;
    InterferenceScenario interference = InterferenceScenario::CoSf;
    ToaMode toa_mode = ToaMode::Unfair;
    EhMode eh_mode = EhMode::Optimal;
    PowerMode power_mode = PowerMode::Cccp;
    bool noma = true;
};

struct ExperimentSpec {
    ScenarioConfig base;
    std::vector<double> densities_per_km2; // sweep axis
    int trials = 50;
    std::vector<RunConfig> configs;
    std::uint64_t seed_base = 1;
    std::string output_path = "results.csv";

    void validate() const;
};

ExperimentSpec load_experiment_file(const std::string& path);
ExperimentSpec experiment_from_keyvalues(KeyValueFile& kv);
std::string experiment_to_text(const ExperimentSpec& spec);

/// Prebaked experiment definitions matching the three headline plots.
ExperimentSpec recipe(const std::string& name);

} // namespace lpwasim

#endif
