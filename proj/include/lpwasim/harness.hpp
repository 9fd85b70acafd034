#ifndef LPWASIM_HARNESS_HPP
#define LPWASIM_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lpwasim/allocator.hpp"
#include "lpwasim/config_io.hpp"
#include "lpwasim/interference.hpp"

namespace lpwasim {

struct TrialOutcome {
    std::uint64_t seed = 0;
    double sum_rate = 0.0;
    bool completed = false;
    bool feasible = true;
    std::string error;
};

struct PointResult {
    double density_per_km2 = 0.0;
    RunConfig config;
    std::vector<TrialOutcome> trials;
    double mean_sum_rate = 0.0; // over completed trials
    double stderr_sum_rate = 0.0;
    int completed = 0;
};

struct RunReport {
    std::vector<PointResult> points;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
    bool any_constraint_violation = false;
};

struct RunnerOptions {
    int threads = 0; // 0 = hardware concurrency
    bool validate_each_trial = true;
    std::function<void(const std::string&)> log; // optional progress sink
};

/// One end-to-end trial: scenario, three-stage allocation, rates.
struct TrialRun {
    Scenario scenario;
    AllocationResult result;
    RateReport rates;
};
TrialRun run_trial(ScenarioConfig cfg, const RunConfig& rc, std::uint64_t seed);

/// All trials of one (density, configuration) sweep point, trial i seeded
/// with trial_seed(seed_base, i) so points pair up across configurations.
PointResult run_point(const ScenarioConfig& base, const RunConfig& rc, double density_per_km2,
                      int trials, std::uint64_t seed_base, const RunnerOptions& opts);

RunReport run_experiment(const ExperimentSpec& spec, const RunnerOptions& opts);

/// CSV rows are deterministic for a fixed spec and seed base.
std::string report_to_csv(const ExperimentSpec& spec, const RunReport& report);
void write_file(const std::string& path, const std::string& content);

/// --- independent constraint checking ---

struct AllocationRow {
    int node = 0;
    int slot = 0; // 1-based in dumps
    bool transmitting = false;
    double toa_s = 0.0;
    double eh_time_s = 0.0;
    double harvest_rate_w = 0.0;
    double power_w = 0.0;
};

struct ValidationIssue {
    int node = 0;
    int slot = 0;
    std::string constraint;
    double magnitude = 0.0;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    int rows_checked = 0;
    bool pass() const { return issues.empty(); }
    std::string summary() const;
};

/// Recomputes the power cap, energy causality and EH window constraints from
/// raw rows; independent of the allocator code paths.
ValidationReport validate_rows(const std::vector<AllocationRow>& rows, double max_tx_power_w,
                               double slot_s, int num_slots);
ValidationReport validate_allocation(const Scenario& sc, const AllocationResult& res);

/// --- debug dumps ---

std::string schedule_to_csv(const SlotSchedule& sched);
std::string allocation_to_dump(const Scenario& sc, const AllocationResult& res);
ValidationReport validate_allocation_dump(const std::string& path);

} // namespace lpwasim

#endif
