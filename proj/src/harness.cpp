#include "lpwasim/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "lpwasim/energy.hpp"
#include "lpwasim/rng.hpp"

namespace lpwasim {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (std::thread& t : pool) t.join();
}

} // namespace

TrialRun run_trial(ScenarioConfig cfg, const RunConfig& rc, std::uint64_t seed) {
    cfg.eh_source = rc.eh_source;
    cfg.interference = rc.interference;
    cfg.rng_seed = seed;
    TrialRun run;
    run.scenario = Scenario::build(cfg);
    AllocatorOptions opt;
    opt.toa_mode = rc.toa_mode;
    opt.eh_mode = rc.eh_mode;
    opt.power_mode = rc.power_mode;
    opt.noma = rc.noma;
    run.result = allocate(run.scenario, opt);
    run.rates = compute_rates(run.scenario, run.result.toa, run.result.schedule,
                              run.result.allocation, rc.noma);
    return run;
}

PointResult run_point(const ScenarioConfig& base, const RunConfig& rc, double density_per_km2,
                      int trials, std::uint64_t seed_base, const RunnerOptions& opts) {
    PointResult point;
    point.density_per_km2 = density_per_km2;
    point.config = rc;
    point.trials.assign(static_cast<std::size_t>(trials), {});

    ScenarioConfig cfg = base;
    if (density_per_km2 > 0) {
        cfg.num_nodes = 0;
        cfg.density_per_km2 = density_per_km2;
    }

    parallel_for(trials, opts.threads, [&](int t) {
        TrialOutcome& outcome = point.trials[t];
        outcome.seed = trial_seed(seed_base, static_cast<std::uint64_t>(t));
        try {
            TrialRun run = run_trial(cfg, rc, outcome.seed);
            outcome.sum_rate = run.rates.sum_rate;
            outcome.completed = true;
            if (opts.validate_each_trial)
                outcome.feasible = validate_allocation(run.scenario, run.result).pass();
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
    });

    // Trial-order reduction keeps the reported moments independent of how the
    // workers interleaved.
    double sum = 0.0, sum_sq = 0.0;
    for (const TrialOutcome& t : point.trials) {
        if (!t.completed) continue;
        ++point.completed;
        sum += t.sum_rate;
        sum_sq += t.sum_rate * t.sum_rate;
    }
    if (point.completed > 0) point.mean_sum_rate = sum / point.completed;
    if (point.completed > 1) {
        const double var =
            (sum_sq - sum * sum / point.completed) / (point.completed - 1);
        point.stderr_sum_rate = std::sqrt(std::max(0.0, var) / point.completed);
    }
    return point;
}

RunReport run_experiment(const ExperimentSpec& spec, const RunnerOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    const std::int64_t largest_period = std::int64_t{1} << (spec.base.num_toa_classes - 1);
    if (spec.base.num_slots < largest_period)
        report.warnings.push_back(
            "window of " + std::to_string(spec.base.num_slots) + " slots is shorter than the " +
            std::to_string(largest_period) + "-slot period of the largest class; nodes assigned "
            "beyond class " + std::to_string(1 + static_cast<int>(std::log2(spec.base.num_slots))) +
            " never transmit");
    for (double density : spec.densities_per_km2) {
        for (const RunConfig& rc : spec.configs) {
            if (opts.log) {
                std::ostringstream msg;
                msg << "density " << density << " " << to_string(rc.eh_source) << "/"
                    << to_string(rc.interference) << "/" << to_string(rc.toa_mode) << "/"
                    << to_string(rc.eh_mode) << "/" << to_string(rc.power_mode) << "/"
                    << (rc.noma ? "noma" : "no-noma");
                opts.log(msg.str());
            }
            PointResult point = run_point(spec.base, rc, density, spec.trials, spec.seed_base, opts);
            for (const TrialOutcome& t : point.trials) {
                if (!t.completed)
                    report.warnings.push_back("trial seed " + std::to_string(t.seed) +
                                              " failed: " + t.error);
                else if (!t.feasible)
                    report.any_constraint_violation = true;
            }
            report.points.push_back(std::move(point));
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_to_csv(const ExperimentSpec& spec, const RunReport& report) {
    std::ostringstream out;
    out << "# lpwasim-results v" << kSchemaVersion << "\n";
    out << "density,eh_source,interference_scenario,toa_mode,eh_mode,power_mode,noma,"
           "mean_sum_rate_bps_hz,stderr,trials,seed_base\n";
    for (const PointResult& p : report.points) {
        out << fmt(p.density_per_km2) << ',' << to_string(p.config.eh_source) << ','
            << to_string(p.config.interference) << ',' << to_string(p.config.toa_mode) << ','
            << to_string(p.config.eh_mode) << ',' << to_string(p.config.power_mode) << ','
            << (p.config.noma ? "on" : "off") << ',' << fmt(p.mean_sum_rate) << ','
            << fmt(p.stderr_sum_rate) << ',' << p.completed << ',' << spec.seed_base << "\n";
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

// --------------------------------------------------------------------------
// Constraint validation
// --------------------------------------------------------------------------

std::string ValidationReport::summary() const {
    std::ostringstream out;
    if (pass()) {
        out << "OK: " << rows_checked << " rows, no constraint violations";
        return out.str();
    }
    out << issues.size() << " violation(s) in " << rows_checked << " rows";
    for (std::size_t i = 0; i < issues.size() && i < 20; ++i)
        out << "\n  node " << issues[i].node << " slot " << issues[i].slot << " "
            << issues[i].constraint << " by " << issues[i].magnitude;
    if (issues.size() > 20) out << "\n  ...";
    return out.str();
}

ValidationReport validate_rows(const std::vector<AllocationRow>& rows, double max_tx_power_w,
                               double slot_s, int num_slots) {
    ValidationReport report;
    report.rows_checked = static_cast<int>(rows.size());
    constexpr double kRelTol = 1e-9;

    // node -> slot-ordered scan; rows arrive node-major from both producers.
    std::size_t i = 0;
    while (i < rows.size()) {
        const int node = rows[i].node;
        double spent_cum = 0.0;   // sum of rho * p
        double credit_cum = 0.0;  // sum of tau * E / toa
        int expected_slot = 1;
        for (; i < rows.size() && rows[i].node == node; ++i) {
            const AllocationRow& row = rows[i];
            if (row.slot != expected_slot || row.slot > num_slots)
                report.issues.push_back({node, row.slot, "malformed row order", 0.0});
            ++expected_slot;

            const double p = row.power_w;
            if (p < -kRelTol * max_tx_power_w || p > max_tx_power_w * (1.0 + kRelTol))
                report.issues.push_back(
                    {node, row.slot, "C1 power outside [0, max]", std::abs(p - max_tx_power_w)});
            if (!row.transmitting && p != 0.0)
                report.issues.push_back({node, row.slot, "power spent outside a transmission", p});

            const double window = slot_s - (row.transmitting ? row.toa_s : 0.0);
            if (row.eh_time_s < -kRelTol * slot_s || row.eh_time_s > window * (1.0 + kRelTol) + 1e-18)
                report.issues.push_back(
                    {node, row.slot, "C3 EH time outside [0, window]", row.eh_time_s - window});

            if (!(row.toa_s > 0.0)) {
                report.issues.push_back({node, row.slot, "nonpositive airtime", row.toa_s});
                continue;
            }
            credit_cum += row.eh_time_s * row.harvest_rate_w / row.toa_s;
            if (row.transmitting) spent_cum += p;
            if (spent_cum > credit_cum + kRelTol * std::max(1.0, credit_cum))
                report.issues.push_back(
                    {node, row.slot, "C2 spend exceeds harvested budget", spent_cum - credit_cum});
        }
    }
    return report;
}

ValidationReport validate_allocation(const Scenario& sc, const AllocationResult& res) {
    std::vector<AllocationRow> rows;
    const int k_slots = res.schedule.num_slots;
    for (int n = 0; n < sc.num_nodes(); ++n) {
        const int cls = res.assignment.toa_class[n];
        if (cls < 0) continue;
        for (int k = 0; k < k_slots; ++k) {
            AllocationRow row;
            row.node = n;
            row.slot = k + 1;
            row.transmitting = res.schedule.transmits(n, k);
            row.toa_s = res.toa.toa_s[cls];
            row.eh_time_s = res.allocation.eh_time(n, k);
            row.harvest_rate_w = sc.harvest_rate(n, k);
            row.power_w = res.allocation.power(n, k);
            rows.push_back(row);
        }
    }
    ValidationReport report =
        validate_rows(rows, sc.cfg.max_tx_power_w, res.toa.slot_s, k_slots);
    // Gated-out nodes must never spend.
    for (int n = 0; n < sc.num_nodes(); ++n) {
        if (res.assignment.toa_class[n] >= 0) continue;
        for (int k = 0; k < k_slots; ++k)
            if (res.allocation.power(n, k) != 0.0)
                report.issues.push_back({n, k + 1, "inactive node with power", res.allocation.power(n, k)});
    }
    return report;
}

// --------------------------------------------------------------------------
// Dumps
// --------------------------------------------------------------------------

std::string schedule_to_csv(const SlotSchedule& sched) {
    std::ostringstream out;
    out << "# lpwasim-schedule v" << kSchemaVersion << "\n";
    out << "node,slot,transmits,attempts\n";
    for (int n = 0; n < sched.num_nodes(); ++n) {
        if (sched.toa_class[n] < 0) continue;
        for (int k = 0; k < sched.num_slots; ++k)
            out << n << ',' << k + 1 << ',' << (sched.transmits(n, k) ? 1 : 0) << ','
                << sched.attempts_through(n, k) << "\n";
    }
    return out.str();
}

std::string allocation_to_dump(const Scenario& sc, const AllocationResult& res) {
    std::ostringstream out;
    out << "lpwasim-allocation v" << kSchemaVersion << "\n";
    out << "max_tx_power_w = " << fmt(sc.cfg.max_tx_power_w) << "\n";
    out << "slot_s = " << fmt(res.toa.slot_s) << "\n";
    out << "num_slots = " << res.schedule.num_slots << "\n";
    out << "columns = node slot transmits toa_s eh_time_s harvest_rate_w power_w\n";
    for (int n = 0; n < sc.num_nodes(); ++n) {
        const int cls = res.assignment.toa_class[n];
        if (cls < 0) continue;
        for (int k = 0; k < res.schedule.num_slots; ++k) {
            out << n << ' ' << k + 1 << ' ' << (res.schedule.transmits(n, k) ? 1 : 0) << ' '
                << fmt(res.toa.toa_s[cls]) << ' ' << fmt(res.allocation.eh_time(n, k)) << ' '
                << fmt(sc.harvest_rate(n, k)) << ' ' << fmt(res.allocation.power(n, k)) << "\n";
        }
    }
    return out.str();
}

ValidationReport validate_allocation_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("lpwasim-allocation v", 0) != 0)
        throw ConfigError(path + ": not an lpwasim allocation dump");
    const int version = std::stoi(line.substr(std::string("lpwasim-allocation v").size()));
    if (version != kSchemaVersion)
        throw ConfigError(path + ": unsupported dump version " + std::to_string(version));

    double max_tx_power_w = -1.0, slot_s = -1.0;
    int num_slots = -1;
    std::vector<AllocationRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find('=') != std::string::npos) {
            std::istringstream kvline(line);
            std::string key, eq;
            kvline >> key >> eq;
            if (key == "max_tx_power_w") kvline >> max_tx_power_w;
            else if (key == "slot_s") kvline >> slot_s;
            else if (key == "num_slots") kvline >> num_slots;
            // "columns" and any future metadata are informational
            continue;
        }
        AllocationRow row;
        int transmits = 0;
        std::istringstream data(line);
        if (!(data >> row.node >> row.slot >> transmits >> row.toa_s >> row.eh_time_s >>
              row.harvest_rate_w >> row.power_w))
            throw ConfigError(path + ": malformed data row: " + line);
        row.transmitting = transmits != 0;
        rows.push_back(row);
    }
    if (max_tx_power_w < 0 || slot_s < 0 || num_slots < 0)
        throw ConfigError(path + ": missing max_tx_power_w, slot_s or num_slots header");
    return validate_rows(rows, max_tx_power_w, slot_s, num_slots);
}

} // namespace lpwasim
