#include "lpwasim/config_io.hpp"

#include <charconv>
#include <sstream>

namespace lpwasim {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

ScenarioConfig scenario_from_keyvalues(KeyValueFile& kv) {
    const auto version = kv.get_int("schema_version");
    if (version != kSchemaVersion)
        throw ConfigError(kv.origin() + ": unsupported schema_version " + std::to_string(version));

    ScenarioConfig cfg;
    cfg.num_nodes = static_cast<int>(kv.get_int("num_nodes", 0));
    cfg.density_per_km2 = kv.get_double("density_per_km2", 0.0);
    cfg.radius_m = kv.get_double("radius_m", cfg.radius_m);
    cfg.num_slots = static_cast<int>(kv.get_int("num_slots", cfg.num_slots));
    cfg.duty_cycle = kv.get_double("duty_cycle", cfg.duty_cycle);
    cfg.bandwidth_hz = kv.get_double("bandwidth_hz", cfg.bandwidth_hz);
    cfg.num_toa_classes = static_cast<int>(kv.get_int("num_toa_classes", cfg.num_toa_classes));
    cfg.symbol_count = static_cast<int>(kv.get_int("symbol_count", cfg.symbol_count));
    cfg.pathloss_alpha = kv.get_double("pathloss_alpha", cfg.pathloss_alpha);
    cfg.pathloss_alpha_b = kv.get_double("pathloss_alpha_b", cfg.pathloss_alpha_b);
    if (kv.has("max_tx_power_w") && kv.has("max_tx_power_dbm"))
        throw ConfigError(kv.origin() + ": give max_tx_power_w or max_tx_power_dbm, not both");
    if (kv.has("max_tx_power_dbm"))
        cfg.max_tx_power_w = dbm_to_watts(kv.get_double("max_tx_power_dbm"));
    else
        cfg.max_tx_power_w = kv.get_double("max_tx_power_w", cfg.max_tx_power_w);
    cfg.noise_figure_db = kv.get_double("noise_figure_db", cfg.noise_figure_db);
    cfg.sensitivity_dbm = kv.get_double("sensitivity_dbm", cfg.sensitivity_dbm);
    cfg.eh_source = eh_source_from_string(kv.get_string("eh_source", "solar"));
    cfg.rf.conversion_efficiency = kv.get_double("rf.conversion_efficiency", cfg.rf.conversion_efficiency);
    cfg.rf.num_beacons = static_cast<int>(kv.get_int("rf.num_beacons", cfg.rf.num_beacons));
    cfg.rf.beacon_power_w = kv.get_double("rf.beacon_power_w", cfg.rf.beacon_power_w);
    cfg.rf.a = kv.get_double("rf.a", cfg.rf.a);
    cfg.rf.b = kv.get_double("rf.b", cfg.rf.b);
    cfg.rf.max_harvest_w = kv.get_double("rf.max_harvest_w", cfg.rf.max_harvest_w);
    cfg.rf.beacon_ring_radius_m = kv.get_double("rf.beacon_ring_radius_m", cfg.rf.beacon_ring_radius_m);
    cfg.solar.conversion_efficiency =
        kv.get_double("solar.conversion_efficiency", cfg.solar.conversion_efficiency);
    cfg.solar.panel_area_m2 = kv.get_double("solar.panel_area_m2", cfg.solar.panel_area_m2);
    cfg.solar.irradiance_w_m2 = kv.get_double("solar.irradiance_w_m2", cfg.solar.irradiance_w_m2);
    cfg.interference = interference_from_string(kv.get_string("interference", "co-sf"));
    cfg.cross_class_correlation = kv.get_double("cross_class_correlation", cfg.cross_class_correlation);
    if (kv.has("correlation_matrix")) cfg.correlation = kv.get_double_list("correlation_matrix");
    cfg.rng_seed = kv.get_uint64("rng_seed", cfg.rng_seed);
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    KeyValueFile kv = KeyValueFile::parse_file(path);
    ScenarioConfig cfg = scenario_from_keyvalues(kv);
    kv.reject_unknown_keys();
    cfg.validate();
    return cfg;
}

namespace {

void append_scenario_keys(std::ostringstream& out, const ScenarioConfig& cfg) {
    out << "schema_version = " << kSchemaVersion << "\n";
    if (cfg.num_nodes > 0)
        out << "num_nodes = " << cfg.num_nodes << "\n";
    else
        out << "density_per_km2 = " << fmt(cfg.density_per_km2) << "\n";
    out << "radius_m = " << fmt(cfg.radius_m) << "\n";
    out << "num_slots = " << cfg.num_slots << "\n";
    out << "duty_cycle = " << fmt(cfg.duty_cycle) << "\n";
    out << "bandwidth_hz = " << fmt(cfg.bandwidth_hz) << "\n";
    out << "num_toa_classes = " << cfg.num_toa_classes << "\n";
    out << "symbol_count = " << cfg.symbol_count << "\n";
    out << "pathloss_alpha = " << fmt(cfg.pathloss_alpha) << "\n";
    out << "pathloss_alpha_b = " << fmt(cfg.pathloss_alpha_b) << "\n";
    out << "max_tx_power_w = " << fmt(cfg.max_tx_power_w) << "\n";
    out << "noise_figure_db = " << fmt(cfg.noise_figure_db) << "\n";
    out << "sensitivity_dbm = " << fmt(cfg.sensitivity_dbm) << "\n";
    out << "eh_source = " << to_string(cfg.eh_source) << "\n";
    out << "rf.conversion_efficiency = " << fmt(cfg.rf.conversion_efficiency) << "\n";
    out << "rf.num_beacons = " << cfg.rf.num_beacons << "\n";
    out << "rf.beacon_power_w = " << fmt(cfg.rf.beacon_power_w) << "\n";
    out << "rf.a = " << fmt(cfg.rf.a) << "\n";
    out << "rf.b = " << fmt(cfg.rf.b) << "\n";
    out << "rf.max_harvest_w = " << fmt(cfg.rf.max_harvest_w) << "\n";
    if (cfg.rf.beacon_ring_radius_m >= 0)
        out << "rf.beacon_ring_radius_m = " << fmt(cfg.rf.beacon_ring_radius_m) << "\n";
    out << "solar.conversion_efficiency = " << fmt(cfg.solar.conversion_efficiency) << "\n";
    out << "solar.panel_area_m2 = " << fmt(cfg.solar.panel_area_m2) << "\n";
    out << "solar.irradiance_w_m2 = " << fmt(cfg.solar.irradiance_w_m2) << "\n";
    out << "interference = " << to_string(cfg.interference) << "\n";
    out << "cross_class_correlation = " << fmt(cfg.cross_class_correlation) << "\n";
    if (!cfg.correlation.empty()) {
        out << "correlation_matrix = ";
        for (std::size_t i = 0; i < cfg.correlation.size(); ++i)
            out << (i ? "," : "") << fmt(cfg.correlation[i]);
        out << "\n";
    }
    out << "rng_seed = " << cfg.rng_seed << "\n";
}

} // namespace

std::string scenario_to_text(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "# lpwasim scenario\n";
    append_scenario_keys(out, cfg);
    return out.str();
}

void ExperimentSpec::validate() const {
    if (densities_per_km2.empty()) throw ConfigError("experiment needs at least one density");
    for (double d : densities_per_km2)
        if (d <= 0) throw ConfigError("densities must be > 0");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (configs.empty()) throw ConfigError("experiment needs at least one configuration");
    ScenarioConfig probe = base;
    probe.density_per_km2 = densities_per_km2.front();
    probe.num_nodes = 0;
    probe.validate();
}

ExperimentSpec experiment_from_keyvalues(KeyValueFile& kv) {
    ExperimentSpec spec;
    spec.base = scenario_from_keyvalues(kv);
    spec.densities_per_km2 = kv.get_double_list("densities_per_km2");
    spec.trials = static_cast<int>(kv.get_int("trials", spec.trials));
    spec.seed_base = kv.get_uint64("seed_base", spec.base.rng_seed);
    spec.output_path = kv.get_string("output", spec.output_path);

    std::vector<std::string> sources = kv.get_list("eh_sources");
    if (sources.empty()) sources.push_back(to_string(spec.base.eh_source));
    std::vector<std::string> scenarios = kv.get_list("interference_scenarios");
    if (scenarios.empty()) scenarios.push_back(to_string(spec.base.interference));
    std::vector<std::string> toa_modes = kv.get_list("toa_modes");
    if (toa_modes.empty()) toa_modes.push_back("unfair");
    std::vector<std::string> eh_modes = kv.get_list("eh_modes");
    if (eh_modes.empty()) eh_modes.push_back("optimal");
    std::vector<std::string> power_modes = kv.get_list("power_modes");
    if (power_modes.empty()) power_modes.push_back("cccp");
    std::vector<std::string> noma_flags = kv.get_list("noma");
    if (noma_flags.empty()) noma_flags.push_back("on");

    for (const std::string& src : sources)
        for (const std::string& sc : scenarios)
            for (const std::string& toa : toa_modes)
                for (const std::string& eh : eh_modes)
                    for (const std::string& pw : power_modes)
                        for (const std::string& nm : noma_flags) {
                            RunConfig rc;
                            rc.eh_source = eh_source_from_string(src);
                            rc.interference = interference_from_string(sc);
                            rc.toa_mode = toa_mode_from_string(toa);
                            rc.eh_mode = eh_mode_from_string(eh);
                            rc.power_mode = power_mode_from_string(pw);
                            if (nm == "on")
                                rc.noma = true;
                            else if (nm == "off")
                                rc.noma = false;
                            else
                                throw ConfigError("noma entries must be 'on' or 'off', got '" + nm + "'");
                            spec.configs.push_back(rc);
                        }
    return spec;
}

ExperimentSpec load_experiment_file(const std::string& path) {
    KeyValueFile kv = KeyValueFile::parse_file(path);
    ExperimentSpec spec = experiment_from_keyvalues(kv);
    kv.reject_unknown_keys();
    spec.validate();
    return spec;
}

std::string experiment_to_text(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "# lpwasim experiment\n";
    append_scenario_keys(out, spec.base);
    out << "densities_per_km2 = ";
    for (std::size_t i = 0; i < spec.densities_per_km2.size(); ++i)
        out << (i ? "," : "") << fmt(spec.densities_per_km2[i]);
    out << "\n";
    out << "trials = " << spec.trials << "\n";
    out << "seed_base = " << spec.seed_base << "\n";
    out << "output = " << spec.output_path << "\n";

    // Emit the config axes factored when the config list is a full product;
    // recipes always are.
    auto join = [&](auto&& extract) {
        std::vector<std::string> seen;
        for (const RunConfig& rc : spec.configs) {
            const std::string v = extract(rc);
            bool found = false;
            for (const std::string& s : seen) found |= s == v;
            if (!found) seen.push_back(v);
        }
        std::string joined;
        for (std::size_t i = 0; i < seen.size(); ++i) joined += (i ? "," : "") + seen[i];
        return joined;
    };
    out << "eh_sources = " << join([](const RunConfig& rc) { return to_string(rc.eh_source); }) << "\n";
    out << "interference_scenarios = "
        << join([](const RunConfig& rc) { return to_string(rc.interference); }) << "\n";
    out << "toa_modes = " << join([](const RunConfig& rc) { return to_string(rc.toa_mode); }) << "\n";
    out << "eh_modes = " << join([](const RunConfig& rc) { return to_string(rc.eh_mode); }) << "\n";
    out << "power_modes = " << join([](const RunConfig& rc) { return to_string(rc.power_mode); }) << "\n";
    out << "noma = " << join([](const RunConfig& rc) { return rc.noma ? std::string("on") : std::string("off"); })
        << "\n";
    return out.str();
}

ExperimentSpec recipe(const std::string& name) {
    ExperimentSpec spec;
    spec.base = ScenarioConfig{}; // defaults mirror the headline parameter set
    spec.base.num_nodes = 0;
    spec.base.radius_m = 250.0;
    spec.densities_per_km2 = {100, 163, 264, 430, 698, 1135, 1846, 3000}; // log-spaced
    spec.trials = 50;
    spec.seed_base = 20240901;

    auto product = [&](std::vector<std::string> sources, std::vector<std::string> scenarios,
                       std::vector<std::string> toa, std::vector<std::string> eh,
                       std::vector<std::string> power, std::vector<std::string> noma) {
        for (const auto& src : sources)
            for (const auto& sc : scenarios)
                for (const auto& t : toa)
                    for (const auto& e : eh)
                        for (const auto& p : power)
                            for (const auto& nm : noma) {
                                RunConfig rc;
                                rc.eh_source = eh_source_from_string(src);
                                rc.interference = interference_from_string(sc);
                                rc.toa_mode = toa_mode_from_string(t);
                                rc.eh_mode = eh_mode_from_string(e);
                                rc.power_mode = power_mode_from_string(p);
                                rc.noma = nm == "on";
                                spec.configs.push_back(rc);
                            }
    };
    const std::vector<std::string> sources{"solar", "rf-nonlinear"};
    const std::vector<std::string> scenarios{"none", "co-sf", "co-sf-inter-sf"};
    if (name == "fig1a") {
        spec.output_path = "fig1a.csv";
        product(sources, scenarios, {"unfair"}, {"optimal", "max"}, {"cccp"}, {"on"});
    } else if (name == "fig1b") {
        spec.output_path = "fig1b.csv";
        product(sources, scenarios, {"unfair"}, {"optimal"}, {"cccp", "max"}, {"on", "off"});
    } else if (name == "fig1c") {
        spec.output_path = "fig1c.csv";
        product(sources, scenarios, {"unfair", "fair", "distance"}, {"optimal"}, {"cccp"}, {"on"});
    } else {
        throw ConfigError("unknown recipe '" + name + "' (expected fig1a, fig1b or fig1c)");
    }
    return spec;
}

} // namespace lpwasim
