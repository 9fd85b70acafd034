#include "lpwasim/scenario.hpp"

#include <cmath>
#include <numbers>

#include "lpwasim/energy.hpp"
#include "lpwasim/rng.hpp"

namespace lpwasim {

std::string to_string(EhSourceKind kind) {
    switch (kind) {
    case EhSourceKind::RfLinear: return "rf-linear";
    case EhSourceKind::RfNonlinear: return "rf-nonlinear";
    case EhSourceKind::Solar: return "solar";
    }
    return "?";
}

std::string to_string(InterferenceScenario sc) {
    switch (sc) {
    case InterferenceScenario::None: return "none";
    case InterferenceScenario::CoSf: return "co-sf";
    case InterferenceScenario::CoSfInterSf: return "co-sf-inter-sf";
    }
    return "?";
}

EhSourceKind eh_source_from_string(const std::string& s) {
    if (s == "rf-linear") return EhSourceKind::RfLinear;
    if (s == "rf-nonlinear") return EhSourceKind::RfNonlinear;
    if (s == "solar") return EhSourceKind::Solar;
    throw ConfigError("unknown eh_source '" + s + "' (expected rf-linear, rf-nonlinear or solar)");
}

InterferenceScenario interference_from_string(const std::string& s) {
    if (s == "none") return InterferenceScenario::None;
    if (s == "co-sf") return InterferenceScenario::CoSf;
    if (s == "co-sf-inter-sf") return InterferenceScenario::CoSfInterSf;
    throw ConfigError("unknown interference scenario '" + s +
                      "' (expected none, co-sf or co-sf-inter-sf)");
}

int ScenarioConfig::resolved_num_nodes() const {
    if (num_nodes > 0) return num_nodes;
    const double area_km2 = std::numbers::pi * radius_m * radius_m / 1e6;
    return static_cast<int>(std::llround(density_per_km2 * area_km2));
}

std::vector<double> ScenarioConfig::correlation_matrix() const {
    const int m = num_toa_classes;
    if (!correlation.empty()) {
        if (static_cast<int>(correlation.size()) != m * m)
            throw ConfigError("correlation matrix must have num_toa_classes^2 entries");
        return correlation;
    }
    std::vector<double> xi(static_cast<std::size_t>(m) * m, 0.0);
    const double cross =
        interference == InterferenceScenario::CoSfInterSf ? cross_class_correlation : 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) xi[static_cast<std::size_t>(i) * m + j] = i == j ? 1.0 : cross;
    return xi;
}

void ScenarioConfig::validate() const {
    if (num_nodes < 0) throw ConfigError("num_nodes must be >= 0");
    if (num_nodes == 0 && density_per_km2 < 0)
        throw ConfigError("density_per_km2 must be >= 0");
    if (radius_m <= 0) throw ConfigError("radius_m must be > 0");
    if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) throw ConfigError("duty_cycle must be in (0,1]");
    if (bandwidth_hz <= 0) throw ConfigError("bandwidth_hz must be > 0");
    if (num_toa_classes < 1) throw ConfigError("num_toa_classes must be >= 1");
    if (num_toa_classes > 40) throw ConfigError("num_toa_classes is implausibly large");
    if (symbol_count < 1) throw ConfigError("symbol_count must be >= 1");
    // With doubling airtimes, all classes fit into one slot iff (2^M - 1) d < 1.
    if ((std::pow(2.0, num_toa_classes) - 1.0) * duty_cycle >= 1.0)
        throw ConfigError("airtime ladder does not fit into one slot: (2^num_toa_classes - 1) * "
                          "duty_cycle must stay below 1");
    if (pathloss_alpha <= 0) throw ConfigError("pathloss_alpha must be > 0");
    if (max_tx_power_w <= 0) throw ConfigError("max_tx_power_w must be > 0");
    if (eh_source != EhSourceKind::Solar) {
        if (rf.num_beacons < 1) throw ConfigError("rf.num_beacons must be >= 1");
        if (rf.beacon_power_w < 0) throw ConfigError("rf.beacon_power_w must be >= 0");
        if (rf.max_harvest_w <= 0) throw ConfigError("rf.max_harvest_w must be > 0");
        if (rf.conversion_efficiency < 0 || rf.conversion_efficiency > 1)
            throw ConfigError("rf.conversion_efficiency must be in [0,1]");
    } else {
        if (solar.conversion_efficiency < 0 || solar.conversion_efficiency > 1)
            throw ConfigError("solar.conversion_efficiency must be in [0,1]");
        if (solar.panel_area_m2 < 0 || solar.irradiance_w_m2 < 0)
            throw ConfigError("solar panel area and irradiance must be >= 0");
    }
    const std::vector<double> xi = correlation_matrix();
    const int m = num_toa_classes;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double v = xi[static_cast<std::size_t>(i) * m + j];
            if (i == j && v != 1.0)
                throw ConfigError("correlation matrix diagonal must be 1");
            if (i != j && !(v >= 0.0 && v < 1.0))
                throw ConfigError("cross-class correlation must be in [0,1)");
        }
    }
}

double noise_power_w(const ScenarioConfig& cfg) {
    const double dbm = -174.0 + cfg.noise_figure_db + 10.0 * std::log10(cfg.bandwidth_hz);
    return dbm_to_watts(dbm);
}

std::vector<NodeState> place_nodes(const ScenarioConfig& cfg) {
    const int u = cfg.resolved_num_nodes();
    std::vector<NodeState> nodes;
    nodes.reserve(static_cast<std::size_t>(u));
    Rng rng(cfg.rng_seed, RngStream::Placement);
    // 1 m floor keeps the pathloss finite for nodes dropped on the gateway.
    const double min_distance = std::min(1.0, cfg.radius_m);
    for (int n = 0; n < u; ++n) {
        NodeState node;
        node.id = n;
        node.distance_m = std::max(min_distance, cfg.radius_m * std::sqrt(rng.next_unit()));
        node.angle_rad = 2.0 * std::numbers::pi * rng.next_unit();
        nodes.push_back(std::move(node));
    }
    return nodes;
}

void draw_channels(std::vector<NodeState>& nodes, const ScenarioConfig& cfg) {
    Rng rng(cfg.rng_seed, RngStream::Fading);
    for (NodeState& node : nodes) {
        node.gain.resize(static_cast<std::size_t>(cfg.num_slots));
        for (int k = 0; k < cfg.num_slots; ++k)
            node.gain[k] = channel_gain(rng.next_exponential(), node.distance_m, cfg.pathloss_alpha);
    }
}

double Scenario::node_correlation(int class_a, int class_b, bool same_node) const {
    if (same_node) return 1.0;
    if (cfg.interference == InterferenceScenario::None) return 0.0;
    return correlation[static_cast<std::size_t>(class_a) * cfg.num_toa_classes + class_b];
}

Scenario Scenario::build(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario sc;
    sc.cfg = cfg;
    sc.cfg.num_nodes = cfg.resolved_num_nodes();
    sc.noise_w = noise_power_w(cfg);
    sc.correlation = cfg.correlation_matrix();
    sc.nodes = place_nodes(sc.cfg);

    draw_channels(sc.nodes, sc.cfg);

    const int u = sc.num_nodes();
    const int k_slots = cfg.num_slots;
    if (cfg.eh_source != EhSourceKind::Solar) {
        // Beacons sit on a fixed ring; only the small-scale fading is random.
        const int nb = cfg.rf.num_beacons;
        const double ring =
            cfg.rf.beacon_ring_radius_m >= 0 ? cfg.rf.beacon_ring_radius_m : cfg.radius_m / 2.0;
        sc.beacon_distance_m.resize(static_cast<std::size_t>(u) * nb);
        for (int n = 0; n < u; ++n) {
            for (int b = 0; b < nb; ++b) {
                const double beacon_angle = 2.0 * std::numbers::pi * b / nb;
                const double dx =
                    sc.nodes[n].distance_m * std::cos(sc.nodes[n].angle_rad) - ring * std::cos(beacon_angle);
                const double dy =
                    sc.nodes[n].distance_m * std::sin(sc.nodes[n].angle_rad) - ring * std::sin(beacon_angle);
                sc.beacon_distance_m[static_cast<std::size_t>(n) * nb + b] =
                    std::max(1.0, std::hypot(dx, dy));
            }
        }
        Rng fading(cfg.rng_seed, RngStream::EhFading);
        for (int n = 0; n < u; ++n) {
            sc.nodes[n].eh_beacon_gain.resize(static_cast<std::size_t>(nb) * k_slots);
            for (int b = 0; b < nb; ++b)
                for (int k = 0; k < k_slots; ++k)
                    sc.nodes[n].eh_beacon_gain[static_cast<std::size_t>(b) * k_slots + k] =
                        fading.next_exponential();
        }
    }

    sc.harvest_rate_w.resize(static_cast<std::size_t>(u) * k_slots);
    Rng solar_rng(cfg.rng_seed, RngStream::SolarAngle);
    for (int n = 0; n < u; ++n) {
        for (int k = 0; k < k_slots; ++k) {
            double rate = 0.0;
            if (cfg.eh_source == EhSourceKind::Solar) {
                const double incidence = solar_rng.next_uniform(std::numbers::pi / 2.0);
                rate = solar_harvest_rate_w(cfg.solar, incidence);
            } else {
                rate = rf_harvest_rate_w(sc, n, k);
            }
            sc.harvest_rate_w[static_cast<std::size_t>(n) * k_slots + k] = rate;
        }
    }
    return sc;
}

} // namespace lpwasim
