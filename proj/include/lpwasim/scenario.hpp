#ifndef LPWASIM_SCENARIO_HPP
#define LPWASIM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lpwasim/common.hpp"

namespace lpwasim {

enum class EhSourceKind { RfLinear, RfNonlinear, Solar };
enum class InterferenceScenario { None, CoSf, CoSfInterSf };

std::string to_string(EhSourceKind kind);
std::string to_string(InterferenceScenario sc);
EhSourceKind eh_source_from_string(const std::string& s);
InterferenceScenario interference_from_string(const std::string& s);

/// RF harvesting parameters. The rectifier curve (a, b, max_harvest_w) fits
/// measured hardware; the linear variant keeps only the conversion efficiency.
struct RfEhParams {
    double conversion_efficiency = 0.5; // zeta_RF, linear model only
    int num_beacons = 3;
    double beacon_power_w = 0.1;
    double a = 1500.0;              // charging-rate steepness
    double b = 0.0022;              // turn-on power, watts
    double max_harvest_w = 0.024;   // rectifier saturation
    double beacon_ring_radius_m = -1.0; // < 0: default to radius/2
};

struct SolarEhParams {
    double conversion_efficiency = 0.15;
    double panel_area_m2 = 0.058 * 0.058;
    double irradiance_w_m2 = 1000.0;
};

struct ScenarioConfig {
    int num_nodes = 0;             // U; 0 means derive from density
    double density_per_km2 = 0.0;  // used when num_nodes == 0
    double radius_m = 1000.0;      // R
    int num_slots = 4;             // K
    double duty_cycle = 0.01;      // d
    double bandwidth_hz = 125000.0;
    int num_toa_classes = 6;       // M
    int symbol_count = 10;         // nb, shared by all nodes
    double pathloss_alpha = 3.0;
    double pathloss_alpha_b = 3.0;
    double max_tx_power_w = 0.025118864315095794; // 14 dBm
    double noise_figure_db = 6.0;
    EhSourceKind eh_source = EhSourceKind::Solar;
    RfEhParams rf;
    SolarEhParams solar;
    InterferenceScenario interference = InterferenceScenario::CoSf;
    double cross_class_correlation = 0.1;
    /// Optional explicit M x M class-pair correlation matrix (row-major).
    /// Empty: built from `interference` and `cross_class_correlation`.
    std::vector<double> correlation;
    double sensitivity_dbm = -137.0; // xi_min RSSI gate
    std::uint64_t rng_seed = 1;

    int resolved_num_nodes() const;
    /// Materialize the class-pair correlation matrix for this scenario.
    std::vector<double> correlation_matrix() const;
    void validate() const; // throws ConfigError
};

/// One LPWA node after placement and channel generation. `toa_class` stays -1
/// until the allocator assigns it (or leaves the node gated out).
struct NodeState {
    int id = 0;
    double distance_m = 0.0;
    double angle_rad = 0.0;
    int toa_class = -1;                 // 0-based class index, -1 = inactive
    std::vector<double> gain;           // g_{n,k}, one per slot
    std::vector<double> eh_beacon_gain; // RF only: fading per (beacon, slot), b*K+k
};

double noise_power_w(const ScenarioConfig& cfg);

/// Rayleigh-faded pathloss gain for one link realization.
inline double channel_gain(double fading, double distance_m, double alpha) {
    return fading * std::pow(distance_m, -alpha);
}

std::vector<NodeState> place_nodes(const ScenarioConfig& cfg);
void draw_channels(std::vector<NodeState>& nodes, const ScenarioConfig& cfg);

/// Immutable per-trial world: geometry, channels, exogenous harvest rates.
struct Scenario {
    ScenarioConfig cfg;
    std::vector<NodeState> nodes;
    std::vector<double> beacon_distance_m; // node-major: n * num_beacons + b
    std::vector<double> harvest_rate_w;    // E_n(k), node-major: n * K + k
    std::vector<double> correlation;       // M x M class-pair matrix
    double noise_w = 0.0;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    double harvest_rate(int node, int slot) const {
        return harvest_rate_w[static_cast<std::size_t>(node) * cfg.num_slots + slot];
    }
    /// Correlation between the coded waveforms of two nodes given their
    /// classes. Same node is fully self-correlated; under the no-interference
    /// scenario distinct nodes never correlate regardless of class.
    double node_correlation(int class_a, int class_b, bool same_node) const;

    static Scenario build(const ScenarioConfig& cfg);
};

} // namespace lpwasim

#endif
