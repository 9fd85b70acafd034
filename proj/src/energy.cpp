#include "lpwasim/energy.hpp"

#include <cmath>

namespace lpwasim {

double psi_nonlinear(double received_w, const RfEhParams& rf) {
    const double sat = rf.max_harvest_w;
    const double sigmoid = sat / (1.0 + std::exp(-rf.a * (received_w - rf.b)));
    const double omega = 1.0 / (1.0 + std::exp(rf.a * rf.b));
    return (sigmoid - sat * omega) / (1.0 - omega);
}

double rf_harvest_rate_w(const Scenario& sc, int node, int slot) {
    const ScenarioConfig& cfg = sc.cfg;
    const int nb = cfg.rf.num_beacons;
    const NodeState& st = sc.nodes[node];
    double rate = 0.0;
    for (int b = 0; b < nb; ++b) {
        const double dist = sc.beacon_distance_m[static_cast<std::size_t>(node) * nb + b];
        const double fading = st.eh_beacon_gain[static_cast<std::size_t>(b) * cfg.num_slots + slot];
        const double received = cfg.rf.beacon_power_w * fading * std::pow(dist, -cfg.pathloss_alpha_b);
        rate += cfg.eh_source == EhSourceKind::RfLinear
                    ? psi_linear(received, cfg.rf.conversion_efficiency)
                    : psi_nonlinear(received, cfg.rf);
    }
    return rate;
}

} // namespace lpwasim
