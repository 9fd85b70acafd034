#ifndef LPWASIM_AIRTIME_HPP
#define LPWASIM_AIRTIME_HPP

#include <cstdint>
#include <vector>

#include "lpwasim/scenario.hpp"

namespace lpwasim {

/// The M doubling times-on-air with their duty-cycle-derived off times and
/// packet durations. Class indices are 0-based; class i has 2^i times the
/// airtime of class 0 and transmits every 2^i slots.
struct ToaSet {
    std::vector<double> toa_s;      // transmission time-on-air per class
    std::vector<double> time_off_s; // mandated silence per class
    std::vector<double> packet_s;   // full packet duration (airtime / duty cycle)
    double slot_s = 0.0;            // slot duration = smallest packet duration
    double duty_cycle = 0.0;

    int num_classes() const { return static_cast<int>(toa_s.size()); }
    std::int64_t period_slots(int toa_class) const { return std::int64_t{1} << toa_class; }

    static ToaSet build(const ScenarioConfig& cfg);
};

/// Per-node transmission grid over the K slots: who transmits when, how many
/// attempts have happened, and the duty-cycle attempt budget.
struct SlotSchedule {
    int num_slots = 0;
    double window_s = 0.0;            // K * slot duration
    std::vector<int> toa_class;       // per node, -1 = never transmits
    std::vector<std::uint8_t> rho;    // node-major K flags
    std::vector<int> attempts;        // node-major cumulative attempt counts
    std::vector<double> max_attempts; // a_n; fractional by definition

    int num_nodes() const { return static_cast<int>(toa_class.size()); }
    bool transmits(int node, int slot) const {
        return rho[static_cast<std::size_t>(node) * num_slots + slot] != 0;
    }
    /// Attempts made through `slot` inclusive.
    int attempts_through(int node, int slot) const {
        return attempts[static_cast<std::size_t>(node) * num_slots + slot];
    }
    /// Nodes whose assigned class never fires within the window (config smell;
    /// the harness warns about these).
    std::vector<int> silent_nodes() const;

    static SlotSchedule build(const ToaSet& toa, const std::vector<int>& toa_class, int num_slots);
};

} // namespace lpwasim

#endif
