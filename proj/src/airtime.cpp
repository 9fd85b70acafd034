#include "lpwasim/airtime.hpp"

#include <cmath>
#include <sstream>

namespace lpwasim {

ToaSet ToaSet::build(const ScenarioConfig& cfg) {
    ToaSet set;
    set.duty_cycle = cfg.duty_cycle;
    const int m = cfg.num_toa_classes;
    set.toa_s.resize(m);
    set.time_off_s.resize(m);
    set.packet_s.resize(m);
    // LoRa instantiation: class i uses spreading factor 7+i, so the symbol
    // duration 2^(7+i)/BW doubles per class and the whole set follows from the
    // class-0 airtime.
    const double base_symbol_s = std::pow(2.0, 7.0) / cfg.bandwidth_hz;
    const double base_toa = cfg.symbol_count * base_symbol_s;
    double toa = base_toa;
    for (int i = 0; i < m; ++i) {
        set.toa_s[i] = toa;
        set.time_off_s[i] = (1.0 - cfg.duty_cycle) / cfg.duty_cycle * toa;
        set.packet_s[i] = toa / cfg.duty_cycle;
        toa *= 2.0;
    }
    set.slot_s = set.packet_s[0];

    double airtime_sum = 0.0;
    for (double t : set.toa_s) airtime_sum += t;
    if (!(airtime_sum < set.slot_s)) {
        std::ostringstream msg;
        msg << "ToA set infeasible: sum of the " << m << " airtimes (" << airtime_sum
            << " s) must stay below the slot duration (" << set.slot_s
            << " s); lower num_toa_classes or the duty cycle";
        throw ConfigError(msg.str());
    }
    return set;
}

SlotSchedule SlotSchedule::build(const ToaSet& toa, const std::vector<int>& toa_class,
                                 int num_slots) {
    SlotSchedule sched;
    sched.num_slots = num_slots;
    sched.window_s = num_slots * toa.slot_s;
    sched.toa_class = toa_class;
    const int u = static_cast<int>(toa_class.size());
    sched.rho.assign(static_cast<std::size_t>(u) * num_slots, 0);
    sched.attempts.assign(static_cast<std::size_t>(u) * num_slots, 0);
    sched.max_attempts.assign(static_cast<std::size_t>(u), 0.0);
    for (int n = 0; n < u; ++n) {
        const int cls = toa_class[n];
        if (cls < 0) continue;
        const std::int64_t period = toa.period_slots(cls);
        int made = 0;
        for (int k = 0; k < num_slots; ++k) {
            // 1-based slot indexing: class-i nodes fire at slots 2^i, 2*2^i, ...
            const bool tx = (static_cast<std::int64_t>(k) + 1) % period == 0;
            sched.rho[static_cast<std::size_t>(n) * num_slots + k] = tx ? 1 : 0;
            if (tx) ++made;
            sched.attempts[static_cast<std::size_t>(n) * num_slots + k] = made;
        }
        sched.max_attempts[n] =
            toa.duty_cycle * robust_floor(sched.window_s / toa.toa_s[cls]);
    }
    return sched;
}

std::vector<int> SlotSchedule::silent_nodes() const {
    std::vector<int> silent;
    for (int n = 0; n < num_nodes(); ++n)
        if (toa_class[n] >= 0 && attempts_through(n, num_slots - 1) == 0) silent.push_back(n);
    return silent;
}

} // namespace lpwasim
