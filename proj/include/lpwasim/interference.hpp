#ifndef LPWASIM_INTERFERENCE_HPP
#define LPWASIM_INTERFERENCE_HPP

#include <vector>

#include "lpwasim/airtime.hpp"
#include "lpwasim/allocation.hpp"
#include "lpwasim/scenario.hpp"

namespace lpwasim {

/// Overlap (seconds) of two transmissions that start after their respective
/// EH times. Zero once the start offset reaches the shorter airtime.
inline double collision_time_s(double eh_time_a, double eh_time_b, double toa_a, double toa_b) {
    const double shorter = std::min(toa_a, toa_b);
    const double offset = std::abs(eh_time_a - eh_time_b);
    return offset >= shorter ? 0.0 : shorter - offset;
}

/// Transmitting nodes of one slot, sorted by channel gain descending (the SIC
/// decode order); ties broken by node id.
std::vector<int> sic_order(const Scenario& sc, const SlotSchedule& sched, int slot);

/// SINR of the node at position `pos` in `order` under SIC: only weaker, not
/// yet decoded signals interfere. `noma=false` models a plain receiver where
/// every overlapping transmission interferes.
double sinr(const Scenario& sc, const SlotSchedule& sched, const Allocation& alloc,
            const ToaSet& toa, const std::vector<int>& order, int pos, int slot, bool noma);

struct RateReport {
    std::vector<double> node_rate;      // time-averaged, bits/s/Hz
    std::vector<double> inst_rate;      // node-major per slot, bits/s/Hz
    double sum_rate = 0.0;              // objective value
};

RateReport compute_rates(const Scenario& sc, const ToaSet& toa, const SlotSchedule& sched,
                         const Allocation& alloc, bool noma);

} // namespace lpwasim

#endif
