#ifndef LPWASIM_ENERGY_HPP
#define LPWASIM_ENERGY_HPP

#include <vector>

#include "lpwasim/airtime.hpp"
#include "lpwasim/scenario.hpp"

namespace lpwasim {

/// Nonlinear rectifier curve: sigmoid in received power, shifted so that zero
/// input harvests nothing, saturating at max_harvest_w.
double psi_nonlinear(double received_w, const RfEhParams& rf);

inline double psi_linear(double received_w, double conversion_efficiency) {
    return conversion_efficiency * received_w;
}

/// Harvest rate (watts) of one node in one slot for the RF-beacon models.
double rf_harvest_rate_w(const Scenario& sc, int node, int slot);

inline double solar_harvest_rate_w(const SolarEhParams& p, double incidence_rad) {
    return p.conversion_efficiency * p.panel_area_m2 * p.irradiance_w_m2 *
           std::cos(incidence_rad);
}

/// Harvesting window left in a slot once the scheduled airtime is carved out.
inline double max_eh_time_s(const ToaSet& toa, const SlotSchedule& sched, int node, int slot) {
    const int cls = sched.toa_class[node];
    if (cls < 0 || !sched.transmits(node, slot)) return toa.slot_s;
    return toa.slot_s - toa.toa_s[cls];
}

/// Battery bookkeeping for one trial. Harvested power is credited in airtime
/// units (energy / ToA) and spending is debited per transmission, so the
/// causality constraint reads as cumulative credit >= cumulative debit.
class EnergyLedger {
public:
    EnergyLedger(int num_nodes, int num_slots)
        : num_slots_(num_slots),
          eh_time_s_(static_cast<std::size_t>(num_nodes) * num_slots, 0.0),
          harvest_power_w_(static_cast<std::size_t>(num_nodes) * num_slots, 0.0),
          spend_power_w_(static_cast<std::size_t>(num_nodes) * num_slots, 0.0),
          harvest_cum_w_(static_cast<std::size_t>(num_nodes), 0.0),
          spend_cum_w_(static_cast<std::size_t>(num_nodes), 0.0) {}

    void record_harvest(int node, int slot, double eh_time_s, double rate_w, double toa_s) {
        const std::size_t i = idx(node, slot);
        eh_time_s_[i] = eh_time_s;
        harvest_power_w_[i] = eh_time_s * rate_w / toa_s;
        harvest_cum_w_[node] += harvest_power_w_[i];
    }

    void record_spend(int node, int slot, double power_w) {
        const std::size_t i = idx(node, slot);
        spend_power_w_[i] = power_w;
        spend_cum_w_[node] += power_w;
    }

    /// Available power at `slot`: all credit through this slot minus all debit
    /// from strictly earlier slots. Call after record_harvest(slot) and before
    /// record_spend(slot).
    double available_power_w(int node) const {
        return harvest_cum_w_[node] - spend_cum_w_[node];
    }

    double eh_time_s(int node, int slot) const { return eh_time_s_[idx(node, slot)]; }
    double harvest_power_w(int node, int slot) const { return harvest_power_w_[idx(node, slot)]; }
    double spend_power_w(int node, int slot) const { return spend_power_w_[idx(node, slot)]; }
    double harvested_cum_w(int node) const { return harvest_cum_w_[node]; }
    double spent_cum_w(int node) const { return spend_cum_w_[node]; }

private:
    std::size_t idx(int node, int slot) const {
        return static_cast<std::size_t>(node) * num_slots_ + slot;
    }
    int num_slots_;
    std::vector<double> eh_time_s_;
    std::vector<double> harvest_power_w_;
    std::vector<double> spend_power_w_;
    std::vector<double> harvest_cum_w_;
    std::vector<double> spend_cum_w_;
};

} // namespace lpwasim

#endif
