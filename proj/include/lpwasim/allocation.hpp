#ifndef LPWASIM_ALLOCATION_HPP
#define LPWASIM_ALLOCATION_HPP

#include <string>
#include <vector>

namespace lpwasim {

/// What the EH-time rule decided for one (node, slot).
enum class EhBranch {
    HarvestOnly,   // not transmitting: harvest the whole slot
    TargetClamped, // monotone/flat collision: harvest-to-target clamped to bounds
    MaxWindow,     // collision shrinks with EH time: use the full window
    LineSearch,    // non-monotone collision: one-dimensional search
    ZeroRate,      // no harvestable power while scheduled to transmit
};

struct SlotDiagnostics {
    int cccp_iterations = 0;
    bool cccp_converged = true;
    std::vector<double> objective_trace; // true objective at successive iterates
};

struct AllocationDiagnostics {
    std::vector<SlotDiagnostics> per_slot;
    long branch_counts[5] = {0, 0, 0, 0, 0}; // indexed by EhBranch
    std::vector<std::string> flags;
};

/// Decision variables of one trial: EH time and transmit power per node and
/// slot (node-major), plus solver traces.
struct Allocation {
    int num_slots = 0;
    std::vector<double> eh_time_s;
    std::vector<double> power_w;
    AllocationDiagnostics diag;

    double eh_time(int node, int slot) const {
        return eh_time_s[static_cast<std::size_t>(node) * num_slots + slot];
    }
    double power(int node, int slot) const {
        return power_w[static_cast<std::size_t>(node) * num_slots + slot];
    }
};

} // namespace lpwasim

#endif
