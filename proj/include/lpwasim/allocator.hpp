#ifndef LPWASIM_ALLOCATOR_HPP
#define LPWASIM_ALLOCATOR_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lpwasim/airtime.hpp"
#include "lpwasim/allocation.hpp"
#include "lpwasim/interference.hpp"
#include "lpwasim/scenario.hpp"

namespace lpwasim {

enum class ToaMode { Unfair, Fair, Distance };
enum class EhMode { Optimal, Max };
enum class PowerMode { Cccp, Max };

std::string to_string(ToaMode m);
std::string to_string(EhMode m);
std::string to_string(PowerMode m);
ToaMode toa_mode_from_string(const std::string& s);
EhMode eh_mode_from_string(const std::string& s);
PowerMode power_mode_from_string(const std::string& s);

struct AllocatorOptions {
    ToaMode toa_mode = ToaMode::Unfair;
    EhMode eh_mode = EhMode::Optimal;
    PowerMode power_mode = PowerMode::Cccp;
    bool noma = true;
    int line_search_points = 64;
    int golden_iterations = 48;
    double cccp_rel_tol = 1e-6;
    int cccp_max_outer = 50;
    int pga_max_iter = 400;
    int cccp_extra_starts = 4; // restarts into "node shut off" basins
};

struct ToaAssignment {
    std::vector<int> toa_class;      // per node, -1 = gated out
    std::vector<double> rssi_w;      // received strength at the gating power
    std::vector<double> max_power_w; // gating power P_max per node
    std::vector<int> group_size;     // per class
    int active_count = 0;
};

/// Class group sizes for `active_count` nodes. Unfair splits evenly; fair
/// sizes groups inversely to their packet duration so every class gets equal
/// total airtime. Integerized by largest remainder, leftovers to low classes.
std::vector<int> toa_group_sizes(int active_count, const ToaSet& toa, ToaMode mode);

ToaAssignment assign_toa(const Scenario& sc, const ToaSet& toa, ToaMode mode);

/// --- EH-time rule (one node, one slot) ---

struct EhTimeRule {
    bool transmitting = false;
    double slot_s = 0.0;
    double toa_s = 0.0;          // this node's airtime
    double rate_w = 0.0;         // exogenous harvest rate this slot
    double max_tx_power_w = 0.0;
    int attempts = 0;            // attempts through this slot, inclusive
    double history_j = 0.0;      // energy harvested in all earlier slots
};

struct EhNeighbor {
    double eh_time_s = 0.0;
    double toa_s = 0.0;
};

struct EhDecision {
    double eh_time_s = 0.0;
    EhBranch branch = EhBranch::HarvestOnly;
};

struct LineSearchOptions {
    int grid_points = 64;
    int golden_iterations = 48;
};

/// Picks the EH time for one transmitter given its energy state and the
/// concurrent transmissions. The aggregate overlap against `neighbors` is
/// probed at the window endpoints and midpoint; when it is monotone the
/// closed forms apply, otherwise `slot_objective` (the slot's sum-rate as a
/// function of this node's EH time) is maximized by grid + golden section
/// over (0, window].
EhDecision decide_eh_time(const EhTimeRule& rule, std::span<const EhNeighbor> neighbors,
                          const std::function<double(double)>& slot_objective,
                          const LineSearchOptions& opts);

/// --- per-slot power allocation ---

/// Box-constrained sum-rate instance for one slot, nodes in SIC order.
/// coeff[i*n+j] is the normalized cross gain eta_ij * g_j / noise for j in
/// node i's interference set, zero outside it; coeff[i*n+i] = g_i / noise.
struct SlotPowerProblem {
    int size = 0;
    bool noma = true;
    std::vector<int> node;      // global node ids
    std::vector<double> gain;
    std::vector<double> weight; // airtime / window
    std::vector<double> upper;  // min(max power, available power)
    std::vector<double> coeff;

    double true_objective(std::span<const double> p) const;
    double surrogate(std::span<const double> p, std::span<const double> log2_b_hat,
                     std::span<const double> inv_b_hat) const;
    void surrogate_gradient(std::span<const double> p, std::span<const double> inv_b_hat,
                            std::span<double> grad) const;
    /// 1 + interference(p) per node, and its log2/reciprocal, at p.
    void expansion_terms(std::span<const double> p, std::span<double> log2_b,
                         std::span<double> inv_b) const;
};

struct CccpResult {
    std::vector<double> power;
    SlotDiagnostics diag;
};

/// Concave-convex procedure: repeatedly maximize the tight concave lower
/// bound of the slot sum rate over the power box until the true objective
/// stalls. The trace of true-objective values is nondecreasing.
CccpResult cccp_power(const SlotPowerProblem& prob, const AllocatorOptions& opt);

/// --- full trial ---

struct AllocationResult {
    ToaSet toa;
    ToaAssignment assignment;
    SlotSchedule schedule;
    Allocation allocation;
    bool aborted_no_active = false;
};

/// Three-stage pipeline: assign classes once, then per slot pick EH times and
/// allocate powers, settling the ledger as it goes.
AllocationResult allocate(const Scenario& sc, const AllocatorOptions& opt);

} // namespace lpwasim

#endif
