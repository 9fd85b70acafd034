#include "lpwasim/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lpwasim/energy.hpp"

namespace lpwasim {

std::string to_string(ToaMode m) {
    switch (m) {
    case ToaMode::Unfair: return "unfair";
    case ToaMode::Fair: return "fair";
    case ToaMode::Distance: return "distance";
    }
    return "?";
}
std::string to_string(EhMode m) { return m == EhMode::Optimal ? "optimal" : "max"; }
std::string to_string(PowerMode m) { return m == PowerMode::Cccp ? "cccp" : "max"; }

ToaMode toa_mode_from_string(const std::string& s) {
    if (s == "unfair") return ToaMode::Unfair;
    if (s == "fair") return ToaMode::Fair;
    if (s == "distance") return ToaMode::Distance;
    throw ConfigError("unknown toa mode '" + s + "' (expected unfair, fair or distance)");
}
EhMode eh_mode_from_string(const std::string& s) {
    if (s == "optimal") return EhMode::Optimal;
    if (s == "max") return EhMode::Max;
    throw ConfigError("unknown eh mode '" + s + "' (expected optimal or max)");
}
PowerMode power_mode_from_string(const std::string& s) {
    if (s == "cccp") return PowerMode::Cccp;
    if (s == "max") return PowerMode::Max;
    throw ConfigError("unknown power mode '" + s + "' (expected cccp or max)");
}

// --------------------------------------------------------------------------
// ToA assignment
// --------------------------------------------------------------------------

std::vector<int> toa_group_sizes(int active_count, const ToaSet& toa, ToaMode mode) {
    const int m = toa.num_classes();
    std::vector<double> quota(m, 0.0);
    if (mode == ToaMode::Unfair) {
        for (int i = 0; i < m; ++i) quota[i] = static_cast<double>(active_count) / m;
    } else {
        double inv_sum = 0.0;
        for (int i = 0; i < m; ++i) inv_sum += 1.0 / toa.packet_s[i];
        for (int i = 0; i < m; ++i) quota[i] = active_count / (toa.packet_s[i] * inv_sum);
    }
    std::vector<int> size(m, 0);
    int assigned = 0;
    for (int i = 0; i < m; ++i) {
        size[i] = static_cast<int>(std::floor(quota[i]));
        assigned += size[i];
    }
    // Largest remainder; ties resolve toward lower (shorter-airtime) classes.
    std::vector<int> by_remainder(m);
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](int a, int b) {
        return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
    });
    for (int r = 0; assigned < active_count; ++r) {
        ++size[by_remainder[r % m]];
        ++assigned;
    }
    return size;
}

ToaAssignment assign_toa(const Scenario& sc, const ToaSet& toa, ToaMode mode) {
    const ScenarioConfig& cfg = sc.cfg;
    const int u = sc.num_nodes();
    const int m = toa.num_classes();
    ToaAssignment out;
    out.toa_class.assign(u, -1);
    out.rssi_w.assign(u, 0.0);
    out.max_power_w.assign(u, 0.0);
    out.group_size.assign(m, 0);

    // Gating power: what the node could spend in slot 1 after harvesting the
    // full window, measured against the shortest airtime (classes are not
    // assigned yet), capped by the hardware limit.
    const double reference_toa = toa.toa_s[0];
    const double window = toa.slot_s - reference_toa;
    for (int n = 0; n < u; ++n) {
        const double budget = window * sc.harvest_rate(n, 0) / reference_toa;
        out.max_power_w[n] = std::min(cfg.max_tx_power_w, std::max(0.0, budget));
        out.rssi_w[n] = out.max_power_w[n] * sc.nodes[n].gain[0];
    }

    const double gate_w = dbm_to_watts(cfg.sensitivity_dbm);
    std::vector<int> active;
    for (int n = 0; n < u; ++n)
        if (out.rssi_w[n] > gate_w) active.push_back(n);
    out.active_count = static_cast<int>(active.size());
    if (active.empty()) return out;

    if (mode == ToaMode::Distance) {
        // Equal-area annuli: the innermost ring maps to the shortest airtime.
        for (int n : active) {
            const double frac = sc.nodes[n].distance_m / cfg.radius_m;
            const int cls = std::min(m - 1, static_cast<int>(std::floor(m * frac * frac)));
            out.toa_class[n] = cls;
            ++out.group_size[cls];
        }
        return out;
    }

    std::stable_sort(active.begin(), active.end(), [&](int a, int b) {
        if (out.rssi_w[a] != out.rssi_w[b]) return out.rssi_w[a] > out.rssi_w[b];
        return a < b;
    });
    out.group_size = toa_group_sizes(out.active_count, toa, mode);
    int cursor = 0;
    for (int cls = 0; cls < m; ++cls)
        for (int c = 0; c < out.group_size[cls]; ++c) out.toa_class[active[cursor++]] = cls;
    return out;
}

// --------------------------------------------------------------------------
// EH-time rule
// --------------------------------------------------------------------------

namespace {

double aggregate_overlap(double eh_time, double toa_s, std::span<const EhNeighbor> neighbors) {
    double sum = 0.0;
    for (const EhNeighbor& nb : neighbors)
        sum += collision_time_s(eh_time, nb.eh_time_s, toa_s, nb.toa_s);
    return sum;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          int iterations, double& best_x, double& best_f) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    auto consider = [&](double x, double v) {
        if (v > best_f) {
            best_f = v;
            best_x = x;
        }
    };
    consider(c, fc);
    consider(d, fd);
    for (int it = 0; it < iterations; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    return best_f;
}

} // namespace

EhDecision decide_eh_time(const EhTimeRule& rule, std::span<const EhNeighbor> neighbors,
                          const std::function<double(double)>& slot_objective,
                          const LineSearchOptions& opts) {
    if (!rule.transmitting) return {rule.slot_s, EhBranch::HarvestOnly};
    const double window = rule.slot_s - rule.toa_s;
    if (rule.rate_w <= 0.0) return {window, EhBranch::ZeroRate};

    // EH time at which cumulative harvest exactly funds max power on every
    // attempt so far; more harvesting buys nothing once the cap binds.
    const double target =
        (rule.max_tx_power_w * rule.toa_s * rule.attempts - rule.history_j) / rule.rate_w;
    const double clamped_target = clamp(target, 0.0, window);

    const double tol = 1e-12 * std::max(rule.slot_s, 1e-30);
    const double c_lo = aggregate_overlap(0.0, rule.toa_s, neighbors);
    const double c_mid = aggregate_overlap(window / 2.0, rule.toa_s, neighbors);
    const double c_hi = aggregate_overlap(window, rule.toa_s, neighbors);
    if (c_lo <= c_mid + tol && c_mid <= c_hi + tol)
        return {clamped_target, EhBranch::TargetClamped};
    if (c_lo + tol >= c_mid && c_mid + tol >= c_hi) return {window, EhBranch::MaxWindow};

    double best_x = window;
    double best_f = slot_objective(window);
    int best_index = opts.grid_points;
    for (int i = 1; i < opts.grid_points; ++i) {
        const double x = window * i / opts.grid_points;
        const double v = slot_objective(x);
        if (v > best_f) {
            best_f = v;
            best_x = x;
            best_index = i;
        }
    }
    if (clamped_target > 0.0) {
        const double v = slot_objective(clamped_target);
        if (v > best_f) {
            best_f = v;
            best_x = clamped_target;
            best_index = -1;
        }
    }
    const double cell = window / opts.grid_points;
    const double center = best_index >= 0 ? best_index * cell : clamped_target;
    const double lo = std::max(cell * 1e-6, center - cell);
    const double hi = std::min(window, center + cell);
    golden_section_max(slot_objective, lo, hi, opts.golden_iterations, best_x, best_f);
    return {best_x, EhBranch::LineSearch};
}

// --------------------------------------------------------------------------
// Per-slot power allocation (CCCP over the concave surrogate)
// --------------------------------------------------------------------------

double SlotPowerProblem::true_objective(std::span<const double> p) const {
    const int n = size;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* row = coeff.data() + static_cast<std::size_t>(i) * n;
        double interference = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) interference += row[j] * p[j];
        const double b = 1.0 + interference;
        const double a = b + row[i] * p[i];
        total += weight[i] * (std::log2(a) - std::log2(b));
    }
    return total;
}

void SlotPowerProblem::expansion_terms(std::span<const double> p, std::span<double> log2_b,
                                       std::span<double> inv_b) const {
    const int n = size;
    for (int i = 0; i < n; ++i) {
        const double* row = coeff.data() + static_cast<std::size_t>(i) * n;
        double interference = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) interference += row[j] * p[j];
        const double b = 1.0 + interference;
        log2_b[i] = std::log2(b);
        inv_b[i] = 1.0 / b;
    }
}

double SlotPowerProblem::surrogate(std::span<const double> p, std::span<const double> log2_b_hat,
                                   std::span<const double> inv_b_hat) const {
    const int n = size;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* row = coeff.data() + static_cast<std::size_t>(i) * n;
        double interference = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) interference += row[j] * p[j];
        const double b = 1.0 + interference;
        const double a = b + row[i] * p[i];
        // log2(b) linearized at the expansion point keeps the bound tight
        // there and below the true rate everywhere else.
        total += weight[i] *
                 (std::log2(a) - log2_b_hat[i] - (b * inv_b_hat[i] - 1.0) / kLn2);
    }
    return total;
}

void SlotPowerProblem::surrogate_gradient(std::span<const double> p,
                                          std::span<const double> inv_b_hat,
                                          std::span<double> grad) const {
    const int n = size;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = coeff.data() + static_cast<std::size_t>(i) * n;
        double interference = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) interference += row[j] * p[j];
        const double a = 1.0 + interference + row[i] * p[i];
        const double t_self = weight[i] / (a * kLn2);
        const double t_cross = t_self - weight[i] * inv_b_hat[i] / kLn2;
        grad[i] += row[i] * t_self;
        for (int j = 0; j < n; ++j)
            if (j != i && row[j] != 0.0) grad[j] += row[j] * t_cross;
    }
}

namespace {

/// Projected gradient ascent over the box [0, upper], run in box-normalized
/// coordinates. Warm-started at the expansion point so the surrogate value
/// never drops below its start.
std::vector<double> maximize_surrogate(const SlotPowerProblem& prob,
                                       const std::vector<double>& p_hat,
                                       const AllocatorOptions& opt) {
    const int n = prob.size;
    std::vector<double> log2_b_hat(n), inv_b_hat(n);
    prob.expansion_terms(p_hat, log2_b_hat, inv_b_hat);

    std::vector<double> q(n, 0.0), p(n, 0.0), grad_p(n, 0.0), grad_q(n, 0.0);
    std::vector<double> cand_q(n), cand_p(n);
    for (int i = 0; i < n; ++i)
        q[i] = prob.upper[i] > 0.0 ? clamp(p_hat[i] / prob.upper[i], 0.0, 1.0) : 0.0;
    auto to_p = [&](const std::vector<double>& qq, std::vector<double>& pp) {
        for (int i = 0; i < n; ++i) pp[i] = qq[i] * prob.upper[i];
    };
    to_p(q, p);
    double value = prob.surrogate(p, log2_b_hat, inv_b_hat);
    prob.surrogate_gradient(p, inv_b_hat, grad_p);
    for (int i = 0; i < n; ++i) grad_q[i] = grad_p[i] * prob.upper[i];

    double step = 0.25;
    int stalled = 0;
    for (int iter = 0; iter < opt.pga_max_iter; ++iter) {
        double directional = 0.0;
        double max_move = 0.0;
        for (int i = 0; i < n; ++i) {
            cand_q[i] = clamp(q[i] + step * grad_q[i], 0.0, 1.0);
            const double move = cand_q[i] - q[i];
            directional += grad_q[i] * move;
            max_move = std::max(max_move, std::abs(move));
        }
        if (directional <= 0.0 || max_move < 1e-15) break; // projected stationary
        to_p(cand_q, cand_p);
        const double cand_value = prob.surrogate(cand_p, log2_b_hat, inv_b_hat);
        if (cand_value >= value + 1e-4 * directional) {
            const double gain = cand_value - value;
            q.swap(cand_q);
            p.swap(cand_p);
            value = cand_value;
            prob.surrogate_gradient(p, inv_b_hat, grad_p);
            for (int i = 0; i < n; ++i) grad_q[i] = grad_p[i] * prob.upper[i];
            step = std::min(step * 1.4, 1e4);
            if (gain <= 1e-12 * std::max(1.0, std::abs(value))) {
                if (++stalled >= 2) break;
            } else {
                stalled = 0;
            }
        } else {
            step *= 0.5;
            if (step < 1e-16) break;
        }
    }
    return p;
}

} // namespace

namespace {

CccpResult cccp_run(const SlotPowerProblem& prob, std::vector<double> p_hat,
                    const AllocatorOptions& opt) {
    CccpResult result;
    result.diag.objective_trace.push_back(prob.true_objective(p_hat));
    result.power = p_hat;
    result.diag.cccp_converged = false;
    for (int outer = 0; outer < opt.cccp_max_outer; ++outer) {
        result.diag.cccp_iterations = outer + 1;
        result.power = maximize_surrogate(prob, p_hat, opt);
        const double objective = prob.true_objective(result.power);
        const double previous = result.diag.objective_trace.back();
        result.diag.objective_trace.push_back(objective);
        if (std::abs(objective - previous) <= opt.cccp_rel_tol * std::max(1.0, std::abs(previous))) {
            result.diag.cccp_converged = true;
            break;
        }
        p_hat = result.power;
    }
    return result;
}

/// Index of the node whose shutdown lifts the true objective the most, or -1.
/// The rate surface is multimodal across "node off" basins and the procedure
/// only descends within one, so converged runs are probed against the
/// single-shutdown neighbors.
int best_shutdown(const SlotPowerProblem& prob, const std::vector<double>& p, double current) {
    const int n = prob.size;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const double* row = prob.coeff.data() + static_cast<std::size_t>(i) * n;
        double interference = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) interference += row[j] * p[j];
        b[i] = 1.0 + interference;
        a[i] = b[i] + row[i] * p[i];
    }
    int best = -1;
    double best_gain = current * 1e-12 + 1e-15;
    for (int j = 0; j < n; ++j) {
        if (p[j] <= 0.0) continue;
        double value = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            const double cross = prob.coeff[static_cast<std::size_t>(i) * n + j] * p[j];
            value += prob.weight[i] * (std::log2(a[i] - cross) - std::log2(b[i] - cross));
        }
        if (value - current > best_gain) {
            best_gain = value - current;
            best = j;
        }
    }
    return best;
}

} // namespace

CccpResult cccp_power(const SlotPowerProblem& prob, const AllocatorOptions& opt) {
    CccpResult best = cccp_run(prob, prob.upper, opt);
    double best_obj = prob.true_objective(best.power);
    for (int round = 0; round < opt.cccp_extra_starts; ++round) {
        const int j = best_shutdown(prob, best.power, best_obj);
        if (j < 0) break;
        std::vector<double> restart = best.power;
        restart[j] = 0.0;
        CccpResult trial = cccp_run(prob, std::move(restart), opt);
        const double trial_obj = prob.true_objective(trial.power);
        if (trial_obj <= best_obj) break;
        best = std::move(trial);
        best_obj = trial_obj;
    }
    return best;
}

// --------------------------------------------------------------------------
// Full trial
// --------------------------------------------------------------------------

namespace {

/// Working state of one slot's EH-time pass: the transmitters in SIC order,
/// their provisional EH times (all start at the full window), the matching
/// budget-capped power estimates, and incremental interference sums so a
/// candidate EH time for one node is scored in O(transmitters).
class SlotEhPass {
public:
    SlotEhPass(const Scenario& sc, const ToaSet& toa, const SlotSchedule& sched,
               const EnergyLedger& ledger, const std::vector<int>& order, int slot, bool noma)
        : sc_(sc), noma_(noma) {
        const int n = static_cast<int>(order.size());
        node_ = order;
        cls_.resize(n);
        toa_s_.resize(n);
        weight_.resize(n);
        gain_.resize(n);
        rate_.resize(n);
        avail_base_.resize(n);
        eh_.resize(n);
        power_.resize(n);
        interference_.assign(n, 0.0);
        noise_ = sc.noise_w;
        p_t_ = sc.cfg.max_tx_power_w;
        for (int i = 0; i < n; ++i) {
            const int id = order[i];
            cls_[i] = sched.toa_class[id];
            toa_s_[i] = toa.toa_s[cls_[i]];
            weight_[i] = toa_s_[i] / sched.window_s;
            gain_[i] = sc.nodes[id].gain[slot];
            rate_[i] = sc.harvest_rate(id, slot);
            avail_base_[i] = ledger.available_power_w(id);
            eh_[i] = toa.slot_s - toa_s_[i]; // start everyone at max EH time
            power_[i] = power_at(i, eh_[i]);
        }
        recompute_interference();
    }

    int count() const { return static_cast<int>(node_.size()); }
    double eh_time(int pos) const { return eh_[pos]; }

    std::vector<EhNeighbor> neighbors_of(int pos) const {
        std::vector<EhNeighbor> nbs;
        nbs.reserve(node_.size() - 1);
        for (int j = 0; j < count(); ++j)
            if (j != pos) nbs.push_back({eh_[j], toa_s_[j]});
        return nbs;
    }

    double power_at(int pos, double eh_time) const {
        const double avail = avail_base_[pos] + eh_time * rate_[pos] / toa_s_[pos];
        return std::min(p_t_, std::max(0.0, avail));
    }

    /// Slot sum rate if node `pos` used `eh_time`, everyone else unchanged.
    double objective_with(int pos, double eh_time) const {
        const int n = count();
        const double p_cand = power_at(pos, eh_time);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double interference;
            if (i == pos) {
                interference = 0.0;
                for (int j = 0; j < n; ++j)
                    if (in_set(pos, j)) interference += pair_term(pos, j, eh_time, eh_[j], power_[j]);
            } else {
                interference = interference_[i];
                if (in_set(i, pos)) {
                    interference -= pair_term(i, pos, eh_[i], eh_[pos], power_[pos]);
                    interference += pair_term(i, pos, eh_[i], eh_time, p_cand);
                    interference = std::max(0.0, interference);
                }
            }
            const double p_i = i == pos ? p_cand : power_[i];
            total += weight_[i] * std::log2(1.0 + p_i * gain_[i] / (noise_ + interference));
        }
        return total;
    }

    void commit(int pos, double eh_time) {
        eh_[pos] = eh_time;
        power_[pos] = power_at(pos, eh_time);
        recompute_interference();
    }

private:
    bool in_set(int i, int j) const { return j != i && (noma_ ? j > i : true); }

    double pair_term(int i, int j, double eh_i, double eh_j, double power_j) const {
        const double corr = sc_.node_correlation(cls_[i], cls_[j], false);
        if (corr == 0.0) return 0.0;
        const double col = collision_time_s(eh_i, eh_j, toa_s_[i], toa_s_[j]);
        return col / toa_s_[i] * corr * power_j * gain_[j];
    }

    void recompute_interference() {
        const int n = count();
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (in_set(i, j)) sum += pair_term(i, j, eh_[i], eh_[j], power_[j]);
            interference_[i] = sum;
        }
    }

    const Scenario& sc_;
    bool noma_;
    double noise_ = 0.0, p_t_ = 0.0;
    std::vector<int> node_, cls_;
    std::vector<double> toa_s_, weight_, gain_, rate_, avail_base_, eh_, power_, interference_;
};

SlotPowerProblem build_slot_problem(const Scenario& sc, const ToaSet& toa,
                                    const SlotSchedule& sched, const Allocation& alloc,
                                    const EnergyLedger& ledger, const std::vector<int>& order,
                                    int slot, bool noma) {
    SlotPowerProblem prob;
    const int n = static_cast<int>(order.size());
    prob.size = n;
    prob.noma = noma;
    prob.node = order;
    prob.gain.resize(n);
    prob.weight.resize(n);
    prob.upper.resize(n);
    prob.coeff.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int id = order[i];
        const int cls = sched.toa_class[id];
        prob.gain[i] = sc.nodes[id].gain[slot];
        prob.weight[i] = toa.toa_s[cls] / sched.window_s;
        prob.upper[i] = std::min(sc.cfg.max_tx_power_w, std::max(0.0, ledger.available_power_w(id)));
    }
    for (int i = 0; i < n; ++i) {
        const int id_i = order[i];
        const int cls_i = sched.toa_class[id_i];
        double* row = prob.coeff.data() + static_cast<std::size_t>(i) * n;
        row[i] = prob.gain[i] / sc.noise_w;
        const int begin = noma ? i + 1 : 0;
        for (int j = begin; j < n; ++j) {
            if (j == i) continue;
            const int id_j = order[j];
            const int cls_j = sched.toa_class[id_j];
            const double corr = sc.node_correlation(cls_i, cls_j, false);
            if (corr == 0.0) continue;
            const double col = collision_time_s(alloc.eh_time(id_i, slot), alloc.eh_time(id_j, slot),
                                                toa.toa_s[cls_i], toa.toa_s[cls_j]);
            if (col == 0.0) continue;
            row[j] = col / toa.toa_s[cls_i] * corr * prob.gain[j] / sc.noise_w;
        }
    }
    return prob;
}

} // namespace

AllocationResult allocate(const Scenario& sc, const AllocatorOptions& opt) {
    AllocationResult res;
    res.toa = ToaSet::build(sc.cfg);
    res.assignment = assign_toa(sc, res.toa, opt.toa_mode);

    const int u = sc.num_nodes();
    const int k_slots = sc.cfg.num_slots;
    res.schedule = SlotSchedule::build(res.toa, res.assignment.toa_class, k_slots);
    res.allocation.num_slots = k_slots;
    res.allocation.eh_time_s.assign(static_cast<std::size_t>(u) * k_slots, 0.0);
    res.allocation.power_w.assign(static_cast<std::size_t>(u) * k_slots, 0.0);
    if (res.assignment.active_count == 0) {
        res.aborted_no_active = true;
        res.allocation.diag.flags.push_back("no node clears the sensitivity gate");
        return res;
    }

    EnergyLedger ledger(u, k_slots);
    std::vector<double> history_j(u, 0.0); // harvested energy per node so far
    const LineSearchOptions ls{opt.line_search_points, opt.golden_iterations};

    for (int k = 0; k < k_slots; ++k) {
        const std::vector<int> order = sic_order(sc, res.schedule, k);

        // EH times. Non-transmitters (and gated-out nodes) harvest the whole
        // slot; transmitters follow the rule or take the full window.
        auto set_eh = [&](int node, double value) {
            res.allocation.eh_time_s[static_cast<std::size_t>(node) * k_slots + k] = value;
        };
        for (int n = 0; n < u; ++n)
            if (!res.schedule.transmits(n, k)) {
                set_eh(n, res.toa.slot_s);
                if (res.assignment.toa_class[n] >= 0)
                    ++res.allocation.diag.branch_counts[static_cast<int>(EhBranch::HarvestOnly)];
            }
        if (opt.eh_mode == EhMode::Max) {
            for (int n : order) set_eh(n, max_eh_time_s(res.toa, res.schedule, n, k));
        } else if (!order.empty()) {
            SlotEhPass pass(sc, res.toa, res.schedule, ledger, order, k, opt.noma);
            for (int pos = 0; pos < pass.count(); ++pos) {
                const int id = order[pos];
                const int cls = res.schedule.toa_class[id];
                EhTimeRule rule;
                rule.transmitting = true;
                rule.slot_s = res.toa.slot_s;
                rule.toa_s = res.toa.toa_s[cls];
                rule.rate_w = sc.harvest_rate(id, k);
                rule.max_tx_power_w = sc.cfg.max_tx_power_w;
                rule.attempts = res.schedule.attempts_through(id, k);
                rule.history_j = history_j[id];
                const std::vector<EhNeighbor> nbs = pass.neighbors_of(pos);
                const EhDecision decision = decide_eh_time(
                    rule, nbs, [&](double t) { return pass.objective_with(pos, t); }, ls);
                if (decision.branch == EhBranch::ZeroRate)
                    res.allocation.diag.flags.push_back(
                        "node " + std::to_string(id) + " slot " + std::to_string(k + 1) +
                        ": transmitting with no harvestable power");
                ++res.allocation.diag.branch_counts[static_cast<int>(decision.branch)];
                pass.commit(pos, decision.eh_time_s);
                set_eh(id, decision.eh_time_s);
            }
        }

        for (int n = 0; n < u; ++n) {
            const int cls = res.assignment.toa_class[n];
            if (cls < 0) continue;
            const double eh = res.allocation.eh_time(n, k);
            const double rate = sc.harvest_rate(n, k);
            ledger.record_harvest(n, k, eh, rate, res.toa.toa_s[cls]);
            history_j[n] += eh * rate;
        }

        // Powers for this slot's transmitters.
        SlotDiagnostics slot_diag;
        if (!order.empty()) {
            const SlotPowerProblem prob = build_slot_problem(sc, res.toa, res.schedule,
                                                             res.allocation, ledger, order, k,
                                                             opt.noma);
            std::vector<double> power;
            if (opt.power_mode == PowerMode::Cccp) {
                CccpResult cccp = cccp_power(prob, opt);
                power = std::move(cccp.power);
                slot_diag = std::move(cccp.diag);
                if (!slot_diag.cccp_converged)
                    res.allocation.diag.flags.push_back("cccp hit the iteration cap in slot " +
                                                        std::to_string(k + 1));
            } else {
                power = prob.upper;
            }
            for (int i = 0; i < prob.size; ++i) {
                const int id = order[i];
                res.allocation.power_w[static_cast<std::size_t>(id) * k_slots + k] = power[i];
                ledger.record_spend(id, k, power[i]);
            }
        }
        res.allocation.diag.per_slot.push_back(std::move(slot_diag));
    }
    return res;
}

} // namespace lpwasim
