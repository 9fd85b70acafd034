#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lpwasim/allocator.hpp"
#include "lpwasim/harness.hpp"
#include "lpwasim/rng.hpp"

using namespace lpwasim;

// ---------------------------------------------------------------------------
// ToA assignment
// ---------------------------------------------------------------------------

TEST_CASE("group sizes: unfair splits evenly, leftovers to low classes") {
    ScenarioConfig cfg;
    const ToaSet toa = ToaSet::build(cfg);
    CHECK(toa_group_sizes(60, toa, ToaMode::Unfair) == std::vector<int>{10, 10, 10, 10, 10, 10});
    CHECK(toa_group_sizes(63, toa, ToaMode::Unfair) == std::vector<int>{11, 11, 11, 10, 10, 10});
}

TEST_CASE("group sizes: fair equalizes airtime across classes") {
    ScenarioConfig cfg;
    const ToaSet toa = ToaSet::build(cfg);
    CHECK(toa_group_sizes(63, toa, ToaMode::Fair) == std::vector<int>{32, 16, 8, 4, 2, 1});

    for (int active = 1; active <= 200; ++active) {
        for (ToaMode mode : {ToaMode::Unfair, ToaMode::Fair}) {
            const auto sizes = toa_group_sizes(active, toa, mode);
            int total = 0;
            for (int s : sizes) total += s;
            CHECK(total == active);
        }
        // Equal-airtime property at integer granularity.
        const auto sizes = toa_group_sizes(active, toa, ToaMode::Fair);
        double lo = 1e300, hi = 0.0;
        for (int i = 0; i < 6; ++i) {
            const double airtime = sizes[i] * toa.packet_s[i];
            lo = std::min(lo, airtime);
            hi = std::max(hi, airtime);
        }
        CHECK(hi - lo <= toa.packet_s[5] * (1 + 1e-12));
    }
}

namespace {

Scenario controlled_scenario(int num_nodes, int num_slots = 4) {
    ScenarioConfig cfg;
    cfg.num_nodes = num_nodes;
    cfg.num_slots = num_slots;
    cfg.rng_seed = 77;
    Scenario sc = Scenario::build(cfg);
    // Ample harvest everywhere so the gating power is the hardware cap and
    // RSSI ordering reduces to gain ordering.
    for (double& e : sc.harvest_rate_w) e = 0.5;
    return sc;
}

} // namespace

TEST_CASE("assignment orders by RSSI, strongest to the shortest airtime") {
    Scenario sc = controlled_scenario(12);
    const ToaSet toa = ToaSet::build(sc.cfg);
    for (int n = 0; n < 12; ++n) sc.nodes[n].gain[0] = 1e-9 * (12 - n);
    const ToaAssignment assign = assign_toa(sc, toa, ToaMode::Unfair);
    CHECK(assign.active_count == 12);
    CHECK(assign.group_size == std::vector<int>{2, 2, 2, 2, 2, 2});
    for (int n = 0; n < 12; ++n) CHECK(assign.toa_class[n] == n / 2);
    for (int n = 0; n < 12; ++n)
        CHECK(assign.max_power_w[n] == doctest::Approx(sc.cfg.max_tx_power_w));
}

TEST_CASE("nodes below the sensitivity gate are left out") {
    Scenario sc = controlled_scenario(6);
    const ToaSet toa = ToaSet::build(sc.cfg);
    for (int n = 0; n < 6; ++n) sc.nodes[n].gain[0] = 1e-9;
    sc.nodes[3].gain[0] = 1e-30; // RSSI far below -137 dBm
    const ToaAssignment assign = assign_toa(sc, toa, ToaMode::Unfair);
    CHECK(assign.active_count == 5);
    CHECK(assign.toa_class[3] == -1);

    // Everybody below the gate: graceful empty assignment.
    for (int n = 0; n < 6; ++n) sc.nodes[n].gain[0] = 1e-30;
    const ToaAssignment none = assign_toa(sc, toa, ToaMode::Unfair);
    CHECK(none.active_count == 0);
    for (int n = 0; n < 6; ++n) CHECK(none.toa_class[n] == -1);
}

TEST_CASE("distance mode maps equal-area annuli to classes") {
    Scenario sc = controlled_scenario(6);
    const ToaSet toa = ToaSet::build(sc.cfg);
    for (int n = 0; n < 6; ++n) {
        sc.nodes[n].distance_m = sc.cfg.radius_m * std::sqrt((n + 0.5) / 6.0);
        sc.nodes[n].gain[0] = 1e-9;
    }
    const ToaAssignment assign = assign_toa(sc, toa, ToaMode::Distance);
    for (int n = 0; n < 6; ++n) CHECK(assign.toa_class[n] == n);
    CHECK(assign.group_size == std::vector<int>{1, 1, 1, 1, 1, 1});
}

// ---------------------------------------------------------------------------
// EH-time rule (the four proof branches plus the no-harvest guard)
// ---------------------------------------------------------------------------

namespace {

EhTimeRule base_rule() {
    EhTimeRule rule;
    rule.transmitting = true;
    rule.slot_s = 1.024;
    rule.toa_s = 0.01024;
    rule.rate_w = 0.3;
    rule.max_tx_power_w = 0.025118864315095794;
    rule.attempts = 1;
    rule.history_j = 0.0;
    return rule;
}

const auto no_objective = [](double) -> double {
    FAIL("closed-form branch must not evaluate the objective");
    return 0.0;
};

} // namespace

TEST_CASE("harvest-only slots take the whole slot") {
    EhTimeRule rule = base_rule();
    rule.transmitting = false;
    const EhDecision d = decide_eh_time(rule, {}, no_objective, {});
    CHECK(d.branch == EhBranch::HarvestOnly);
    CHECK(d.eh_time_s == doctest::Approx(1.024).epsilon(1e-15));
}

TEST_CASE("surplus history with nondecreasing collision harvests nothing extra") {
    EhTimeRule rule = base_rule();
    rule.history_j = 1.0; // far more banked energy than one attempt needs
    const double window = rule.slot_s - rule.toa_s;
    // Neighbor transmitting at the end of the window: overlap grows with tau.
    const std::vector<EhNeighbor> nbs{{window, rule.toa_s}};
    const EhDecision d = decide_eh_time(rule, nbs, no_objective, {});
    CHECK(d.branch == EhBranch::TargetClamped);
    CHECK(d.eh_time_s == 0.0);
}

TEST_CASE("deficit with collision-free slot harvests exactly to the power cap") {
    EhTimeRule rule = base_rule();
    rule.rate_w = rule.max_tx_power_w; // target = one airtime
    const EhDecision d = decide_eh_time(rule, {}, no_objective, {});
    CHECK(d.branch == EhBranch::TargetClamped);
    CHECK(d.eh_time_s == doctest::Approx(rule.toa_s).epsilon(1e-12));

    // Deep deficit: the window caps the harvest.
    EhTimeRule starved = base_rule();
    const double window = starved.slot_s - starved.toa_s;
    starved.rate_w = starved.max_tx_power_w * starved.toa_s / (2.0 * window);
    const EhDecision capped = decide_eh_time(starved, {}, no_objective, {});
    CHECK(capped.branch == EhBranch::TargetClamped);
    CHECK(capped.eh_time_s == doctest::Approx(window).epsilon(1e-12));
}

TEST_CASE("shrinking collision pushes the EH time to the window") {
    EhTimeRule rule = base_rule();
    const double window = rule.slot_s - rule.toa_s;
    // Neighbor transmitting right away: moving later only reduces overlap.
    const std::vector<EhNeighbor> nbs{{0.0, rule.toa_s}};
    const EhDecision d = decide_eh_time(rule, nbs, no_objective, {});
    CHECK(d.branch == EhBranch::MaxWindow);
    CHECK(d.eh_time_s == doctest::Approx(window).epsilon(1e-15));
}

TEST_CASE("non-monotone collision falls back to the line search") {
    EhTimeRule rule = base_rule();
    const double window = rule.slot_s - rule.toa_s;
    const std::vector<EhNeighbor> nbs{{window / 2.0, rule.toa_s}};
    const double peak = 0.3;
    int evaluations = 0;
    const EhDecision d = decide_eh_time(
        rule, nbs,
        [&](double t) {
            ++evaluations;
            return -(t - peak) * (t - peak);
        },
        {});
    CHECK(d.branch == EhBranch::LineSearch);
    CHECK(evaluations >= 64);
    CHECK(d.eh_time_s == doctest::Approx(peak).epsilon(1e-6));
    CHECK(d.eh_time_s > 0.0);
    CHECK(d.eh_time_s <= window);
}

TEST_CASE("transmitting with no harvestable power flags and takes the window") {
    EhTimeRule rule = base_rule();
    rule.rate_w = 0.0;
    const EhDecision d = decide_eh_time(rule, {}, no_objective, {});
    CHECK(d.branch == EhBranch::ZeroRate);
    CHECK(d.eh_time_s == doctest::Approx(rule.slot_s - rule.toa_s));
}

// ---------------------------------------------------------------------------
// CCCP power allocation
// ---------------------------------------------------------------------------

namespace {

/// Random slot instance with the SIC (upper-triangular) interference pattern.
SlotPowerProblem random_problem(std::uint64_t seed, int n, bool full_overlap = false) {
    Rng rng(seed, RngStream::Fading);
    SlotPowerProblem prob;
    prob.size = n;
    prob.noma = true;
    prob.node.resize(n);
    prob.gain.resize(n);
    prob.weight.resize(n);
    prob.upper.resize(n);
    prob.coeff.assign(static_cast<std::size_t>(n) * n, 0.0);
    const double noise = 1.981116490576388e-15;
    for (int i = 0; i < n; ++i) {
        prob.node[i] = i;
        const double dist = 100.0 + 900.0 * rng.next_unit();
        prob.gain[i] = rng.next_exponential() * std::pow(dist, -3.0);
        prob.weight[i] = 0.0025 * (1 + rng.next_unit());
        prob.upper[i] = 0.025 * (0.2 + 0.8 * rng.next_unit());
    }
    std::sort(prob.gain.rbegin(), prob.gain.rend());
    for (int i = 0; i < n; ++i) {
        prob.coeff[static_cast<std::size_t>(i) * n + i] = prob.gain[i] / noise;
        for (int j = i + 1; j < n; ++j) {
            const double eta = full_overlap ? 1.0 : rng.next_unit();
            prob.coeff[static_cast<std::size_t>(i) * n + j] = eta * prob.gain[j] / noise;
        }
    }
    return prob;
}

std::vector<double> random_feasible(const SlotPowerProblem& prob, Rng& rng) {
    std::vector<double> p(prob.size);
    for (int i = 0; i < prob.size; ++i) p[i] = prob.upper[i] * rng.next_unit();
    return p;
}

} // namespace

TEST_CASE("surrogate is a tight lower bound on the slot sum rate") {
    Rng rng(404, RngStream::Fading);
    for (int trial = 0; trial < 200; ++trial) {
        const SlotPowerProblem prob = random_problem(1000 + trial, 2 + trial % 5);
        const std::vector<double> p_hat = random_feasible(prob, rng);
        const std::vector<double> p = random_feasible(prob, rng);
        std::vector<double> log2_b(prob.size), inv_b(prob.size);
        prob.expansion_terms(p_hat, log2_b, inv_b);

        const double truth = prob.true_objective(p);
        const double bound = prob.surrogate(p, log2_b, inv_b);
        CHECK(bound <= truth + 1e-9 * std::max(1.0, std::abs(truth)));

        const double at_expansion = prob.surrogate(p_hat, log2_b, inv_b);
        const double truth_at = prob.true_objective(p_hat);
        CHECK(at_expansion == doctest::Approx(truth_at).epsilon(1e-9));
    }
}

TEST_CASE("cccp trace never decreases") {
    const AllocatorOptions opt;
    for (int trial = 0; trial < 40; ++trial) {
        const SlotPowerProblem prob = random_problem(2000 + trial, 2 + trial % 6);
        const CccpResult res = cccp_power(prob, opt);
        REQUIRE(res.diag.objective_trace.size() >= 2);
        for (std::size_t i = 1; i < res.diag.objective_trace.size(); ++i)
            CHECK(res.diag.objective_trace[i] >= res.diag.objective_trace[i - 1] - 1e-9);
        for (int i = 0; i < prob.size; ++i) {
            CHECK(res.power[i] >= -1e-15);
            CHECK(res.power[i] <= prob.upper[i] * (1 + 1e-12));
        }
    }
}

TEST_CASE("no interference: cccp saturates every node") {
    SlotPowerProblem prob = random_problem(31, 5);
    for (int i = 0; i < prob.size; ++i)
        for (int j = i + 1; j < prob.size; ++j)
            prob.coeff[static_cast<std::size_t>(i) * prob.size + j] = 0.0;
    const CccpResult res = cccp_power(prob, AllocatorOptions{});
    for (int i = 0; i < prob.size; ++i)
        CHECK(res.power[i] == doctest::Approx(prob.upper[i]).epsilon(1e-12));
}

TEST_CASE("perfect orthogonality: max power is the fixed point") {
    // Equal weights and full mutual overlap telescope the objective, whose
    // optimum sits at the box corner.
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        SlotPowerProblem prob = random_problem(seed, 6, /*full_overlap=*/true);
        for (int i = 0; i < prob.size; ++i) prob.weight[i] = 0.01;
        const CccpResult res = cccp_power(prob, AllocatorOptions{});
        for (int i = 0; i < prob.size; ++i)
            CHECK(res.power[i] == doctest::Approx(prob.upper[i]).epsilon(1e-6));
    }
}

TEST_CASE("two-node instances are no worse than a dense grid search") {
    // The grid is a lower bound on the optimum: the rate surface can peak at
    // powers well below one grid cell, so cccp may legitimately beat it.
    for (std::uint64_t seed : {100u, 101u, 102u}) {
        SlotPowerProblem prob = random_problem(seed, 2);
        const CccpResult res = cccp_power(prob, AllocatorOptions{});
        const double cccp_obj = prob.true_objective(res.power);

        double best = 0.0;
        std::vector<double> p(2);
        for (int i = 0; i < 200; ++i) {
            p[0] = prob.upper[0] * i / 199.0;
            for (int j = 0; j < 200; ++j) {
                p[1] = prob.upper[1] * j / 199.0;
                best = std::max(best, prob.true_objective(p));
            }
        }
        CHECK(cccp_obj >= best * (1.0 - 0.01));
    }
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

namespace {

ScenarioConfig pipeline_config(int num_nodes, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.num_nodes = num_nodes;
    cfg.radius_m = 400;
    cfg.num_slots = 4;
    cfg.eh_source = EhSourceKind::Solar;
    cfg.interference = InterferenceScenario::CoSf;
    cfg.rng_seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("allocations satisfy every constraint") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Scenario sc = Scenario::build(pipeline_config(40, seed));
        for (EhMode eh : {EhMode::Optimal, EhMode::Max}) {
            for (PowerMode pw : {PowerMode::Cccp, PowerMode::Max}) {
                AllocatorOptions opt;
                opt.eh_mode = eh;
                opt.power_mode = pw;
                const AllocationResult res = allocate(sc, opt);
                const ValidationReport report = validate_allocation(sc, res);
                INFO(report.summary());
                CHECK(report.pass());
                for (int n = 0; n < sc.num_nodes(); ++n)
                    for (int k = 0; k < 4; ++k)
                        if (!res.schedule.transmits(n, k))
                            CHECK(res.allocation.power(n, k) == 0.0);
            }
        }
    }
}

TEST_CASE("allocation is deterministic") {
    const Scenario sc = Scenario::build(pipeline_config(25, 9));
    const AllocationResult a = allocate(sc, AllocatorOptions{});
    const AllocationResult b = allocate(sc, AllocatorOptions{});
    CHECK(a.allocation.eh_time_s == b.allocation.eh_time_s);
    CHECK(a.allocation.power_w == b.allocation.power_w);
}

TEST_CASE("single node, single slot: closed-form EH time and full power") {
    ScenarioConfig cfg = pipeline_config(1, 5);
    cfg.num_slots = 1;
    cfg.num_toa_classes = 1;
    const Scenario sc = Scenario::build(cfg);
    const AllocationResult res = allocate(sc, AllocatorOptions{});
    REQUIRE(res.assignment.active_count == 1);
    const double toa_s = res.toa.toa_s[0];
    const double window = res.toa.slot_s - toa_s;
    const double rate = sc.harvest_rate(0, 0);
    const double target = cfg.max_tx_power_w * toa_s / rate;
    CHECK(res.allocation.eh_time(0, 0) ==
          doctest::Approx(clamp(target, 0.0, window)).epsilon(1e-12));
    const double avail = res.allocation.eh_time(0, 0) * rate / toa_s;
    CHECK(res.allocation.power(0, 0) ==
          doctest::Approx(std::min(cfg.max_tx_power_w, avail)).epsilon(1e-9));
}

TEST_CASE("gated-out networks abort gracefully") {
    ScenarioConfig cfg = pipeline_config(5, 6);
    cfg.sensitivity_dbm = 80.0; // nothing clears an 80 dBm gate
    const Scenario sc = Scenario::build(cfg);
    const AllocationResult res = allocate(sc, AllocatorOptions{});
    CHECK(res.aborted_no_active);
    CHECK_FALSE(res.allocation.diag.flags.empty());
    for (double p : res.allocation.power_w) CHECK(p == 0.0);
}

TEST_CASE("optimal EH time beats or matches max EH with everything else fixed") {
    // Instantaneous-collision economics: with co-SF interference the rule can
    // only improve the seeded trial average.
    double opt_total = 0.0, max_total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Scenario sc = Scenario::build(pipeline_config(36, seed));
        AllocatorOptions opt;
        opt.eh_mode = EhMode::Optimal;
        AllocatorOptions mx;
        mx.eh_mode = EhMode::Max;
        const AllocationResult a = allocate(sc, opt);
        const AllocationResult b = allocate(sc, mx);
        opt_total += compute_rates(sc, a.toa, a.schedule, a.allocation, true).sum_rate;
        max_total += compute_rates(sc, b.toa, b.schedule, b.allocation, true).sum_rate;
    }
    CHECK(opt_total >= max_total * (1 - 1e-9));
}
