#include "lpwasim/interference.hpp"

#include <algorithm>
#include <cmath>

namespace lpwasim {

std::vector<int> sic_order(const Scenario& sc, const SlotSchedule& sched, int slot) {
    std::vector<int> order;
    for (int n = 0; n < sched.num_nodes(); ++n)
        if (sched.transmits(n, slot)) order.push_back(n);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ga = sc.nodes[a].gain[slot];
        const double gb = sc.nodes[b].gain[slot];
        if (ga != gb) return ga > gb;
        return a < b;
    });
    return order;
}

namespace {

double interference_sum(const Scenario& sc, const SlotSchedule& sched, const Allocation& alloc,
                        const ToaSet& toa, const std::vector<int>& order, int pos, int slot,
                        bool noma) {
    const int n = order[pos];
    const int cls_n = sched.toa_class[n];
    const double toa_n = toa.toa_s[cls_n];
    const double eh_n = alloc.eh_time(n, slot);
    double sum = 0.0;
    const std::size_t begin = noma ? static_cast<std::size_t>(pos) + 1 : 0;
    for (std::size_t j = begin; j < order.size(); ++j) {
        if (static_cast<int>(j) == pos) continue;
        const int m = order[j];
        const int cls_m = sched.toa_class[m];
        const double corr = sc.node_correlation(cls_n, cls_m, false);
        if (corr == 0.0) continue;
        const double col = collision_time_s(eh_n, alloc.eh_time(m, slot), toa_n, toa.toa_s[cls_m]);
        if (col == 0.0) continue;
        sum += col / toa_n * corr * alloc.power(m, slot) * sc.nodes[m].gain[slot];
    }
    return sum;
}

} // namespace

double sinr(const Scenario& sc, const SlotSchedule& sched, const Allocation& alloc,
            const ToaSet& toa, const std::vector<int>& order, int pos, int slot, bool noma) {
    const int n = order[pos];
    const double signal = alloc.power(n, slot) * sc.nodes[n].gain[slot];
    const double interference =
        interference_sum(sc, sched, alloc, toa, order, pos, slot, noma);
    return signal / (interference + sc.noise_w);
}

RateReport compute_rates(const Scenario& sc, const ToaSet& toa, const SlotSchedule& sched,
                         const Allocation& alloc, bool noma) {
    const int u = sched.num_nodes();
    const int k_slots = sched.num_slots;
    RateReport report;
    report.node_rate.assign(static_cast<std::size_t>(u), 0.0);
    report.inst_rate.assign(static_cast<std::size_t>(u) * k_slots, 0.0);
    for (int k = 0; k < k_slots; ++k) {
        const std::vector<int> order = sic_order(sc, sched, k);
        for (int pos = 0; pos < static_cast<int>(order.size()); ++pos) {
            const int n = order[pos];
            const double gamma = sinr(sc, sched, alloc, toa, order, pos, k, noma);
            const double rate = std::log2(1.0 + gamma);
            report.inst_rate[static_cast<std::size_t>(n) * k_slots + k] = rate;
            report.node_rate[n] += rate;
        }
    }
    for (int n = 0; n < u; ++n) {
        const int cls = sched.toa_class[n];
        report.node_rate[n] = cls < 0 ? 0.0 : toa.toa_s[cls] / sched.window_s * report.node_rate[n];
        report.sum_rate += report.node_rate[n];
    }
    return report;
}

} // namespace lpwasim
