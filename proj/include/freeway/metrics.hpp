#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "freeway/errors.hpp"
#include "freeway/fundamental.hpp"
#include "freeway/network.hpp"

namespace freeway {

/// Links contributing to throughput. `leaking` are mainline links upstream of
/// a merge, of whose outflow a (1 - beta) share leaves via an unmodeled
/// offramp; `exits` leave the network at demand.
///
/// Simple freeway: leaking = {1..N-1}, exits = {N}. Diverging freeway:
/// leaking = {-M..-1} u {1..N-1} u {N+1..2N-1}, exits = {N, 2N}; link 0 feeds
/// the diverge and leaks nothing.
struct ThroughputSets {
    std::vector<std::size_t> leaking; // state slots
    std::vector<std::size_t> exits;   // state slots
};

inline ThroughputSets throughput_sets(const NetworkSpec& spec) {
    ThroughputSets s;
    for (const auto& j : spec.merges) s.leaking.push_back(j.mainline);
    std::sort(s.leaking.begin(), s.leaking.end());
    s.exits = spec.exits;
    return s;
}

/// W = sum_F (1-beta) min{D(x_i), (alpha/beta) S(x_{i+1})} + sum_E D(x_i).
inline double throughput(const NetworkSpec& spec, const StateVector& x) {
    if (x.size() != spec.n) throw ContractError("throughput: state dimension mismatch");
    const LinkParams& p = spec.params;
    double w = 0.0;
    for (const auto& j : spec.merges)
        w += (1.0 - p.beta) * std::min(demand(p, x[j.mainline]), p.alpha / p.beta * supply(p, x[j.downstream]));
    for (std::size_t e : spec.exits) w += demand(p, x[e]);
    return w;
}

/// Throughput from a recorded outflow vector (same value as throughput(x)
/// for the state that produced the flows).
inline double throughput_from_flows(const NetworkSpec& spec, const std::vector<double>& flows) {
    if (flows.size() != spec.n) throw ContractError("throughput: flow dimension mismatch");
    double w = 0.0;
    for (const auto& j : spec.merges) w += (1.0 - spec.params.beta) * flows[j.mainline];
    for (std::size_t e : spec.exits) w += flows[e];
    return w;
}

namespace detail {
inline void require_nonempty(const Trajectory& traj, const char* what) {
    if (traj.steps.empty()) throw ContractError(std::string(what) + ": empty trajectory");
}
} // namespace detail

inline std::vector<double> throughput_series(const Trajectory& traj) {
    std::vector<double> w;
    w.reserve(traj.steps.size());
    for (const auto& r : traj.steps) w.push_back(throughput_from_flows(traj.spec, r.flows));
    return w;
}

/// TTT[T] = sum over t = 0..T and all links of x_i[t].
inline double total_travel_time(const Trajectory& traj) {
    detail::require_nonempty(traj, "total_travel_time");
    double total = 0.0;
    for (const auto& r : traj.steps)
        for (double a : r.x) total += a;
    return total;
}

inline double total_throughput(const Trajectory& traj) {
    detail::require_nonempty(traj, "total_throughput");
    double total = 0.0;
    for (double w : throughput_series(traj)) total += w;
    return total;
}

inline double discounted_throughput(const Trajectory& traj, double gamma) {
    detail::require_nonempty(traj, "discounted_throughput");
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("discounted_throughput: gamma must lie in (0, 1)");
    double total = 0.0;
    double weight = 1.0;
    for (double w : throughput_series(traj)) {
        total += weight * w;
        weight *= gamma;
    }
    return total;
}

/// Finite-horizon mean (1/(T+1)) sum W[t], standing in for the limsup average.
inline double average_throughput(const Trajectory& traj) {
    return total_throughput(traj) / static_cast<double>(traj.steps.size());
}

enum class CongestionPattern { always, eventually_always, recurrence_report };

/// Outcome of checking x_i[t] <= x_crit for all links. Finite traces cannot
/// decide "infinitely often", so the recurrence pattern reports the set of
/// uncongested periods instead of a boolean.
struct CongestionVerdict {
    CongestionPattern pattern = CongestionPattern::always;
    bool holds = false;
    std::optional<long> t0;        // eventually_always: earliest suffix start
    std::vector<long> recurrence;  // recurrence_report: periods with no congested link
    std::size_t recurrence_count = 0;
};

inline bool uncongested(const StateVector& x, double x_crit) {
    return std::all_of(x.begin(), x.end(), [&](double a) { return a <= x_crit; });
}

inline CongestionVerdict congestion_monitor(const Trajectory& traj, CongestionPattern pattern) {
    detail::require_nonempty(traj, "congestion_monitor");
    const double x_crit = critical_occupancy(traj.spec.params);
    CongestionVerdict v;
    v.pattern = pattern;
    std::vector<bool> good;
    good.reserve(traj.steps.size());
    for (const auto& r : traj.steps) good.push_back(uncongested(r.x, x_crit));

    switch (pattern) {
    case CongestionPattern::always:
        v.holds = std::all_of(good.begin(), good.end(), [](bool b) { return b; });
        break;
    case CongestionPattern::eventually_always: {
        std::size_t k = good.size();
        while (k > 0 && good[k - 1]) --k;
        if (k < good.size()) {
            v.holds = true;
            v.t0 = traj.steps[k].t;
        }
        break;
    }
    case CongestionPattern::recurrence_report:
        for (std::size_t k = 0; k < good.size(); ++k)
            if (good[k]) v.recurrence.push_back(traj.steps[k].t);
        v.recurrence_count = v.recurrence.size();
        v.holds = v.recurrence_count > 0;
        break;
    }
    return v;
}

struct MetricsReport {
    double ttt = 0.0;
    double total_throughput = 0.0;
    double discounted = 0.0;
    double average = 0.0;
    bool always = false;
    std::optional<long> t0;
    std::size_t recurrence_count = 0;
};

inline MetricsReport metrics_report(const Trajectory& traj, double gamma) {
    MetricsReport r;
    r.ttt = total_travel_time(traj);
    r.total_throughput = total_throughput(traj);
    r.discounted = discounted_throughput(traj, gamma);
    r.average = average_throughput(traj);
    r.always = congestion_monitor(traj, CongestionPattern::always).holds;
    r.t0 = congestion_monitor(traj, CongestionPattern::eventually_always).t0;
    r.recurrence_count = congestion_monitor(traj, CongestionPattern::recurrence_report).recurrence_count;
    return r;
}

/// Largest occupancy over every link and record.
inline double max_occupancy(const Trajectory& traj) {
    double best = 0.0;
    for (const auto& r : traj.steps)
        for (double a : r.x) best = std::max(best, a);
    return best;
}

/// Sum of occupancies on the links where unserved demand can queue without
/// bound: the entry link and every onramp.
inline double entry_occupancy(const NetworkSpec& spec, const StateVector& x) {
    double total = 0.0;
    for (std::size_t slot : spec.disturbance_slot) total += x[slot];
    return total;
}

} // namespace freeway
