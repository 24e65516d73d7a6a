#pragma once

#include <cmath>
#include <compare>
#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freeway/errors.hpp"
#include "freeway/fundamental.hpp"
#include "freeway/junctions.hpp"

namespace freeway {

using StateVector = std::vector<double>;
using ControlVector = std::vector<double>;
using DisturbanceVector = std::vector<double>;

enum class LinkKind { mainline, onramp };

/// A link named the way the benchmark figures name it: mainline links by a
/// signed integer, onramps by the primed index of the junction they feed.
struct LinkId {
    LinkKind kind = LinkKind::mainline;
    int index = 0;

    /// "3", "0", "-2" for mainline links; "1p", "-2p" for onramps.
    std::string label() const { return std::to_string(index) + (kind == LinkKind::onramp ? "p" : ""); }

    auto operator<=>(const LinkId&) const = default;
};

enum class Topology { simple, diverging };

/// Mainline link and onramp merging into a downstream link. Indices are state slots.
struct MergeJunction {
    std::size_t mainline = 0;
    std::size_t onramp = 0;
    std::size_t downstream = 0;
    std::size_t control = 0; // position in the control vector
};

struct DivergeJunction {
    std::size_t upstream = 0;
    std::size_t branch_a = 0;
    std::size_t branch_b = 0;
};

/// Topology, dimensions and canonical layout of a benchmark network.
///
/// State order: mainline links in increasing index, then onramps in the order
/// they appear in the control vector. Disturbance order: the entry link, then
/// every onramp. Build with build_simple() or build_diverging().
struct NetworkSpec {
    Topology topology = Topology::simple;
    int M = 0;
    int N = 0;
    LinkParams params;

    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t q = 0;

    std::vector<LinkId> states;
    std::vector<LinkId> inputs;
    std::vector<LinkId> disturbances;

    std::vector<std::size_t> input_slot;
    std::vector<std::size_t> disturbance_slot;

    std::vector<MergeJunction> merges; // one per onramp, in control order
    std::optional<DivergeJunction> diverge;
    std::vector<std::size_t> exits;
    std::size_t entry = 0;

    /// Links whose occupancy feeds a supply() term; bounded by x_bar.
    std::vector<bool> has_upstream;

    std::size_t slot_of(const LinkId& id) const {
        for (std::size_t k = 0; k < states.size(); ++k)
            if (states[k] == id) return k;
        throw ContractError("link " + id.label() + " is not part of this network");
    }

    std::vector<std::string> state_labels() const { return labels_of(states); }
    std::vector<std::string> input_labels() const { return labels_of(inputs); }
    std::vector<std::string> disturbance_labels() const { return labels_of(disturbances); }

private:
    static std::vector<std::string> labels_of(const std::vector<LinkId>& ids) {
        std::vector<std::string> out;
        out.reserve(ids.size());
        for (const auto& id : ids) out.push_back(id.label());
        return out;
    }
};

namespace detail {

// Fills slots, merges, exits and disturbance layout from the mainline index
// range and onramp list.
inline void wire_network(NetworkSpec& s, int first_mainline, int last_mainline, const std::vector<int>& onramps) {
    for (int k = first_mainline; k <= last_mainline; ++k) s.states.push_back({LinkKind::mainline, k});
    const std::size_t onramp_base = s.states.size();
    for (int k : onramps) s.states.push_back({LinkKind::onramp, k});
    auto mainline_slot = [&](int k) { return static_cast<std::size_t>(k - first_mainline); };

    s.entry = mainline_slot(first_mainline);
    s.disturbances.push_back(s.states[s.entry]);
    s.disturbance_slot.push_back(s.entry);
    for (std::size_t j = 0; j < onramps.size(); ++j) {
        const std::size_t slot = onramp_base + j;
        const int k = onramps[j];
        s.inputs.push_back(s.states[slot]);
        s.input_slot.push_back(slot);
        s.disturbances.push_back(s.states[slot]);
        s.disturbance_slot.push_back(slot);
        s.merges.push_back({mainline_slot(k), slot, mainline_slot(k + 1), j});
    }

    s.n = s.states.size();
    s.m = s.inputs.size();
    s.q = s.disturbances.size();
    s.has_upstream.assign(s.n, false);
    for (int k = first_mainline + 1; k <= last_mainline; ++k) s.has_upstream[mainline_slot(k)] = true;
}

} // namespace detail

/// Length-N freeway: mainline 1..N, onramp i' merging into link i+1.
inline NetworkSpec build_simple(int N, const LinkParams& p = {}) {
    if (N < 2) throw ConfigError("simple freeway requires N >= 2, got " + std::to_string(N));
    p.validate();
    NetworkSpec s;
    s.topology = Topology::simple;
    s.N = N;
    s.params = p;
    std::vector<int> onramps;
    for (int i = 1; i <= N - 1; ++i) onramps.push_back(i);
    detail::wire_network(s, 1, N, onramps);
    s.exits = {s.slot_of({LinkKind::mainline, N})};
    return s;
}

/// Length-(M,N) diverging freeway: mainline -M..0 diverging at link 0 into
/// branches 1..N and N+1..2N.
inline NetworkSpec build_diverging(int M, int N, const LinkParams& p = {}) {
    if (M < 1) throw ConfigError("diverging freeway requires M >= 1, got " + std::to_string(M));
    if (N < 2) throw ConfigError("diverging freeway requires N >= 2, got " + std::to_string(N));
    p.validate();
    NetworkSpec s;
    s.topology = Topology::diverging;
    s.M = M;
    s.N = N;
    s.params = p;
    std::vector<int> onramps;
    for (int i = -M; i <= -1; ++i) onramps.push_back(i);
    for (int i = 1; i <= N - 1; ++i) onramps.push_back(i);
    for (int i = N + 1; i <= 2 * N - 1; ++i) onramps.push_back(i);
    detail::wire_network(s, -M, 2 * N, onramps);

    // There is no onramp 0' or N', so links 0 and N carry no merge.
    const auto slot = [&](int k) { return s.slot_of({LinkKind::mainline, k}); };
    s.diverge = DivergeJunction{slot(0), slot(1), slot(N + 1)};
    s.exits = {slot(N), slot(2 * N)};
    return s;
}

struct StepResult {
    StateVector next;
    /// Outflow of every link in state order (before the update is applied).
    std::vector<double> flows;
};

namespace detail {

inline void require_inputs(const NetworkSpec& spec, const StateVector& x, const ControlVector& u,
                           const DisturbanceVector& d) {
    if (x.size() != spec.n || u.size() != spec.m || d.size() != spec.q)
        throw ContractError("step: expected dimensions (n,m,q)=(" + std::to_string(spec.n) + "," +
                            std::to_string(spec.m) + "," + std::to_string(spec.q) + "), got (" +
                            std::to_string(x.size()) + "," + std::to_string(u.size()) + "," +
                            std::to_string(d.size()) + ")");
    auto check = [](const std::vector<double>& vec, const char* what) {
        for (double a : vec)
            if (!std::isfinite(a) || a < 0.0)
                throw DomainError(std::string("step: ") + what + " components must be finite and >= 0");
    };
    check(x, "state");
    check(u, "control");
    check(d, "disturbance");
}

} // namespace detail

/// Advances the network by one period.
///
/// Entry-link and onramp inflows are exogenous and bypass supply; all other
/// occupancies must lie in [0, x_bar] because they enter a supply term.
inline StepResult step(const NetworkSpec& spec, const StateVector& x, const ControlVector& u,
                       const DisturbanceVector& d) {
    detail::require_inputs(spec, x, u, d);
    const LinkParams& p = spec.params;
    StepResult r{x, std::vector<double>(spec.n, 0.0)};

    for (const auto& j : spec.merges) {
        const MergeFlows f = merge_flow(p, x[j.mainline], x[j.onramp], x[j.downstream], u[j.control]);
        r.flows[j.mainline] = f.mainline_out;
        r.flows[j.onramp] = f.onramp_out;
        r.next[j.mainline] -= f.mainline_out;
        r.next[j.onramp] -= f.onramp_out;
        r.next[j.downstream] += f.into_downstream_from_mainline + f.into_downstream_from_onramp;
    }
    if (spec.diverge) {
        const auto& j = *spec.diverge;
        const DivergeFlows f = diverge_flow(p, x[j.upstream], x[j.branch_a], x[j.branch_b]);
        r.flows[j.upstream] = f.upstream_out;
        r.next[j.upstream] -= f.upstream_out;
        r.next[j.branch_a] += f.into_branch_a;
        r.next[j.branch_b] += f.into_branch_b;
    }
    for (std::size_t e : spec.exits) {
        r.flows[e] = demand(p, x[e]);
        r.next[e] -= r.flows[e];
    }
    for (std::size_t k = 0; k < spec.q; ++k) r.next[spec.disturbance_slot[k]] += d[k];
    return r;
}

struct TrajectoryRecord {
    long t = 0;
    StateVector x;
    ControlVector u;
    DisturbanceVector d;
    std::vector<double> flows;
};

/// Time-indexed record of a simulation. Record t holds x[t] together with the
/// u[t], d[t] and link outflows that produce x[t+1]; the last record's inputs
/// are evaluated but never applied.
struct Trajectory {
    NetworkSpec spec;
    std::vector<TrajectoryRecord> steps;

    long horizon() const { return steps.empty() ? -1 : steps.back().t; }
    const TrajectoryRecord& back() const { return steps.back(); }
};

/// Iterates step() for T periods. `controls(x, t)` and `demands(t)` supply the
/// inputs; both are called exactly once per record, in time order.
template <class ControlFn, class DemandFn>
    requires std::invocable<ControlFn&, const StateVector&, long> && std::invocable<DemandFn&, long>
Trajectory simulate(const NetworkSpec& spec, const StateVector& x0, ControlFn&& controls, DemandFn&& demands,
                    long T) {
    if (T < 0) throw ContractError("simulate: horizon must be >= 0");
    Trajectory traj{spec, {}};
    traj.steps.reserve(static_cast<std::size_t>(T) + 1);
    StateVector x = x0;
    for (long t = 0; t <= T; ++t) {
        ControlVector u = controls(std::as_const(x), t);
        for (double a : u)
            if (!(a >= 0.0)) throw ContractError("simulate: control policy returned a negative or NaN rate");
        DisturbanceVector d = demands(t);
        StepResult r = step(spec, x, u, d);
        traj.steps.push_back({t, x, std::move(u), std::move(d), std::move(r.flows)});
        x = std::move(r.next);
    }
    return traj;
}

/// Open-loop variant driven by explicit control and disturbance sequences.
inline Trajectory simulate(const NetworkSpec& spec, const StateVector& x0, const std::vector<ControlVector>& u_seq,
                           const std::vector<DisturbanceVector>& d_seq, long T) {
    const auto need = static_cast<std::size_t>(T < 0 ? 0 : T) + 1;
    if (u_seq.size() < need || d_seq.size() < need)
        throw ContractError("simulate: input sequences shorter than horizon + 1");
    return simulate(
        spec, x0, [&](const StateVector&, long t) { return u_seq[static_cast<std::size_t>(t)]; },
        [&](long t) { return d_seq[static_cast<std::size_t>(t)]; }, T);
}

} // namespace freeway
