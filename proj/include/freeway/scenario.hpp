#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "freeway/errors.hpp"
#include "freeway/network.hpp"

namespace freeway {

/// Counter-based SplitMix64.
///
/// Draw number k (k = 0, 1, ...) for a given seed is the (k+1)-th output of the
/// reference SplitMix64 generator seeded with `seed`:
///   z = seed + (k+1) * 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
/// Uniform doubles in [0, 1) take the top 53 bits times 2^-53.
struct SplitMix64 {
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t k) { return mix(seed + (k + 1) * golden); }

    static constexpr double uniform_at(std::uint64_t seed, std::uint64_t k) {
        return static_cast<double>(at(seed, k) >> 11) * 0x1.0p-53;
    }

    // Sequential interface over the same stream.
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    std::uint64_t next() { return at(seed, counter++); }
    double uniform() { return uniform_at(seed, counter++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

struct ConstantDemand {
    DisturbanceVector d;
};

/// Mainline `mainline_rate` into the entry link, `onramp_base + epsilon[j]` into
/// onramp j. An empty epsilon means all zeros.
struct CuspDemand {
    std::vector<double> epsilon;
    double mainline_rate = 40.0;
    double onramp_base = 10.0;
};

/// Independent uniform draws on [center - delta, center + delta], clipped at 0.
struct IntervalRandomDemand {
    DisturbanceVector center;
    std::vector<double> delta;
    std::uint64_t seed = 0;
};

struct TraceDemand {
    std::vector<DisturbanceVector> trace;
};

using DemandProfile = std::variant<ConstantDemand, CuspDemand, IntervalRandomDemand, TraceDemand>;

namespace detail {

inline void require_q(const std::vector<double>& v, const NetworkSpec& spec, const char* what) {
    if (v.size() != spec.q)
        throw ConfigError(std::string(what) + ": expected " + std::to_string(spec.q) + " components, got " +
                          std::to_string(v.size()));
}

inline void require_nonnegative(const std::vector<double>& v, const char* what) {
    for (double a : v)
        if (!(a >= 0.0)) throw ConfigError(std::string(what) + ": components must be >= 0");
}

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

} // namespace detail

/// Exogenous inflow vector at period t in the network's disturbance layout.
inline DisturbanceVector demand_at(const DemandProfile& profile, const NetworkSpec& spec, long t) {
    if (t < 0) throw ContractError("demand_at: t must be >= 0");
    return std::visit(
        detail::overloaded{
            [&](const ConstantDemand& c) {
                detail::require_q(c.d, spec, "constant demand");
                detail::require_nonnegative(c.d, "constant demand");
                return c.d;
            },
            [&](const CuspDemand& c) {
                if (!c.epsilon.empty() && c.epsilon.size() != spec.m)
                    throw ConfigError("cusp demand: epsilon needs one entry per onramp (" + std::to_string(spec.m) +
                                      "), got " + std::to_string(c.epsilon.size()));
                DisturbanceVector d(spec.q, c.onramp_base);
                d[0] = c.mainline_rate;
                for (std::size_t j = 0; j < c.epsilon.size(); ++j) d[j + 1] += c.epsilon[j];
                detail::require_nonnegative(d, "cusp demand");
                return d;
            },
            [&](const IntervalRandomDemand& r) {
                detail::require_q(r.center, spec, "interval demand center");
                detail::require_q(r.delta, spec, "interval demand delta");
                for (double a : r.delta)
                    if (!(a >= 0.0)) throw ConfigError("interval demand: delta must be >= 0");
                DisturbanceVector d(spec.q);
                const auto base = static_cast<std::uint64_t>(t) * spec.q;
                for (std::size_t k = 0; k < spec.q; ++k) {
                    const double u = SplitMix64::uniform_at(r.seed, base + k);
                    const double value = r.center[k] - r.delta[k] + 2.0 * r.delta[k] * u;
                    d[k] = value < 0.0 ? 0.0 : value;
                }
                return d;
            },
            [&](const TraceDemand& tr) {
                if (static_cast<std::size_t>(t) >= tr.trace.size())
                    throw ConfigError("trace demand exhausted at t=" + std::to_string(t) + " (length " +
                                      std::to_string(tr.trace.size()) + ")");
                const auto& d = tr.trace[static_cast<std::size_t>(t)];
                detail::require_q(d, spec, "trace demand");
                detail::require_nonnegative(d, "trace demand");
                return d;
            },
        },
        profile);
}

/// Free-flow equilibrium of the cusp profile with epsilon = 0 and non-binding
/// metering: propagates steady link flows downstream and inverts demand
/// (x = f / v). On the simple freeway with the default rates this is mainline
/// 80, onramps 20. Throws ConfigError when the profile has a nonzero epsilon
/// or some steady flow would exceed capacity.
inline StateVector cusp_fixed_point(const NetworkSpec& spec, const CuspDemand& cusp) {
    for (double e : cusp.epsilon)
        if (e != 0.0) throw ConfigError("fixed_point initial state requires cusp demand with epsilon = 0");
    const LinkParams& p = spec.params;
    std::vector<double> inflow(spec.n, 0.0);
    inflow[spec.entry] = cusp.mainline_rate;
    for (std::size_t k = 1; k < spec.q; ++k) inflow[spec.disturbance_slot[k]] = cusp.onramp_base;

    // Mainline slots are ordered upstream to downstream, so one forward pass
    // settles every flow.
    std::vector<double> flow(spec.n, 0.0);
    for (std::size_t k = 0; k < spec.n; ++k) {
        if (spec.states[k].kind == LinkKind::onramp) flow[k] = inflow[k];
    }
    for (std::size_t k = 0; k < spec.n; ++k) {
        if (spec.states[k].kind != LinkKind::mainline) continue;
        flow[k] = inflow[k];
        for (const auto& j : spec.merges)
            if (j.mainline == k) inflow[j.downstream] += p.beta * flow[k] + flow[j.onramp];
        if (spec.diverge && spec.diverge->upstream == k) {
            inflow[spec.diverge->branch_a] += 0.5 * flow[k];
            inflow[spec.diverge->branch_b] += 0.5 * flow[k];
        }
    }
    StateVector x(spec.n);
    for (std::size_t k = 0; k < spec.n; ++k) {
        if (flow[k] > p.c) throw ConfigError("fixed_point: steady flow exceeds capacity on link " +
                                             spec.states[k].label());
        x[k] = flow[k] / p.v;
    }
    // Supply must not bind anywhere; confirm with one unmetered step.
    const StateVector next = step(spec, x, ControlVector(spec.m, p.c), demand_at(cusp, spec, 0)).next;
    for (std::size_t k = 0; k < spec.n; ++k)
        if (std::abs(next[k] - x[k]) > 1e-9)
            throw ConfigError("fixed_point: free-flow equilibrium is not stationary for these parameters");
    return x;
}

} // namespace freeway
