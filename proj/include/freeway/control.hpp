#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "freeway/errors.hpp"
#include "freeway/metrics.hpp"
#include "freeway/network.hpp"
#include "freeway/scenario.hpp"

namespace freeway {

/// Unrestricted onramps: every rate equals capacity, which never binds below demand.
struct NoMetering {};

/// Constant rates; a single entry is broadcast to every onramp.
struct FixedRate {
    std::vector<double> rates;
};

/// Integral ramp metering, one integrator per onramp driven by the occupancy
/// of the link the onramp merges into:
///   u_j[t] = clamp(u_j[t-1] + gain * (target - x_downstream(j)[t]), u_min, u_max)
/// Integrators start at `u_init` (u_max when unset).
struct Feedback {
    double gain = 0.0;
    double target = 80.0;
    double u_min = 0.0;
    double u_max = 40.0;
    std::optional<double> u_init;
};

enum class Objective { min_ttt, max_throughput };

/// Beam search over per-onramp rates drawn from `grid`, one rate vector per
/// plan step, re-planned every period. Rollouts use the exact dynamics and
/// the demand forecast.
struct RecedingHorizon {
    int horizon = 1;
    std::vector<double> grid{0.0, 10.0, 20.0, 30.0, 40.0};
    Objective objective = Objective::min_ttt;
    std::size_t beam = 64;
    DemandProfile forecast = CuspDemand{};
};

using PolicySpec = std::variant<NoMetering, FixedRate, Feedback, RecedingHorizon>;

inline std::string policy_name(const PolicySpec& p) {
    return std::visit(detail::overloaded{
                          [](const NoMetering&) { return std::string("no_metering"); },
                          [](const FixedRate&) { return std::string("fixed_rate"); },
                          [](const Feedback&) { return std::string("feedback"); },
                          [](const RecedingHorizon&) { return std::string("receding_horizon"); },
                      },
                      p);
}

namespace detail {

inline std::vector<ControlVector> rate_candidates(std::vector<double> grid, std::size_t m) {
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<ControlVector> out;
    std::vector<std::size_t> idx(m, 0);
    while (true) {
        ControlVector u(m);
        for (std::size_t j = 0; j < m; ++j) u[j] = grid[idx[j]];
        out.push_back(std::move(u));
        std::size_t j = m;
        while (j > 0 && ++idx[j - 1] == grid.size()) idx[--j] = 0;
        if (j == 0) break;
    }
    return out;
}

} // namespace detail

/// First action of the best H-step plan found by beam search.
///
/// Score of a plan is the sum over its H successor states of total occupancy
/// (min_ttt) or throughput (max_throughput). Equal scores go to the
/// lexicographically smallest flattened plan. With beam >= |grid|^(m H) the
/// search is exhaustive.
inline ControlVector receding_horizon_plan(const NetworkSpec& spec, const StateVector& x, const RecedingHorizon& policy,
                                           long t = 0) {
    if (policy.horizon < 1) throw ConfigError("receding horizon: H must be >= 1");
    if (policy.grid.empty()) throw ConfigError("receding horizon: rate grid is empty");
    if (policy.beam < 1) throw ConfigError("receding horizon: beam width must be >= 1");
    for (double g : policy.grid)
        if (!(g >= 0.0)) throw ConfigError("receding horizon: grid rates must be >= 0");
    if (spec.m == 0) return {};

    struct Node {
        std::vector<double> plan; // flattened, m entries per plan step
        StateVector x;
        double score = 0.0;
    };
    const bool maximize = policy.objective == Objective::max_throughput;
    auto better = [maximize](const Node& a, const Node& b) {
        if (a.score != b.score) return maximize ? a.score > b.score : a.score < b.score;
        return a.plan < b.plan;
    };

    const auto candidates = detail::rate_candidates(policy.grid, spec.m);
    std::vector<Node> beam{Node{{}, x, 0.0}};
    for (int k = 0; k < policy.horizon; ++k) {
        const DisturbanceVector d = demand_at(policy.forecast, spec, t + k);
        std::vector<Node> expanded;
        expanded.reserve(beam.size() * candidates.size());
        for (const Node& node : beam) {
            for (const ControlVector& u : candidates) {
                Node child{node.plan, step(spec, node.x, u, d).next, node.score};
                child.plan.insert(child.plan.end(), u.begin(), u.end());
                double term = 0.0;
                if (maximize) {
                    term = throughput(spec, child.x);
                } else {
                    for (double a : child.x) term += a;
                }
                child.score += term;
                expanded.push_back(std::move(child));
            }
        }
        const std::size_t keep = std::min(policy.beam, expanded.size());
        std::partial_sort(expanded.begin(), expanded.begin() + static_cast<std::ptrdiff_t>(keep), expanded.end(),
                          better);
        expanded.resize(keep);
        beam = std::move(expanded);
    }
    return ControlVector(beam.front().plan.begin(), beam.front().plan.begin() + static_cast<std::ptrdiff_t>(spec.m));
}

/// A policy instance. Feedback keeps its integrators here, so one instance
/// drives one simulation at a time; call reset() before reuse.
class Policy {
public:
    Policy() = default;
    Policy(PolicySpec spec) : spec_(std::move(spec)) {} // NOLINT(google-explicit-constructor)

    const PolicySpec& spec() const { return spec_; }
    std::string name() const { return policy_name(spec_); }
    void reset() { integrators_.clear(); }

    ControlVector apply(const NetworkSpec& net, const StateVector& x, long t) {
        if (x.size() != net.n) throw ContractError("policy: state dimension mismatch");
        return std::visit(
            detail::overloaded{
                [&](const NoMetering&) { return ControlVector(net.m, net.params.c); },
                [&](const FixedRate& f) {
                    if (f.rates.size() == 1) return ControlVector(net.m, f.rates.front());
                    if (f.rates.size() != net.m)
                        throw ConfigError("fixed_rate: expected 1 or " + std::to_string(net.m) + " rates, got " +
                                          std::to_string(f.rates.size()));
                    return f.rates;
                },
                [&](const Feedback& f) { return feedback(f, net, x); },
                [&](const RecedingHorizon& r) { return receding_horizon_plan(net, x, r, t); },
            },
            spec_);
    }

private:
    ControlVector feedback(const Feedback& f, const NetworkSpec& net, const StateVector& x) {
        if (integrators_.size() != net.m) integrators_.assign(net.m, f.u_init.value_or(f.u_max));
        for (const auto& j : net.merges) {
            double& u = integrators_[j.control];
            u = std::clamp(u + f.gain * (f.target - x[j.downstream]), f.u_min, f.u_max);
        }
        return integrators_;
    }

    PolicySpec spec_ = NoMetering{};
    std::vector<double> integrators_;
};

inline void validate_policy(const PolicySpec& p) {
    auto nonneg = [](double a, const char* what) {
        if (!(a >= 0.0)) throw ConfigError(std::string(what) + " must be >= 0");
    };
    std::visit(detail::overloaded{
                   [](const NoMetering&) {},
                   [&](const FixedRate& f) {
                       if (f.rates.empty()) throw ConfigError("fixed_rate: rates must not be empty");
                       for (double a : f.rates) nonneg(a, "fixed_rate: rate");
                   },
                   [&](const Feedback& f) {
                       nonneg(f.u_min, "feedback: u_min");
                       if (!(f.u_max >= f.u_min)) throw ConfigError("feedback: u_max must be >= u_min");
                       if (!(f.gain >= 0.0)) throw ConfigError("feedback: gain must be >= 0");
                       if (f.u_init) nonneg(*f.u_init, "feedback: u_init");
                   },
                   [&](const RecedingHorizon& r) {
                       if (r.horizon < 1) throw ConfigError("receding horizon: H must be >= 1");
                       if (r.grid.empty()) throw ConfigError("receding horizon: rate grid is empty");
                       if (r.beam < 1) throw ConfigError("receding horizon: beam width must be >= 1");
                       for (double g : r.grid) nonneg(g, "receding horizon: grid rate");
                   },
               },
               p);
}

inline ControlVector apply(Policy& policy, const NetworkSpec& spec, const StateVector& x, long t) {
    return policy.apply(spec, x, t);
}

/// Closed-loop simulation under `policy` and `demand`.
inline Trajectory simulate(const NetworkSpec& spec, const StateVector& x0, Policy& policy, const DemandProfile& demand,
                           long T) {
    return simulate(
        spec, x0, [&](const StateVector& x, long t) { return policy.apply(spec, x, t); },
        [&](long t) { return demand_at(demand, spec, t); }, T);
}

} // namespace freeway
