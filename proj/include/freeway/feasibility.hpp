#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "freeway/control.hpp"
#include "freeway/metrics.hpp"
#include "freeway/network.hpp"
#include "freeway/scenario.hpp"

namespace freeway {

struct PolicyProbe {
    std::string name;
    double max_occupancy = 0.0;
    bool bounded = false; // max_occupancy < C over the whole horizon
};

/// Semi-decision for demand feasibility: a profile is feasible when some
/// control sequence keeps every occupancy below a constant. The probe only
/// ever witnesses feasibility; a failed probe means "not demonstrated up to
/// (T, C)", never "infeasible".
struct FeasibilityReport {
    std::vector<PolicyProbe> probes;
    std::optional<std::size_t> witness; // index into probes
    long horizon = 0;
    double bound = 0.0;

    bool feasible() const { return witness.has_value(); }
    std::string verdict() const { return feasible() ? "feasible" : "not_demonstrated"; }
};

inline FeasibilityReport feasibility_probe(const NetworkSpec& spec, const StateVector& x0, const DemandProfile& demand,
                                           const std::vector<PolicySpec>& policies, long T, double C) {
    if (T < 1) throw ConfigError("feasibility probe: horizon must be >= 1");
    if (!(C > 0.0)) throw ConfigError("feasibility probe: bound C must be > 0");
    FeasibilityReport report;
    report.horizon = T;
    report.bound = C;
    for (const auto& p : policies) {
        Policy policy(p);
        double peak = 0.0;
        StateVector x = x0;
        // Stream the simulation instead of storing 10^4 records per policy.
        for (long t = 0; t <= T; ++t) {
            for (double a : x) peak = std::max(peak, a);
            if (t == T) break;
            x = step(spec, x, policy.apply(spec, x, t), demand_at(demand, spec, t)).next;
        }
        const bool bounded = peak < C;
        report.probes.push_back({policy.name(), peak, bounded});
        if (bounded && !report.witness) report.witness = report.probes.size() - 1;
    }
    return report;
}

} // namespace freeway
