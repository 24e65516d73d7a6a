#pragma once

#include <algorithm>

#include "freeway/fundamental.hpp"

namespace freeway {

struct MergeFlows {
    double mainline_out = 0.0;                  // leaves the upstream mainline link
    double onramp_out = 0.0;                    // leaves the onramp
    double into_downstream_from_mainline = 0.0; // beta * mainline_out
    double into_downstream_from_onramp = 0.0;   // == onramp_out
};

struct DivergeFlows {
    double upstream_out = 0.0;
    double into_branch_a = 0.0;
    double into_branch_b = 0.0;
};

/// One incoming link feeding one outgoing link: min{D(x_up), S(x_down)}.
inline double simple_junction_flow(const LinkParams& p, double x_up, double x_down) {
    return std::min(demand(p, x_up), supply(p, x_down));
}

/// Asymmetric merge of mainline link 1 and metered onramp 2 into link 3.
inline MergeFlows merge_flow(const LinkParams& p, double x1, double x2, double x3, double u) {
    if (!(u >= 0.0)) throw DomainError("merge_flow: metering rate must be >= 0");
    const double s3 = supply(p, x3);
    MergeFlows f;
    f.mainline_out = std::min(demand(p, x1), p.alpha / p.beta * s3);
    f.onramp_out = std::min({demand(p, x2), p.alpha_bar * s3, u});
    // min{beta D, alpha S} == beta * min{D, (alpha/beta) S}
    f.into_downstream_from_mainline = p.beta * f.mainline_out;
    f.into_downstream_from_onramp = f.onramp_out;
    return f;
}

/// Full-FIFO diverge of link 1 into two branches splitting evenly.
inline DivergeFlows diverge_flow(const LinkParams& p, double x1, double x2, double x3) {
    const double s2 = supply(p, x2);
    const double s3 = supply(p, x3);
    DivergeFlows f;
    f.upstream_out = std::min({demand(p, x1), 2.0 * s2, 2.0 * s3});
    f.into_branch_a = 0.5 * f.upstream_out;
    f.into_branch_b = f.into_branch_a;
    return f;
}

} // namespace freeway
