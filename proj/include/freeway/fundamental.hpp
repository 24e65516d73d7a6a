#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "freeway/errors.hpp"

namespace freeway {

/// Triangular fundamental diagram and merge constants shared by every link.
///
/// Defaults are the standard two-lane, one-mile, 30 s period values:
/// capacity 40 veh/period, free-flow speed 0.5 and congestion-wave speed 1/6
/// links/period, jam occupancy 320 vehicles, mainline continuation 0.75, and
/// mainline/onramp supply weights 1 and 5 (asymmetric merge).
struct LinkParams {
    double c = 40.0;
    double v = 0.5;
    double w = 0.5 / 3.0;
    double x_bar = 320.0;
    double beta = 0.75;
    double alpha = 1.0;
    double alpha_bar = 5.0;

    /// Throws ConfigError when any invariant of the parameter set fails.
    void validate() const {
        auto fail = [](const std::string& what) { throw ConfigError("invalid link parameters: " + what); };
        auto finite = [](double a) { return std::isfinite(a); };
        if (!(finite(c) && finite(v) && finite(w) && finite(x_bar) && finite(beta) && finite(alpha) &&
              finite(alpha_bar)))
            fail("non-finite value");
        if (!(c > 0.0)) fail("c must be > 0");
        if (!(x_bar > 0.0)) fail("x_bar must be > 0");
        if (!(v > 0.0 && v <= 1.0)) fail("v must lie in (0, 1]");
        if (!(w > 0.0)) fail("w must be > 0");
        if (!(beta > 0.0 && beta <= 1.0)) fail("beta must lie in (0, 1]");
        if (!(alpha > 0.0)) fail("alpha must be > 0");
        if (!(alpha_bar > 0.0)) fail("alpha_bar must be > 0");
        // w*(alpha+alpha_bar) <= 1 keeps downstream occupancy below x_bar.
        if (w * (alpha + alpha_bar) > 1.0 + 1e-12) fail("w*(alpha+alpha_bar) must be <= 1");
    }

    bool operator==(const LinkParams&) const = default;
};

/// Demand D(x) = min{c, v x}.
inline double demand(const LinkParams& p, double x) {
    if (!(x >= 0.0)) throw DomainError("demand: occupancy must be >= 0, got " + std::to_string(x));
    return std::min(p.c, p.v * x);
}

/// Supply S(x) = w (x_bar - x), defined on [0, x_bar].
inline double supply(const LinkParams& p, double x) {
    if (!(x >= 0.0 && x <= p.x_bar))
        throw DomainError("supply: occupancy must lie in [0, x_bar], got " + std::to_string(x));
    return p.w * (p.x_bar - x);
}

/// Occupancy at which demand meets supply; above it a link is congested.
inline double critical_occupancy(const LinkParams& p) {
    p.validate();
    return std::max(p.x_bar - p.c / p.w, p.w * p.x_bar / (p.v + p.w));
}

} // namespace freeway
