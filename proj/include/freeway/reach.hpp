#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "freeway/errors.hpp"
#include "freeway/network.hpp"
#include "freeway/scenario.hpp"

namespace freeway {

struct IntervalBox {
    StateVector lower;
    StateVector upper;

    bool contains(const StateVector& x, double tol = 0.0) const {
        for (std::size_t k = 0; k < x.size(); ++k)
            if (x[k] < lower[k] - tol || x[k] > upper[k] + tol) return false;
        return true;
    }
};

/// Empirical order-preservation check of step() at fixed u: random ordered
/// state pairs (x <= y) and ordered disturbances must map to ordered
/// successors. Returns the number of violating samples.
inline std::size_t count_monotonicity_violations(const NetworkSpec& spec, std::size_t samples, std::uint64_t seed,
                                                 double tol = 1e-9) {
    const LinkParams& p = spec.params;
    SplitMix64 rng{seed};
    std::size_t bad = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        StateVector lo(spec.n), hi(spec.n);
        for (std::size_t k = 0; k < spec.n; ++k) {
            const double a = rng.uniform(0.0, p.x_bar);
            const double b = rng.uniform(0.0, p.x_bar);
            lo[k] = std::min(a, b);
            hi[k] = std::max(a, b);
        }
        ControlVector u(spec.m);
        for (auto& a : u) a = rng.uniform(0.0, p.c);
        DisturbanceVector d_lo(spec.q), d_hi(spec.q);
        for (std::size_t k = 0; k < spec.q; ++k) {
            const double a = rng.uniform(0.0, p.c);
            const double b = rng.uniform(0.0, p.c);
            d_lo[k] = std::min(a, b);
            d_hi[k] = std::max(a, b);
        }
        const StateVector a = step(spec, lo, u, d_lo).next;
        const StateVector b = step(spec, hi, u, d_hi).next;
        for (std::size_t k = 0; k < spec.n; ++k) {
            if (a[k] > b[k] + tol) {
                ++bad;
                break;
            }
        }
    }
    return bad;
}

/// Corner-based interval propagation for merge-only (simple) freeways.
///
/// At a fixed control the simple-freeway step is monotone in (x, d), so the
/// image of a box is bounded by the images of its two corners. Construction
/// checks monotonicity numerically and refuses parameter sets that fail.
/// Controls must be points: the step is not monotone in u.
class IntervalReach {
public:
    static constexpr std::size_t default_samples = 2000;
    static constexpr std::uint64_t default_seed = 0x5eed;

    explicit IntervalReach(NetworkSpec spec, std::size_t samples = default_samples,
                           std::uint64_t seed = default_seed)
        : spec_(std::move(spec)) {
        if (spec_.topology != Topology::simple)
            throw UnsupportedTopology(
                "interval reachability needs a merge-only network; the diverging freeway is not monotone");
        if (count_monotonicity_violations(spec_, samples, seed) != 0)
            throw DomainError("interval reachability: step is not monotone for these link parameters");
    }

    const NetworkSpec& spec() const { return spec_; }

    IntervalBox step(const IntervalBox& box, const ControlVector& u, const DisturbanceVector& d_lower,
                     const DisturbanceVector& d_upper) const {
        if (box.lower.size() != spec_.n || box.upper.size() != spec_.n)
            throw ContractError("interval_step: box dimension mismatch");
        if (d_lower.size() != spec_.q || d_upper.size() != spec_.q)
            throw ContractError("interval_step: disturbance bound dimension mismatch");
        for (std::size_t k = 0; k < spec_.n; ++k)
            if (!(box.lower[k] <= box.upper[k])) throw DomainError("interval_step: box has lower > upper");
        for (std::size_t k = 0; k < spec_.q; ++k)
            if (!(d_lower[k] <= d_upper[k])) throw DomainError("interval_step: d_lower > d_upper");

        // Occupancies outside the physical range are unreachable (nonnegativity
        // and the jam bound on links with an upstream link), so clipping keeps
        // the corners in the step's domain without losing soundness.
        IntervalBox clipped = box;
        for (std::size_t k = 0; k < spec_.n; ++k) {
            const double hi = spec_.has_upstream[k] ? spec_.params.x_bar : clipped.upper[k];
            clipped.lower[k] = std::clamp(clipped.lower[k], 0.0, hi);
            clipped.upper[k] = std::clamp(clipped.upper[k], 0.0, hi);
        }
        return {freeway::step(spec_, clipped.lower, u, d_lower).next,
                freeway::step(spec_, clipped.upper, u, d_upper).next};
    }

    /// Boxes for t = 0..T; controls[t] must hold for every t < T.
    std::vector<IntervalBox> tube(const IntervalBox& initial, const std::vector<ControlVector>& controls,
                                  const DisturbanceVector& d_lower, const DisturbanceVector& d_upper, long T) const {
        if (T < 0) throw ContractError("reach tube: horizon must be >= 0");
        if (controls.size() < static_cast<std::size_t>(T))
            throw ContractError("reach tube: control sequence shorter than horizon");
        std::vector<IntervalBox> out{initial};
        out.reserve(static_cast<std::size_t>(T) + 1);
        for (long t = 0; t < T; ++t)
            out.push_back(step(out.back(), controls[static_cast<std::size_t>(t)], d_lower, d_upper));
        return out;
    }

private:
    NetworkSpec spec_;
};

inline IntervalBox interval_step(const NetworkSpec& spec, const IntervalBox& box, const ControlVector& u,
                                 const DisturbanceVector& d_lower, const DisturbanceVector& d_upper) {
    return IntervalReach(spec).step(box, u, d_lower, d_upper);
}

} // namespace freeway
