#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "freeway/errors.hpp"
#include "freeway/fundamental.hpp"
#include "freeway/network.hpp"

namespace freeway {

/// Kinds of min-expression in the update equations.
///
///   demand          min{c, v x_i}                                  (one per link)
///   mainline_merge  min{D(x_i), (alpha/beta) S(x_down)}            (mainline into a merge)
///   onramp_merge    min{D(x_i'), alpha_bar S(x_down), u_i'}        (metered onramp)
///   diverge         min{D(x_0), 2 S(x_a), 2 S(x_b)}                (FIFO diverge)
///
/// The beta- and 0.5-scaled mins feeding downstream links share the argmin of
/// their unscaled counterparts and carry no entry of their own.
enum class MinKind : std::uint8_t { demand, mainline_merge, onramp_merge, diverge };

struct MinExpression {
    MinKind kind = MinKind::demand;
    std::size_t slot = 0; // state slot whose outflow (or demand) the min defines
    std::size_t arity = 2;
};

/// Signature entries: one demand entry per link in state order, then one
/// junction entry per link that has one (mainline merges and the diverge in
/// mainline order, then onramps), again in state order.
inline std::vector<MinExpression> min_expressions(const NetworkSpec& spec) {
    std::vector<MinExpression> out;
    out.reserve(2 * spec.n);
    for (std::size_t k = 0; k < spec.n; ++k) out.push_back({MinKind::demand, k, 2});
    std::vector<int> junction(spec.n, -1);
    for (const auto& j : spec.merges) {
        junction[j.mainline] = static_cast<int>(MinKind::mainline_merge);
        junction[j.onramp] = static_cast<int>(MinKind::onramp_merge);
    }
    if (spec.diverge) junction[spec.diverge->upstream] = static_cast<int>(MinKind::diverge);
    for (std::size_t k = 0; k < spec.n; ++k) {
        if (junction[k] < 0) continue;
        const auto kind = static_cast<MinKind>(junction[k]);
        out.push_back({kind, k, kind == MinKind::mainline_merge ? std::size_t{2} : std::size_t{3}});
    }
    return out;
}

/// Active (minimizing) argument of every min-expression; identifies one
/// affine region of the dynamics.
struct RegionSignature {
    std::vector<std::uint8_t> active;

    auto operator<=>(const RegionSignature&) const = default;

    std::string str() const {
        std::string s;
        s.reserve(active.size());
        for (auto a : active) s.push_back(static_cast<char>('0' + a));
        return s;
    }
};

/// x[t+1] = A x + B u + E d + f on one region.
struct AffineDynamics {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd E;
    Eigen::VectorXd f;

    StateVector apply(const StateVector& x, const ControlVector& u, const DisturbanceVector& d) const {
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
        const Eigen::Map<const Eigen::VectorXd> dv(d.data(), static_cast<Eigen::Index>(d.size()));
        const Eigen::VectorXd next = A * xv + B * uv + E * dv + f;
        return StateVector(next.data(), next.data() + next.size());
    }
};

namespace detail {

inline std::uint8_t argmin(std::initializer_list<double> args) {
    std::uint8_t best = 0;
    std::uint8_t k = 0;
    double value = 0.0;
    for (double a : args) {
        if (k == 0 || a < value) { // strict: ties keep the lowest index
            value = a;
            best = k;
        }
        ++k;
    }
    return best;
}

// Affine expression a_x . x + a_u . u + k.
struct LinearForm {
    Eigen::VectorXd ax;
    Eigen::VectorXd au;
    double k = 0.0;

    LinearForm(std::size_t n, std::size_t m)
        : ax(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
          au(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m))) {}

    LinearForm scaled(double s) const {
        LinearForm r = *this;
        r.ax *= s;
        r.au *= s;
        r.k *= s;
        return r;
    }
};

} // namespace detail

/// Region containing (x, u): records the argmin of every min-expression.
inline RegionSignature signature_at(const NetworkSpec& spec, const StateVector& x, const ControlVector& u,
                                    const DisturbanceVector& d) {
    detail::require_inputs(spec, x, u, d);
    const LinkParams& p = spec.params;
    std::vector<const MergeJunction*> by_mainline(spec.n, nullptr), by_onramp(spec.n, nullptr);
    for (const auto& j : spec.merges) {
        by_mainline[j.mainline] = &j;
        by_onramp[j.onramp] = &j;
    }

    RegionSignature sig;
    for (const auto& e : min_expressions(spec)) {
        const std::size_t k = e.slot;
        switch (e.kind) {
        case MinKind::demand:
            sig.active.push_back(detail::argmin({p.c, p.v * x[k]}));
            break;
        case MinKind::mainline_merge: {
            const auto& j = *by_mainline[k];
            sig.active.push_back(detail::argmin({demand(p, x[k]), p.alpha / p.beta * supply(p, x[j.downstream])}));
            break;
        }
        case MinKind::onramp_merge: {
            const auto& j = *by_onramp[k];
            sig.active.push_back(
                detail::argmin({demand(p, x[k]), p.alpha_bar * supply(p, x[j.downstream]), u[j.control]}));
            break;
        }
        case MinKind::diverge: {
            const auto& j = *spec.diverge;
            sig.active.push_back(detail::argmin(
                {demand(p, x[k]), 2.0 * supply(p, x[j.branch_a]), 2.0 * supply(p, x[j.branch_b])}));
            break;
        }
        }
    }
    return sig;
}

/// Exact affine dynamics on the region `sig`, obtained by replacing every
/// min with its active argument: D contributes c or v x_i, S contributes
/// w x_bar - w x_i, a metering rate contributes a B entry and each exogenous
/// inflow an E entry.
inline AffineDynamics affine_at(const NetworkSpec& spec, const RegionSignature& sig) {
    const auto exprs = min_expressions(spec);
    if (sig.active.size() != exprs.size())
        throw ContractError("affine_at: signature has " + std::to_string(sig.active.size()) + " entries, expected " +
                            std::to_string(exprs.size()));
    for (std::size_t k = 0; k < exprs.size(); ++k)
        if (sig.active[k] >= exprs[k].arity)
            throw ContractError("affine_at: signature entry " + std::to_string(k) + " exceeds arity");

    const LinkParams& p = spec.params;
    const std::size_t n = spec.n;
    const std::size_t m = spec.m;
    const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

    auto demand_form = [&](std::size_t slot) {
        detail::LinearForm f(n, m);
        if (sig.active[slot] == 0)
            f.k = p.c;
        else
            f.ax[idx(slot)] = p.v;
        return f;
    };
    auto supply_form = [&](std::size_t slot) {
        detail::LinearForm f(n, m);
        f.k = p.w * p.x_bar;
        f.ax[idx(slot)] = -p.w;
        return f;
    };
    auto control_form = [&](std::size_t control) {
        detail::LinearForm f(n, m);
        f.au[idx(control)] = 1.0;
        return f;
    };

    AffineDynamics dyn;
    dyn.A = Eigen::MatrixXd::Identity(idx(n), idx(n));
    dyn.B = Eigen::MatrixXd::Zero(idx(n), idx(m));
    dyn.E = Eigen::MatrixXd::Zero(idx(n), idx(spec.q));
    dyn.f = Eigen::VectorXd::Zero(idx(n));
    auto add_row = [&](std::size_t row, const detail::LinearForm& form, double sign) {
        dyn.A.row(idx(row)) += sign * form.ax.transpose();
        dyn.B.row(idx(row)) += sign * form.au.transpose();
        dyn.f[idx(row)] += sign * form.k;
    };

    std::vector<const MergeJunction*> by_mainline(n, nullptr), by_onramp(n, nullptr);
    for (const auto& j : spec.merges) {
        by_mainline[j.mainline] = &j;
        by_onramp[j.onramp] = &j;
    }
    for (std::size_t e = n; e < exprs.size(); ++e) {
        const std::size_t k = exprs[e].slot;
        const unsigned choice = sig.active[e];
        switch (exprs[e].kind) {
        case MinKind::mainline_merge: {
            const auto& j = *by_mainline[k];
            const detail::LinearForm out =
                choice == 0 ? demand_form(k) : supply_form(j.downstream).scaled(p.alpha / p.beta);
            add_row(k, out, -1.0);
            add_row(j.downstream, out.scaled(p.beta), 1.0);
            break;
        }
        case MinKind::onramp_merge: {
            const auto& j = *by_onramp[k];
            const detail::LinearForm out = choice == 0   ? demand_form(k)
                                           : choice == 1 ? supply_form(j.downstream).scaled(p.alpha_bar)
                                                         : control_form(j.control);
            add_row(k, out, -1.0);
            add_row(j.downstream, out, 1.0);
            break;
        }
        case MinKind::diverge: {
            const auto& j = *spec.diverge;
            const detail::LinearForm out = choice == 0   ? demand_form(k)
                                           : choice == 1 ? supply_form(j.branch_a).scaled(2.0)
                                                         : supply_form(j.branch_b).scaled(2.0);
            add_row(k, out, -1.0);
            add_row(j.branch_a, out.scaled(0.5), 1.0);
            add_row(j.branch_b, out.scaled(0.5), 1.0);
            break;
        }
        case MinKind::demand:
            throw ContractError("affine_at: demand entry outside the demand block");
        }
    }
    for (std::size_t e : spec.exits) add_row(e, demand_form(e), -1.0);
    for (std::size_t k = 0; k < spec.q; ++k) dyn.E(idx(spec.disturbance_slot[k]), idx(k)) = 1.0;
    return dyn;
}

/// |step(x,u,d) - (A x + B u + E d + f)|_inf on the region containing (x, u).
inline double verify_affine(const NetworkSpec& spec, const StateVector& x, const ControlVector& u,
                            const DisturbanceVector& d) {
    const StateVector exact = step(spec, x, u, d).next;
    const StateVector affine = affine_at(spec, signature_at(spec, x, u, d)).apply(x, u, d);
    double worst = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) worst = std::max(worst, std::abs(exact[k] - affine[k]));
    return worst;
}

/// Distinct signatures visited by a trajectory, in order of first visit.
inline std::vector<RegionSignature> collect_signatures(const Trajectory& traj) {
    std::set<RegionSignature> seen;
    std::vector<RegionSignature> out;
    for (const auto& r : traj.steps) {
        RegionSignature s = signature_at(traj.spec, r.x, r.u, r.d);
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

} // namespace freeway
