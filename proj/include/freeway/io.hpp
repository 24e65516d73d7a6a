#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "freeway/feasibility.hpp"
#include "freeway/metrics.hpp"
#include "freeway/network.hpp"
#include "freeway/pwa.hpp"
#include "freeway/reach.hpp"

namespace freeway {

/// 17 significant digits: enough to round-trip any double.
inline std::string format_real(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", a);
    return buf;
}

/// Columns: t, x_<label>..., u_<label>..., d_<label>..., flow_<label>..., W, TTT_cum
/// in canonical layout order.
inline void write_trace_csv(std::ostream& out, const Trajectory& traj) {
    const NetworkSpec& spec = traj.spec;
    out << "t";
    for (const auto& l : spec.state_labels()) out << ",x_" << l;
    for (const auto& l : spec.input_labels()) out << ",u_" << l;
    for (const auto& l : spec.disturbance_labels()) out << ",d_" << l;
    for (const auto& l : spec.state_labels()) out << ",flow_" << l;
    out << ",W,TTT_cum\n";

    double ttt = 0.0;
    for (const auto& r : traj.steps) {
        for (double a : r.x) ttt += a;
        out << r.t;
        for (double a : r.x) out << ',' << format_real(a);
        for (double a : r.u) out << ',' << format_real(a);
        for (double a : r.d) out << ',' << format_real(a);
        for (double a : r.flows) out << ',' << format_real(a);
        out << ',' << format_real(throughput_from_flows(spec, r.flows)) << ',' << format_real(ttt) << '\n';
    }
}

inline nlohmann::json to_json(const MetricsReport& m) {
    nlohmann::json j;
    j["ttt"] = m.ttt;
    j["total_throughput"] = m.total_throughput;
    j["discounted"] = m.discounted;
    j["average"] = m.average;
    j["congestion"] = {{"always", m.always},
                       {"t0", m.t0 ? nlohmann::json(*m.t0) : nlohmann::json(nullptr)},
                       {"recurrence_count", m.recurrence_count}};
    return j;
}

/// Row-major dense matrix with explicit dimensions.
inline nlohmann::json matrix_json(const Eigen::MatrixXd& a) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k) data.push_back(a(i, k));
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(data)}};
}

inline nlohmann::json pwa_record_json(const NetworkSpec& spec, long t, const StateVector& x, const ControlVector& u,
                                      const DisturbanceVector& d) {
    const RegionSignature sig = signature_at(spec, x, u, d);
    const AffineDynamics dyn = affine_at(spec, sig);
    nlohmann::json j;
    j["t"] = t;
    j["x"] = x;
    j["u"] = u;
    j["d"] = d;
    j["signature"] = sig.active;
    j["A"] = matrix_json(dyn.A);
    j["B"] = matrix_json(dyn.B);
    j["E"] = matrix_json(dyn.E);
    j["f"] = std::vector<double>(dyn.f.data(), dyn.f.data() + dyn.f.size());
    j["discrepancy"] = verify_affine(spec, x, u, d);
    return j;
}

inline nlohmann::json layout_json(const NetworkSpec& spec) {
    return {{"states", spec.state_labels()},
            {"inputs", spec.input_labels()},
            {"disturbances", spec.disturbance_labels()},
            {"n", spec.n},
            {"m", spec.m},
            {"q", spec.q}};
}

inline void write_reach_csv(std::ostream& out, const NetworkSpec& spec, const std::vector<IntervalBox>& tube) {
    out << "t";
    for (const auto& l : spec.state_labels()) out << ",lower_" << l;
    for (const auto& l : spec.state_labels()) out << ",upper_" << l;
    out << '\n';
    for (std::size_t t = 0; t < tube.size(); ++t) {
        out << t;
        for (double a : tube[t].lower) out << ',' << format_real(a);
        for (double a : tube[t].upper) out << ',' << format_real(a);
        out << '\n';
    }
}

inline nlohmann::json to_json(const FeasibilityReport& r) {
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : r.probes)
        probes.push_back({{"policy", p.name}, {"max_occupancy", p.max_occupancy}, {"bounded", p.bounded}});
    return {{"verdict", r.verdict()},
            {"feasible", r.feasible()},
            {"witness", r.witness ? nlohmann::json(r.probes[*r.witness].name) : nlohmann::json(nullptr)},
            {"horizon", r.horizon},
            {"bound", r.bound},
            {"probes", std::move(probes)}};
}

} // namespace freeway
