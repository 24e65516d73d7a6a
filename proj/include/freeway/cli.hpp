#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeway/config.hpp"
#include "freeway/control.hpp"
#include "freeway/feasibility.hpp"
#include "freeway/io.hpp"
#include "freeway/metrics.hpp"
#include "freeway/reach.hpp"

namespace freeway::cli {

enum class Command { simulate, metrics, pwa, reach, feasibility };

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, domain_error = 3 };

/// Environment variable naming the output directory when --out is absent.
inline constexpr const char* out_dir_env = "FREEWAY_OUT_DIR";

inline std::optional<Command> parse_command(const std::string& s) {
    if (s == "simulate") return Command::simulate;
    if (s == "metrics") return Command::metrics;
    if (s == "pwa") return Command::pwa;
    if (s == "reach") return Command::reach;
    if (s == "feasibility") return Command::feasibility;
    return std::nullopt;
}

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::string prefix; // prepended to every output file name (batch mode)
};

inline std::filesystem::path resolve_out_dir(const RunOptions& opt) {
    if (opt.out_dir) return *opt.out_dir;
    if (const char* env = std::getenv(out_dir_env); env && *env) return env;
    return ".";
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& prefix, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (prefix + name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

inline void write_json(const std::filesystem::path& dir, const std::string& prefix, const std::string& name,
                       const nlohmann::json& j) {
    auto out = open_output(dir, prefix, name);
    out << j.dump(2) << '\n';
}

inline Trajectory run_trajectory(const ScenarioConfig& cfg) {
    Policy policy(cfg.policy);
    return simulate(cfg.network, cfg.x0, policy, cfg.demand, cfg.horizon);
}

// Disturbance bounds for reach: explicit, or implied by the demand profile.
inline std::pair<DisturbanceVector, DisturbanceVector> reach_disturbance_bounds(const ScenarioConfig& cfg) {
    if (cfg.reach.d_lower) return {*cfg.reach.d_lower, *cfg.reach.d_upper};
    const NetworkSpec& spec = cfg.network;
    if (const auto* r = std::get_if<IntervalRandomDemand>(&cfg.demand)) {
        DisturbanceVector lo(spec.q), hi(spec.q);
        for (std::size_t k = 0; k < spec.q; ++k) {
            lo[k] = std::max(0.0, r->center[k] - r->delta[k]);
            hi[k] = std::max(0.0, r->center[k] + r->delta[k]);
        }
        return {lo, hi};
    }
    if (std::holds_alternative<TraceDemand>(cfg.demand)) {
        DisturbanceVector lo = demand_at(cfg.demand, spec, 0), hi = lo;
        const auto& trace = std::get<TraceDemand>(cfg.demand).trace;
        for (const auto& d : trace)
            for (std::size_t k = 0; k < spec.q; ++k) {
                lo[k] = std::min(lo[k], d[k]);
                hi[k] = std::max(hi[k], d[k]);
            }
        return {lo, hi};
    }
    const DisturbanceVector d = demand_at(cfg.demand, spec, 0);
    return {d, d};
}

inline void run_reach(const ScenarioConfig& cfg, const std::filesystem::path& dir, const std::string& prefix) {
    if (cfg.network.topology != Topology::simple)
        throw UnsupportedTopology("reach: interval reachability supports the simple freeway only; the diverging "
                                  "freeway is not monotone");
    if (std::holds_alternative<Feedback>(cfg.policy) || std::holds_alternative<RecedingHorizon>(cfg.policy))
        throw ConfigError("$.policy: reach needs a state-independent control (no_metering or fixed_rate)");
    const NetworkSpec& spec = cfg.network;
    IntervalBox box;
    if (cfg.reach.lower) {
        box = {*cfg.reach.lower, *cfg.reach.upper};
    } else {
        box = {cfg.x0, cfg.x0};
        for (std::size_t k = 0; k < spec.n; ++k) {
            box.lower[k] = std::max(0.0, box.lower[k] - cfg.reach.radius);
            box.upper[k] += cfg.reach.radius;
        }
    }
    const auto [d_lo, d_hi] = reach_disturbance_bounds(cfg);
    Policy policy(cfg.policy);
    std::vector<ControlVector> controls;
    for (long t = 0; t < cfg.horizon; ++t) controls.push_back(policy.apply(spec, cfg.x0, t));
    const IntervalReach reach(spec);
    const auto tube = reach.tube(box, controls, d_lo, d_hi, cfg.horizon);
    auto out = open_output(dir, prefix, cfg.outputs.reach_csv);
    write_reach_csv(out, spec, tube);
}

} // namespace detail

/// Executes one subcommand on an already-parsed scenario. Throws on error.
inline void execute(Command cmd, const ScenarioConfig& cfg, const RunOptions& opt) {
    const auto dir = resolve_out_dir(opt);
    const auto& outs = cfg.outputs;
    switch (cmd) {
    case Command::simulate: {
        const Trajectory traj = detail::run_trajectory(cfg);
        {
            auto out = detail::open_output(dir, opt.prefix, outs.trace_csv);
            write_trace_csv(out, traj);
        }
        detail::write_json(dir, opt.prefix, outs.metrics_json, to_json(metrics_report(traj, cfg.gamma)));
        break;
    }
    case Command::metrics: {
        const Trajectory traj = detail::run_trajectory(cfg);
        detail::write_json(dir, opt.prefix, outs.metrics_json, to_json(metrics_report(traj, cfg.gamma)));
        break;
    }
    case Command::pwa: {
        nlohmann::json j;
        j["layout"] = layout_json(cfg.network);
        if (cfg.pwa_along_trace) {
            const Trajectory traj = detail::run_trajectory(cfg);
            nlohmann::json records = nlohmann::json::array();
            for (const auto& r : traj.steps) records.push_back(pwa_record_json(cfg.network, r.t, r.x, r.u, r.d));
            j["records"] = std::move(records);
            j["distinct_signatures"] = collect_signatures(traj).size();
        } else {
            Policy policy(cfg.policy);
            const ControlVector u = policy.apply(cfg.network, cfg.x0, 0);
            j["records"] = nlohmann::json::array({pwa_record_json(
                cfg.network, 0, cfg.x0, u, demand_at(cfg.demand, cfg.network, 0))});
        }
        detail::write_json(dir, opt.prefix, outs.pwa_json, j);
        break;
    }
    case Command::reach:
        detail::run_reach(cfg, dir, opt.prefix);
        break;
    case Command::feasibility: {
        std::vector<PolicySpec> policies = cfg.feasibility.policies;
        if (policies.empty()) policies.push_back(cfg.policy);
        const auto report =
            feasibility_probe(cfg.network, cfg.x0, cfg.demand, policies, cfg.horizon, cfg.feasibility.bound);
        detail::write_json(dir, opt.prefix, outs.feasibility_json, to_json(report));
        break;
    }
    }
}

/// Loads `config`, runs `cmd` and maps failures onto exit codes:
/// 2 for configuration errors, 3 for domain errors, 1 for anything else.
inline int run(Command cmd, const std::filesystem::path& config, const RunOptions& opt, std::ostream& err) {
    try {
        const ScenarioConfig cfg = load_config(config, opt.seed);
        execute(cmd, cfg, opt);
        return ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return domain_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
}

} // namespace freeway::cli
