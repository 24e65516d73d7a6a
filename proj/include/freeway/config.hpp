#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeway/control.hpp"
#include "freeway/errors.hpp"
#include "freeway/fundamental.hpp"
#include "freeway/network.hpp"
#include "freeway/scenario.hpp"

namespace freeway {

struct OutputPaths {
    std::string trace_csv = "trace.csv";
    std::string metrics_json = "metrics.json";
    std::string pwa_json = "pwa.json";
    std::string reach_csv = "reach.csv";
    std::string feasibility_json = "feasibility.json";
};

struct ReachConfig {
    double radius = 0.0;
    std::optional<StateVector> lower;
    std::optional<StateVector> upper;
    std::optional<DisturbanceVector> d_lower;
    std::optional<DisturbanceVector> d_upper;
};

struct FeasibilityConfig {
    double bound = 1e4;
    std::vector<PolicySpec> policies; // empty: probe the scenario policy
};

enum class InitialKind { zeros, fixed_point, explicit_vector };

/// A fully validated scenario.
struct ScenarioConfig {
    NetworkSpec network;
    InitialKind initial_kind = InitialKind::zeros;
    StateVector x0;
    DemandProfile demand;
    PolicySpec policy = NoMetering{};
    long horizon = 1;
    OutputPaths outputs;
    std::uint64_t seed = 0;
    double gamma = 0.99;
    bool pwa_along_trace = false;
    ReachConfig reach;
    FeasibilityConfig feasibility;
};

/// Parses "p/q" or a plain decimal. Each side is read as an exact decimal
/// fraction and the quotient is rounded to double once, so "0.5/3" and "1/6"
/// give the same double.
inline double parse_rational(const std::string& text, const std::string& where) {
    auto fail = [&] { throw ConfigError(where + ": cannot parse number '" + text + "'"); };
    // Decimal string -> (mantissa, power of ten) with mantissa < 2^53.
    auto decimal = [&](std::string s, std::int64_t& mant, std::int64_t& scale) {
        if (s.empty()) fail();
        bool neg = false;
        if (s[0] == '-' || s[0] == '+') {
            neg = s[0] == '-';
            s.erase(0, 1);
        }
        if (s.empty()) fail();
        mant = 0;
        scale = 1;
        bool dot = false;
        bool digits = false;
        for (char ch : s) {
            if (ch == '.') {
                if (dot) fail();
                dot = true;
                continue;
            }
            if (ch < '0' || ch > '9') fail();
            digits = true;
            if (mant > (std::int64_t{1} << 53) / 10) return false;
            mant = mant * 10 + (ch - '0');
            if (dot) {
                if (scale > std::numeric_limits<std::int64_t>::max() / 10) return false;
                scale *= 10;
            }
        }
        if (!digits) fail();
        if (neg) mant = -mant;
        return true;
    };
    const auto slash = text.find('/');
    const std::string num = text.substr(0, slash);
    const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
    std::int64_t n1 = 0, s1 = 1, n2 = 0, s2 = 1;
    const bool exact = decimal(num, n1, s1) && decimal(den, n2, s2);
    if (exact && n2 == 0) throw ConfigError(where + ": division by zero in '" + text + "'");
    constexpr __int128 limit = __int128{1} << 53;
    if (exact) {
        const __int128 a = static_cast<__int128>(n1) * s2;
        const __int128 b = static_cast<__int128>(s1) * n2;
        if (a < limit && a > -limit && b < limit && b > -limit)
            return static_cast<double>(static_cast<std::int64_t>(a)) / static_cast<double>(static_cast<std::int64_t>(b));
    }
    try {
        const double b = std::stod(den);
        if (b == 0.0) throw ConfigError(where + ": division by zero in '" + text + "'");
        return std::stod(num) / b;
    } catch (const std::logic_error&) {
        fail();
    }
    return 0.0;
}

namespace detail {

/// Reads one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key);
    }

    const nlohmann::json& at(const std::string& key) {
        known_.insert(key);
        if (!j_.contains(key)) throw ConfigError(path_ + ": missing required key '" + key + "'");
        return j_.at(key);
    }

    std::string child(const std::string& key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }

    double real(const std::string& key) { return to_real(at(key), child(key)); }
    double real_or(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }

    long integer(const std::string& key) { return to_integer(at(key), child(key)); }

    std::string string(const std::string& key) {
        const auto& v = at(key);
        if (!v.is_string()) throw ConfigError(child(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> reals(const std::string& key) { return to_reals(at(key), child(key)); }

    /// Call after all reads; throws on any unknown key.
    void finish() const {
        for (const auto& item : j_.items())
            if (!known_.count(item.key())) throw ConfigError("unknown key " + child(item.key()));
    }

    static double to_real(const nlohmann::json& v, const std::string& where) {
        double out = 0.0;
        if (v.is_number())
            out = v.get<double>();
        else if (v.is_string())
            out = parse_rational(v.get<std::string>(), where);
        else
            throw ConfigError(where + ": expected a number or a rational string");
        if (!std::isfinite(out)) throw ConfigError(where + ": number must be finite");
        return out;
    }

    static long to_integer(const nlohmann::json& v, const std::string& where) {
        if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
        return v.get<long>();
    }

    static std::vector<double> to_reals(const nlohmann::json& v, const std::string& where) {
        if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back(to_real(v[k], where + "[" + std::to_string(k) + "]"));
        return out;
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> known_;
};

inline void require_size(const std::vector<double>& v, std::size_t n, const std::string& where) {
    if (v.size() != n)
        throw ConfigError(where + ": expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
}

inline NetworkSpec parse_network(const nlohmann::json& j, const LinkParams& params) {
    ObjectReader r(j, "$.network");
    const std::string type = r.string("type");
    NetworkSpec spec;
    if (type == "simple") {
        spec = build_simple(static_cast<int>(r.integer("N")), params);
    } else if (type == "diverging") {
        const long M = r.integer("M");
        spec = build_diverging(static_cast<int>(M), static_cast<int>(r.integer("N")), params);
    } else {
        throw ConfigError("$.network.type: expected 'simple' or 'diverging', got '" + type + "'");
    }
    r.finish();
    return spec;
}

inline LinkParams parse_params(const nlohmann::json& j) {
    ObjectReader r(j, "$.params");
    LinkParams p;
    p.c = r.real_or("c", p.c);
    p.v = r.real_or("v", p.v);
    p.w = r.real_or("w", p.w);
    p.x_bar = r.real_or("x_bar", p.x_bar);
    p.beta = r.real_or("beta", p.beta);
    p.alpha = r.real_or("alpha", p.alpha);
    p.alpha_bar = r.real_or("alpha_bar", p.alpha_bar);
    r.finish();
    p.validate();
    return p;
}

inline DemandProfile parse_demand(const nlohmann::json& j, const NetworkSpec& spec, std::uint64_t seed,
                                  bool seed_forced) {
    ObjectReader r(j, "$.demand");
    const std::string type = r.string("type");
    DemandProfile out;
    if (type == "constant") {
        ConstantDemand c{r.reals("d")};
        require_size(c.d, spec.q, r.child("d"));
        out = c;
    } else if (type == "cusp") {
        CuspDemand c;
        if (r.has("epsilon")) {
            const auto& e = r.at("epsilon");
            if (e.is_array()) {
                c.epsilon = ObjectReader::to_reals(e, r.child("epsilon"));
                require_size(c.epsilon, spec.m, r.child("epsilon"));
            } else {
                c.epsilon.assign(spec.m, ObjectReader::to_real(e, r.child("epsilon")));
            }
        }
        c.mainline_rate = r.real_or("mainline_rate", c.mainline_rate);
        c.onramp_base = r.real_or("onramp_base", c.onramp_base);
        out = c;
    } else if (type == "interval_random") {
        IntervalRandomDemand d{r.reals("center"), r.reals("delta"), seed};
        require_size(d.center, spec.q, r.child("center"));
        require_size(d.delta, spec.q, r.child("delta"));
        if (r.has("seed") && !seed_forced) {
            const long s = r.integer("seed");
            if (s < 0) throw ConfigError(r.child("seed") + ": must be >= 0");
            d.seed = static_cast<std::uint64_t>(s);
        }
        out = d;
    } else if (type == "trace") {
        const auto& rows = r.at("d");
        if (!rows.is_array() || rows.empty()) throw ConfigError(r.child("d") + ": expected a non-empty array of rows");
        TraceDemand t;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::string where = r.child("d") + "[" + std::to_string(k) + "]";
            t.trace.push_back(ObjectReader::to_reals(rows[k], where));
            require_size(t.trace.back(), spec.q, where);
        }
        out = t;
    } else {
        throw ConfigError("$.demand.type: unknown demand type '" + type + "'");
    }
    r.finish();
    // Surface sign and range problems now rather than mid-simulation.
    if (!std::holds_alternative<TraceDemand>(out)) (void)demand_at(out, spec, 0);
    else
        for (std::size_t t = 0; t < std::get<TraceDemand>(out).trace.size(); ++t)
            (void)demand_at(out, spec, static_cast<long>(t));
    return out;
}

inline PolicySpec parse_policy(const nlohmann::json& j, const std::string& path, const NetworkSpec& spec,
                               const DemandProfile& forecast) {
    ObjectReader r(j, path);
    const std::string type = r.string("type");
    PolicySpec out;
    if (type == "no_metering") {
        out = NoMetering{};
    } else if (type == "fixed_rate") {
        const auto& v = r.at("rates");
        FixedRate f;
        if (v.is_array()) {
            f.rates = ObjectReader::to_reals(v, r.child("rates"));
            if (f.rates.size() != 1) require_size(f.rates, spec.m, r.child("rates"));
        } else {
            f.rates = {ObjectReader::to_real(v, r.child("rates"))};
        }
        out = f;
    } else if (type == "feedback") {
        Feedback f;
        f.gain = r.real("gain");
        f.target = r.real_or("target", critical_occupancy(spec.params));
        f.u_min = r.real_or("u_min", 0.0);
        f.u_max = r.real_or("u_max", spec.params.c);
        if (r.has("u_init")) f.u_init = r.real("u_init");
        out = f;
    } else if (type == "receding_horizon") {
        RecedingHorizon h;
        h.horizon = static_cast<int>(r.integer("H"));
        if (r.has("grid")) h.grid = r.reals("grid");
        if (r.has("objective")) {
            const std::string o = r.string("objective");
            if (o == "min_ttt")
                h.objective = Objective::min_ttt;
            else if (o == "max_throughput")
                h.objective = Objective::max_throughput;
            else
                throw ConfigError(r.child("objective") + ": expected 'min_ttt' or 'max_throughput'");
        }
        if (r.has("beam")) {
            const long b = r.integer("beam");
            if (b < 1) throw ConfigError(r.child("beam") + ": must be >= 1");
            h.beam = static_cast<std::size_t>(b);
        }
        h.forecast = forecast;
        out = h;
    } else {
        throw ConfigError(r.child("type") + ": unknown policy type '" + type + "'");
    }
    r.finish();
    validate_policy(out);
    return out;
}

} // namespace detail

/// Builds a ScenarioConfig from parsed JSON. `seed_override` (the --seed flag)
/// replaces both the top-level seed and any demand-level seed.
inline ScenarioConfig parse_config(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = {}) {
    using detail::ObjectReader;
    ObjectReader r(j, "$");
    ScenarioConfig cfg;

    if (r.has("seed")) {
        const long s = r.integer("seed");
        if (s < 0) throw ConfigError("$.seed: must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (seed_override) cfg.seed = *seed_override;

    const LinkParams params = r.has("params") ? detail::parse_params(r.at("params")) : LinkParams{};
    cfg.network = detail::parse_network(r.at("network"), params);
    const NetworkSpec& spec = cfg.network;

    cfg.horizon = r.integer("horizon");
    if (cfg.horizon < 1) throw ConfigError("$.horizon: must be >= 1, got " + std::to_string(cfg.horizon));

    cfg.demand = detail::parse_demand(r.at("demand"), spec, cfg.seed, seed_override.has_value());
    cfg.policy = r.has("policy") ? detail::parse_policy(r.at("policy"), "$.policy", spec, cfg.demand) : NoMetering{};

    if (r.has("initial_state")) {
        const auto& v = r.at("initial_state");
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "zeros") {
                cfg.initial_kind = InitialKind::zeros;
            } else if (s == "fixed_point") {
                cfg.initial_kind = InitialKind::fixed_point;
            } else {
                throw ConfigError("$.initial_state: expected 'zeros', 'fixed_point' or an array");
            }
        } else {
            cfg.initial_kind = InitialKind::explicit_vector;
            cfg.x0 = ObjectReader::to_reals(v, "$.initial_state");
            detail::require_size(cfg.x0, spec.n, "$.initial_state");
            for (std::size_t k = 0; k < spec.n; ++k) {
                if (!(cfg.x0[k] >= 0.0)) throw ConfigError("$.initial_state: occupancies must be >= 0");
                if (spec.has_upstream[k] && cfg.x0[k] > spec.params.x_bar)
                    throw ConfigError("$.initial_state: link " + spec.states[k].label() + " exceeds x_bar");
            }
        }
    }
    if (cfg.initial_kind == InitialKind::zeros) cfg.x0.assign(spec.n, 0.0);
    if (cfg.initial_kind == InitialKind::fixed_point) {
        const auto* cusp = std::get_if<CuspDemand>(&cfg.demand);
        if (!cusp) throw ConfigError("$.initial_state: fixed_point requires a cusp demand profile");
        cfg.x0 = cusp_fixed_point(spec, *cusp);
    }

    if (r.has("outputs")) {
        ObjectReader o(r.at("outputs"), "$.outputs");
        auto take = [&](const char* key, std::string& dst) {
            if (o.has(key)) dst = o.string(key);
        };
        take("trace_csv", cfg.outputs.trace_csv);
        take("metrics_json", cfg.outputs.metrics_json);
        take("pwa_json", cfg.outputs.pwa_json);
        take("reach_csv", cfg.outputs.reach_csv);
        take("feasibility_json", cfg.outputs.feasibility_json);
        o.finish();
    }

    if (r.has("metrics")) {
        ObjectReader m(r.at("metrics"), "$.metrics");
        cfg.gamma = m.real_or("gamma", cfg.gamma);
        m.finish();
        if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("$.metrics.gamma: must lie in (0, 1)");
    }

    if (r.has("pwa")) {
        ObjectReader p(r.at("pwa"), "$.pwa");
        if (p.has("along_trace")) {
            const auto& v = p.at("along_trace");
            if (!v.is_boolean()) throw ConfigError("$.pwa.along_trace: expected a boolean");
            cfg.pwa_along_trace = v.get<bool>();
        }
        p.finish();
    }

    if (r.has("reach")) {
        ObjectReader q(r.at("reach"), "$.reach");
        cfg.reach.radius = q.real_or("radius", 0.0);
        if (!(cfg.reach.radius >= 0.0)) throw ConfigError("$.reach.radius: must be >= 0");
        auto vec = [&](const char* key, std::size_t n, std::optional<std::vector<double>>& dst) {
            if (!q.has(key)) return;
            dst = q.reals(key);
            detail::require_size(*dst, n, q.child(key));
        };
        vec("lower", spec.n, cfg.reach.lower);
        vec("upper", spec.n, cfg.reach.upper);
        vec("d_lower", spec.q, cfg.reach.d_lower);
        vec("d_upper", spec.q, cfg.reach.d_upper);
        q.finish();
        if (cfg.reach.lower.has_value() != cfg.reach.upper.has_value())
            throw ConfigError("$.reach: 'lower' and 'upper' must be given together");
        if (cfg.reach.d_lower.has_value() != cfg.reach.d_upper.has_value())
            throw ConfigError("$.reach: 'd_lower' and 'd_upper' must be given together");
    }

    if (r.has("feasibility")) {
        ObjectReader f(r.at("feasibility"), "$.feasibility");
        cfg.feasibility.bound = f.real_or("bound", cfg.feasibility.bound);
        if (!(cfg.feasibility.bound > 0.0)) throw ConfigError("$.feasibility.bound: must be > 0");
        if (f.has("policies")) {
            const auto& list = f.at("policies");
            if (!list.is_array()) throw ConfigError("$.feasibility.policies: expected an array");
            for (std::size_t k = 0; k < list.size(); ++k)
                cfg.feasibility.policies.push_back(detail::parse_policy(
                    list[k], "$.feasibility.policies[" + std::to_string(k) + "]", spec, cfg.demand));
        }
        f.finish();
    }

    r.finish();
    return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j, seed_override);
}

} // namespace freeway
