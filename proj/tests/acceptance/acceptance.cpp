// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "freeway/freeway.hpp"
#include "test_helpers.hpp"

using namespace freeway;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
    double worst = 0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

// Trajectories from the other criteria, reused by the conservation check.
std::vector<Trajectory> trajectories;

Outcome critical_occupancy_exact() {
    const double xc = critical_occupancy(LinkParams{});
    return {xc == 80.0, "x_crit = " + fmt("%.17g", xc)};
}

Outcome equilibrium_fixed_point() {
    double worst_state = 0, worst_flow = 0, worst_w = 0;
    for (int N : {2, 3, 10}) {
        const auto s = build_simple(N);
        StateVector x(s.n);
        for (std::size_t k = 0; k < s.n; ++k) x[k] = s.states[k].kind == LinkKind::mainline ? 80.0 : 20.0;
        const auto d = demand_at(CuspDemand{}, s, 0);
        const auto r = step(s, x, ControlVector(s.m, 10.0), d);
        worst_state = std::max(worst_state, max_abs_diff(r.next, x));
        for (std::size_t k = 0; k < s.n; ++k)
            if (s.states[k].kind == LinkKind::mainline) worst_flow = std::max(worst_flow, std::abs(r.flows[k] - 40.0));
        worst_w = std::max(worst_w, std::abs(throughput(s, x) - (10.0 * (N - 1) + 40.0)));
    }
    const bool ok = worst_state <= 1e-9 && worst_flow <= 1e-9 && worst_w <= 1e-9;
    return {ok, "max |step(x)-x| = " + fmt("%.3g", worst_state) + ", max |flow-40| = " + fmt("%.3g", worst_flow) +
                    ", max |W-W*| = " + fmt("%.3g", worst_w)};
}

Outcome convergence() {
    const auto s = build_simple(3);
    Policy p(FixedRate{{10.0}});
    auto traj = simulate(s, StateVector(s.n, 0.0), p, CuspDemand{}, 5000);
    const auto& xT = traj.back().x;
    const double gap = max_abs_diff(xT, cusp_fixed_point(s, CuspDemand{}));
    const double residual = max_abs_diff(step(s, xT, {10, 10}, demand_at(CuspDemand{}, s, 5000)).next, xT);
    trajectories.push_back(std::move(traj));
    return {gap <= 1e-6 && residual <= 1e-9,
            "|x(5000)-x*| = " + fmt("%.3g", gap) + ", step residual = " + fmt("%.3g", residual)};
}

Outcome infeasibility_growth() {
    const auto s = build_simple(3);
    const double eps = 1.0;
    const CuspDemand demand{{eps, 0.0}};
    const double expected = 5000 * eps;
    bool ok = true;
    std::string detail;
    for (const PolicySpec& spec : {PolicySpec{NoMetering{}}, PolicySpec{FixedRate{{10.0}}}}) {
        Policy p(spec);
        auto traj = simulate(s, StateVector(s.n, 0.0), p, demand, 10000);
        const double growth = entry_occupancy(s, traj.steps[10000].x) - entry_occupancy(s, traj.steps[5000].x);
        const double rel = std::abs(growth - expected) / expected;
        ok = ok && rel <= 0.2;
        if (!detail.empty()) detail += "; ";
        detail += p.name() + " growth " + fmt("%.6g", growth) + " (" + fmt("%+.1f", 100 * (growth - expected) / expected) +
                  "% vs 5000)";
        trajectories.push_back(std::move(traj));
    }
    return {ok, detail};
}

Outcome pwa_equivalence() {
    double worst = 0;
    for (const auto& s : {build_simple(4), build_diverging(2, 3)}) {
        SplitMix64 rng{0xACCE97};
        for (int k = 0; k < 10000; ++k) {
            const auto smp = freeway::testing::random_sample(s, rng);
            worst = std::max(worst, verify_affine(s, smp.x, smp.u, smp.d));
        }
    }
    return {worst <= 1e-9, "max discrepancy = " + fmt("%.3g", worst)};
}

Outcome bound_preservation() {
    std::size_t violations = 0;
    SplitMix64 rng{0xB0B};
    for (int sim = 0; sim < 1000; ++sim) {
        const auto s = sim % 2 == 0 ? build_simple(4) : build_diverging(2, 3);
        const auto& p = s.params;
        StateVector x(s.n);
        for (auto& a : x) a = rng.uniform(0.0, p.x_bar);
        auto u_of = [&](const StateVector&, long) {
            ControlVector u(s.m);
            for (auto& a : u) a = rng.uniform(0.0, p.c);
            return u;
        };
        auto d_of = [&](long) {
            DisturbanceVector d(s.q);
            for (auto& a : d) a = rng.uniform(0.0, p.c);
            return d;
        };
        auto traj = simulate(s, x, u_of, d_of, 200);
        for (const auto& r : traj.steps)
            for (std::size_t k = 0; k < s.n; ++k)
                if (r.x[k] < 0.0 || (s.has_upstream[k] && r.x[k] > p.x_bar)) ++violations;
        if (sim < 20) trajectories.push_back(std::move(traj));
    }
    return {violations == 0, std::to_string(violations) + " violations in 1000 x 200 steps"};
}

Outcome order_preservation() {
    const auto s = build_simple(4);
    const auto& p = s.params;
    SplitMix64 rng{0x0DE7};
    std::size_t violations = 0;
    for (int pair = 0; pair < 1000; ++pair) {
        StateVector lo(s.n), hi(s.n);
        for (std::size_t k = 0; k < s.n; ++k) {
            const double a = rng.uniform(0.0, p.x_bar), b = rng.uniform(0.0, p.x_bar);
            lo[k] = std::min(a, b);
            hi[k] = std::max(a, b);
        }
        bool broken = false;
        for (int t = 0; t < 100 && !broken; ++t) {
            ControlVector u(s.m);
            for (auto& a : u) a = rng.uniform(0.0, p.c);
            DisturbanceVector d(s.q);
            for (auto& a : d) a = rng.uniform(0.0, p.c);
            lo = step(s, lo, u, d).next;
            hi = step(s, hi, u, d).next;
            for (std::size_t k = 0; k < s.n; ++k) broken = broken || lo[k] > hi[k];
        }
        violations += broken;
    }
    return {violations == 0, std::to_string(violations) + " of 1000 pairs lost their order"};
}

Outcome reach_soundness() {
    const auto s = build_simple(3);
    const IntervalReach reach(s);
    const auto fp = cusp_fixed_point(s, CuspDemand{});
    IntervalBox init{fp, fp};
    for (auto& a : init.lower) a -= 10;
    for (auto& a : init.upper) a += 10;
    const DisturbanceVector d_lo{40, 8, 8}, d_hi{40, 12, 12};
    const ControlVector u{10, 10};
    const long T = 50;
    const auto tube = reach.tube(init, std::vector<ControlVector>(T, u), d_lo, d_hi, T);
    SplitMix64 rng{0x7EAC};
    std::size_t escapes = 0;
    for (int trial = 0; trial < 100; ++trial) {
        StateVector x(s.n);
        for (std::size_t k = 0; k < s.n; ++k) x[k] = rng.uniform(init.lower[k], init.upper[k]);
        for (long t = 0;; ++t) {
            escapes += !tube[static_cast<std::size_t>(t)].contains(x);
            if (t == T) break;
            DisturbanceVector d(s.q);
            for (std::size_t k = 0; k < s.q; ++k) d[k] = rng.uniform(d_lo[k], d_hi[k]);
            x = step(s, x, u, d).next;
        }
    }
    return {escapes == 0, std::to_string(escapes) + " escapes over 100 traces x 51 boxes"};
}

Outcome conservation() {
    double worst = 0;
    std::size_t steps = 0;
    for (const auto& traj : trajectories) {
        for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
            const auto& r = traj.steps[t];
            const auto res = step(traj.spec, r.x, r.u, r.d);
            worst = std::max(worst, std::abs(freeway::testing::balance_residual(traj.spec, r.x, r.d, res)));
            worst = std::max(worst, max_abs_diff(res.next, traj.steps[t + 1].x));
            ++steps;
        }
    }
    return {steps > 0 && worst <= 1e-9,
            std::to_string(steps) + " steps over " + std::to_string(trajectories.size()) +
                " trajectories, max residual = " + fmt("%.3g", worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const fs::path scenarios = FREEWAY_SCENARIO_DIR;
    const fs::path root = fs::temp_directory_path() / "freeway_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"simulate", "random_feedback.json"}, {"pwa", "random_feedback.json"},
        {"reach", "reach_box.json"},         {"feasibility", "cusp_excess.json"},
        {"simulate", "receding_horizon.json"}};
    for (const char* tag : {"a", "b"}) {
        for (const auto& [cmd, cfg] : runs) {
            const std::string line = std::string(FREEWAY_CLI_PATH) + " " + cmd + " " + (scenarios / cfg).string() +
                                     " --seed 42 --out " + (root / tag / fs::path(cfg).stem()).string();
            const int status = std::system(line.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "CLI run failed: " + line};
        }
    }
    std::size_t files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        differing += slurp(e.path()) != slurp(root / "b" / fs::relative(e.path(), root / "a"));
    }
    fs::remove_all(root);
    return {files > 0 && differing == 0,
            std::to_string(files) + " output files compared, " + std::to_string(differing) + " differ"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"critical occupancy is exactly 80", critical_occupancy_exact},
        {"equilibrium fixed point, N in {2, 3, 10}", equilibrium_fixed_point},
        {"convergence to the fixed point by t = 5000", convergence},
        {"entry queue growth 5000 eps within 20% (no metering, fixed rate 10)", infeasibility_growth},
        {"affine region dynamics match step on 2 x 10^4 samples", pwa_equivalence},
        {"mass balance on every simulated step", nullptr},
        {"occupancy bounds over 1000 random simulations", bound_preservation},
        {"monotone order preservation, N = 4", order_preservation},
        {"interval reach tube soundness", reach_soundness},
        {"byte-identical CLI outputs across runs", determinism},
    };
    // Conservation runs last so it sees every trajectory; print in order.
    std::vector<Outcome> results(criteria.size());
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!criteria[k].second) continue;
        try {
            results[k] = criteria[k].second();
        } catch (const std::exception& e) {
            results[k] = {false, std::string("threw: ") + e.what()};
        }
    }
    try {
        results[5] = conservation();
    } catch (const std::exception& e) {
        results[5] = {false, std::string("threw: ") + e.what()};
    }
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        std::printf("criterion %2zu: %s  %s [%s]\n", k + 1, results[k].pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    results[k].detail.c_str());
        failures += !results[k].pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
