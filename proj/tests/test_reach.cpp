#include <gtest/gtest.h>

#include "freeway/reach.hpp"
#include "test_helpers.hpp"

using namespace freeway;

TEST(IntervalStep, DegenerateBoxIsPointStep) {
    const auto s = build_simple(3);
    const IntervalReach reach(s);
    const StateVector x{50, 120, 300, 30, 5};
    const DisturbanceVector d{20, 7, 12};
    const auto box = reach.step({x, x}, {10, 25}, d, d);
    const auto exact = step(s, x, {10, 25}, d).next;
    EXPECT_EQ(box.lower, exact);
    EXPECT_EQ(box.upper, exact);
}

TEST(IntervalStep, BoxAroundFixedPointContainsIt) {
    const auto s = build_simple(3);
    const auto fp = cusp_fixed_point(s, CuspDemand{});
    IntervalBox box{fp, fp};
    for (auto& a : box.lower) a -= 5;
    for (auto& a : box.upper) a += 5;
    const auto d = demand_at(CuspDemand{}, s, 0);
    const auto out = interval_step(s, box, {10, 10}, d, d);
    EXPECT_TRUE(out.contains(fp));
}

TEST(IntervalStep, MonteCarloSoundness) {
    const auto s = build_simple(3);
    const IntervalReach reach(s);
    const auto fp = cusp_fixed_point(s, CuspDemand{});
    IntervalBox init{fp, fp};
    for (auto& a : init.lower) a -= 10;
    for (auto& a : init.upper) a += 10;
    const DisturbanceVector d_lo{40, 8, 8}, d_hi{40, 12, 12};
    const long T = 50;
    const auto tube = reach.tube(init, std::vector<ControlVector>(T, ControlVector{10, 10}), d_lo, d_hi, T);

    SplitMix64 rng{31};
    std::size_t escapes = 0;
    for (int trial = 0; trial < 100; ++trial) {
        StateVector x(s.n);
        for (std::size_t k = 0; k < s.n; ++k) x[k] = rng.uniform(init.lower[k], init.upper[k]);
        for (long t = 0; t <= T; ++t) {
            if (!tube[static_cast<std::size_t>(t)].contains(x)) ++escapes;
            if (t == T) break;
            DisturbanceVector d(s.q);
            for (std::size_t k = 0; k < s.q; ++k) d[k] = rng.uniform(d_lo[k], d_hi[k]);
            x = step(s, x, {10, 10}, d).next;
        }
    }
    EXPECT_EQ(escapes, 0u);
}

TEST(IntervalStep, ShrinkingInputNeverGrowsOutput) {
    const auto s = build_simple(4);
    const IntervalReach reach(s);
    SplitMix64 rng{17};
    for (int k = 0; k < 500; ++k) {
        const auto a = freeway::testing::random_sample(s, rng);
        const auto b = freeway::testing::random_sample(s, rng);
        IntervalBox outer{a.x, a.x}, inner{a.x, a.x};
        for (std::size_t i = 0; i < s.n; ++i) {
            outer.lower[i] = std::min(a.x[i], b.x[i]);
            outer.upper[i] = std::max(a.x[i], b.x[i]);
            const double mid = 0.5 * (outer.lower[i] + outer.upper[i]);
            inner.lower[i] = 0.5 * (outer.lower[i] + mid);
            inner.upper[i] = 0.5 * (mid + outer.upper[i]);
        }
        const DisturbanceVector d_lo(s.q, 5.0), d_hi(s.q, 15.0), d_mid(s.q, 10.0);
        const auto big = reach.step(outer, a.u, d_lo, d_hi);
        const auto small = reach.step(inner, a.u, d_mid, d_mid);
        for (std::size_t i = 0; i < s.n; ++i) {
            EXPECT_LE(big.lower[i], small.lower[i]);
            EXPECT_GE(big.upper[i], small.upper[i]);
        }
    }
}

TEST(IntervalStep, DivergingIsUnsupported) {
    EXPECT_THROW(IntervalReach(build_diverging(2, 3)), UnsupportedTopology);
    EXPECT_THROW(IntervalReach(build_diverging(2, 3)), DomainError);
}

TEST(IntervalStep, RejectsNonMonotoneParameters) {
    LinkParams p;
    p.c = 1000.0; // supply binds while demand is still rising
    p.v = 1.0;
    p.w = 0.9;
    p.alpha_bar = 0.1;
    ASSERT_NO_THROW(p.validate());
    const auto s = build_simple(3, p);
    ASSERT_GT(count_monotonicity_violations(s, 2000, 1), 0u);
    EXPECT_THROW(IntervalReach{s}, DomainError);
}

TEST(IntervalStep, RejectsInvertedBounds) {
    const auto s = build_simple(2);
    const IntervalReach reach(s);
    EXPECT_THROW(reach.step({{5, 5, 5}, {4, 5, 5}}, {10}, {0, 0}, {0, 0}), DomainError);
    EXPECT_THROW(reach.step({{5, 5, 5}, {5, 5, 5}}, {10}, {1, 0}, {0, 0}), DomainError);
    EXPECT_THROW(reach.step({{5, 5}, {5, 5}}, {10}, {0, 0}, {0, 0}), ContractError);
}

TEST(Monotonicity, TableParametersPass) {
    EXPECT_EQ(count_monotonicity_violations(build_simple(4), 5000, 9), 0u);
}
