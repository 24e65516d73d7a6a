#include <gtest/gtest.h>

#include "freeway/junctions.hpp"
#include "freeway/scenario.hpp"

using namespace freeway;

namespace {
const LinkParams std_params;
}

TEST(SimpleJunction, Examples) {
    EXPECT_NEAR(simple_junction_flow(std_params, 10, 10), 5.0, 1e-12);
    EXPECT_EQ(simple_junction_flow(std_params, 100, 320), 0.0);
    EXPECT_NEAR(simple_junction_flow(std_params, 100, 200), 20.0, 1e-12);
}

TEST(Merge, FreeFlowOnrampMetered) {
    const auto f = merge_flow(std_params, 60, 20, 100, 10);
    EXPECT_NEAR(f.mainline_out, 30.0, 1e-12);
    EXPECT_NEAR(f.onramp_out, 10.0, 1e-12);
    EXPECT_NEAR(f.into_downstream_from_mainline, 22.5, 1e-12);
    EXPECT_NEAR(f.into_downstream_from_onramp, 10.0, 1e-12);
}

TEST(Merge, EmptyUpstreamSendsNothing) {
    const auto f = merge_flow(std_params, 0, 0, 150, 40);
    EXPECT_EQ(f.mainline_out, 0.0);
    EXPECT_EQ(f.onramp_out, 0.0);
    EXPECT_EQ(f.into_downstream_from_mainline, 0.0);
    EXPECT_EQ(f.into_downstream_from_onramp, 0.0);
}

TEST(Merge, NearlyJammedDownstream) {
    const auto f = merge_flow(std_params, 100, 100, 310, 40);
    EXPECT_NEAR(f.mainline_out, 20.0 / 9.0, 1e-12);
    EXPECT_NEAR(f.onramp_out, 25.0 / 3.0, 1e-12);
    EXPECT_NEAR(f.into_downstream_from_mainline, 5.0 / 3.0, 1e-12);
}

TEST(Merge, RejectsNegativeRate) { EXPECT_THROW(merge_flow(std_params, 10, 10, 10, -1), DomainError); }

TEST(Merge, Properties) {
    SplitMix64 rng{7};
    for (int k = 0; k < 5000; ++k) {
        const double x1 = rng.uniform(0, 320), x2 = rng.uniform(0, 320), x3 = rng.uniform(0, 320);
        const double u = rng.uniform(0, 40), du = rng.uniform(0, 10);
        const auto f = merge_flow(std_params, x1, x2, x3, u);
        const auto g = merge_flow(std_params, x1, x2, x3, u + du);
        EXPECT_EQ(f.into_downstream_from_mainline, std_params.beta * f.mainline_out);
        EXPECT_EQ(f.into_downstream_from_onramp, f.onramp_out);
        EXPECT_LE(f.mainline_out, demand(std_params, x1));
        EXPECT_LE(f.onramp_out, std::min(demand(std_params, x2), u));
        for (double a : {f.mainline_out, f.onramp_out, f.into_downstream_from_mainline}) {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, std_params.c);
        }
        // Control only moves the onramp fields, never down.
        EXPECT_EQ(f.mainline_out, g.mainline_out);
        EXPECT_LE(f.onramp_out, g.onramp_out);
    }
}

TEST(Diverge, Examples) {
    auto f = diverge_flow(std_params, 100, 40, 300);
    EXPECT_NEAR(f.upstream_out, 20.0 / 3.0, 1e-12);
    EXPECT_NEAR(f.into_branch_a, 10.0 / 3.0, 1e-12);
    EXPECT_NEAR(f.into_branch_b, 10.0 / 3.0, 1e-12);

    f = diverge_flow(std_params, 100, 320, 0);
    EXPECT_EQ(f.upstream_out, 0.0);
    EXPECT_EQ(f.into_branch_a, 0.0);
    EXPECT_EQ(f.into_branch_b, 0.0);

    f = diverge_flow(std_params, 40, 0, 0);
    EXPECT_EQ(f.upstream_out, 20.0);
    EXPECT_EQ(f.into_branch_a, 10.0);
    EXPECT_EQ(f.into_branch_b, 10.0);
}

TEST(Diverge, FifoCouplingIsMonotone) {
    SplitMix64 rng{11};
    for (int k = 0; k < 5000; ++k) {
        const double x1 = rng.uniform(0, 320), x2 = rng.uniform(0, 320);
        double a = rng.uniform(0, 320), b = rng.uniform(0, 320);
        if (a > b) std::swap(a, b);
        const auto lo = diverge_flow(std_params, x1, x2, a);
        const auto hi = diverge_flow(std_params, x1, x2, b);
        EXPECT_GE(lo.upstream_out, hi.upstream_out);
        EXPECT_GE(lo.into_branch_a, hi.into_branch_a);
        const auto lo2 = diverge_flow(std_params, x1, a, x2);
        const auto hi2 = diverge_flow(std_params, x1, b, x2);
        EXPECT_GE(lo2.upstream_out, hi2.upstream_out);
        EXPECT_EQ(lo.into_branch_a, lo.into_branch_b);
        EXPECT_EQ(lo.into_branch_a, 0.5 * lo.upstream_out);
        EXPECT_LE(lo.upstream_out, demand(std_params, x1));
    }
}

TEST(Diverge, DomainErrorsPropagate) {
    EXPECT_THROW(diverge_flow(std_params, 10, 330, 0), DomainError);
    EXPECT_THROW(diverge_flow(std_params, -1, 0, 0), DomainError);
}
