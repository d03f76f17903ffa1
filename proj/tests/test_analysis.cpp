#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "wpcn/analysis.hpp"
#include "wpcn/oracle.hpp"

using namespace wpcn;

namespace {

// Brute-force max of min(R1, R2) over (tau0, tau1, tau21, s) with zooming.
double grid_max_min(const RhoParams& rho)
{
    auto value = [&](const std::array<double, 4>& x) {
        const double tau22 = 1.0 - x[0] - x[1] - x[2];
        if (x[0] < 0 || x[1] < 0 || x[2] < 0 || tau22 < -1e-15 || x[3] < 0 || x[3] > 1) return -1.0;
        const Allocation t{x[0], x[1], x[2], std::max(0.0, tau22), x[3] * x[0], (1.0 - x[3]) * x[0]};
        const auto r = rates(t, rho);
        return std::min(r.r1_total, r.r2);
    };
    std::array<double, 4> best{0.25, 0.25, 0.25, 0.5};
    double best_v = value(best);
    std::array<double, 4> lo{0, 0, 0, 0}, hi{1, 1, 1, 1};
    const int n = 40;
    for (int round = 0; round < 6; ++round) {
        for (int a = 0; a <= n; ++a)
            for (int b = 0; b <= n; ++b)
                for (int c = 0; c <= n; ++c)
                    for (int d = 0; d <= n; ++d) {
                        const std::array<double, 4> x{lo[0] + (hi[0] - lo[0]) * a / n,
                                                      lo[1] + (hi[1] - lo[1]) * b / n,
                                                      lo[2] + (hi[2] - lo[2]) * c / n,
                                                      lo[3] + (hi[3] - lo[3]) * d / n};
                        const double v = value(x);
                        if (v > best_v) best_v = v, best = x;
                    }
        for (int i = 0; i < 4; ++i) {
            const double half = 0.25 * (hi[i] - lo[i]) / 2.0;
            lo[i] = std::max(0.0, best[i] - half);
            hi[i] = std::min(1.0, best[i] + half);
        }
    }
    return best_v;
}

const RhoParams kRho{40.0, 900.0, 300.0};

} // namespace

TEST(ThroughputRegion, FrontierIsNonIncreasing)
{
    for (bool coop : {true, false}) {
        AnalysisOptions o;
        o.cooperative = coop;
        const auto pts = throughput_region(kRho, 30, o);
        ASSERT_EQ(pts.size(), 30u);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            EXPECT_TRUE(pts[i].ok);
            EXPECT_LE(pts[i].r2, pts[i - 1].r2 + 1e-7);
        }
    }
}

TEST(ThroughputRegion, EndpointsOnly)
{
    const auto pts = throughput_region(kRho, 2);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts.front().weights.w1, kWeightEps);
    EXPECT_THROW(throughput_region(kRho, 1), InvalidParams);
}

TEST(ThroughputRegion, NearUserInterceptIsSoloOptimum)
{
    const auto pts = throughput_region(kRho, 2);
    double solo = 0.0;
    for (int i = 1; i < 100000; ++i) solo = std::max(solo, perspective_rate(1.0 - i / 1e5, i / 1e5, kRho.rho2));
    EXPECT_NEAR(pts.front().r2, solo, 1e-5);
}

TEST(ThroughputRegion, BandwidthScalesRates)
{
    const auto a = throughput_region(kRho, 3);
    const auto b = throughput_region(kRho, 3, {}, 1e6);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(b[i].r1, 1e6 * a[i].r1, 1e-6);
}

TEST(ThroughputRegion, CooperationContainsBaseline)
{
    AnalysisOptions nc;
    nc.cooperative = false;
    for (const auto& p : throughput_region(kRho, 15, nc))
        EXPECT_TRUE(coop_dominates(kRho, p.r1, p.r2)) << p.r1 << ' ' << p.r2;
}

TEST(CoopDominates, RejectsPointsOutsideTheRegion)
{
    const double r1max = max_user1_rate(kRho, true);
    EXPECT_FALSE(coop_dominates(kRho, r1max * 1.01, 1e-3));
    const auto m = common_throughput(kRho);
    EXPECT_FALSE(coop_dominates(kRho, m.r_common * 1.001, m.r_common * 1.001));
    EXPECT_TRUE(coop_dominates(kRho, m.r_common * 0.999, m.r_common * 0.999));
}

TEST(FarUserGain, CooperationHelpsFarUser)
{
    const auto g = far_user_gain(kRho);
    EXPECT_GT(g.delta, 1.0);
    EXPECT_NEAR(g.delta, g.r1max_wc / g.r1max_nc, 1e-15);
}

TEST(CommonThroughput, SymmetricInstance)
{
    // h10 = h20 and a relay link no better than the direct one.
    const RhoParams rho{300.0, 300.0, 300.0};
    const auto r = common_throughput(rho);
    EXPECT_NEAR(r.r1, r.r2, 1e-6 * r.r2);
    EXPECT_NEAR(r.weights_at_equality.w1, 0.5, 1e-2);
    CommonOptions nc;
    nc.cooperative = false;
    EXPECT_NEAR(common_throughput(rho, nc).r_common, r.r_common, 1e-7);
}

TEST(CommonThroughput, MatchesBruteForceMaxMin)
{
    for (const auto& rho : {kRho, RhoParams{5.0, 2000.0, 80.0}, RhoParams{1.5, 30.0, 9000.0}}) {
        const auto r = common_throughput(rho);
        const double oracle = grid_max_min(rho);
        EXPECT_NEAR(r.r_common, oracle, 1e-3 * oracle);
        EXPECT_GE(r.r_common, oracle - 1e-9);
        EXPECT_LE(r.r_common, r.upper_bound + 1e-12);
        EXPECT_NEAR(r.r1, r.r2, 1e-6 * r.r_common);
        EXPECT_FALSE(r.fallback_used);
    }
}

TEST(CommonThroughput, ScaledTargetsLandOnTheRay)
{
    const auto m = max_min_throughput(kRho, 1.0, 2.0);
    EXPECT_NEAR(m.r1, 2.0 * m.r2, 1e-6 * m.r1);
    EXPECT_THROW(max_min_throughput(kRho, 0.0, 1.0), DomainError);
}

TEST(CommonThroughput, WidelyDifferentScalings)
{
    // Targets a point a hair off the R2 axis.
    const double r2max = solve_wsr(kRho, {1e-9, 1.0 - 1e-9}).rates.r2;
    const auto m = max_min_throughput(kRho, 1e8, 1.0);
    // Near the axis spare R1 is free, so only the value is pinned, not equality.
    EXPECT_LE(m.upper_bound - m.r_common, 1e-9 * m.r_common);
    EXPECT_GE(1e8 * m.r1, m.r_common);
    EXPECT_GE(m.r2, r2max * (1.0 - 1e-6));
    EXPECT_TRUE(coop_dominates(kRho, 1e-8, r2max * (1.0 - 1e-6)));
}

TEST(RegionVsKappa, CooperationContainsBaselinePerKappa)
{
    const auto out = region_vs_kappa(reference_scenario(), {0.3, 0.7}, 6);
    ASSERT_EQ(out.size(), 2u);
    for (const auto& kr : out) {
        EXPECT_GE(kr.r1max_wc, kr.r1max_nc);
        const auto rho = [&] {
            auto sc = reference_scenario();
            sc.geometry.kappa = kr.kappa;
            return sc.rho();
        }();
        for (const auto& p : kr.region_nc)
            EXPECT_TRUE(coop_dominates(rho, p.r1 / 1e6, p.r2 / 1e6));
    }
    EXPECT_THROW(region_vs_kappa(reference_scenario(), {1.0}, 3), InvalidGeometry);
}
