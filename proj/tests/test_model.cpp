#include <gtest/gtest.h>

#include "wpcn/model.hpp"
#include "wpcn/rates.hpp"

using namespace wpcn;

namespace {

SystemParams unit_params(ChannelGains g)
{
    SystemParams p;
    p.p0 = 1.0;
    p.sigma0_sq = 1e-13;
    p.sigma2_sq = 1e-13;
    p.gains = g;
    return p;
}

} // namespace

TEST(ChannelGains, LineGeometryAtUnitFading)
{
    const auto g = channel_gains({10.0, 0.5, 2.0, 30.0});
    EXPECT_NEAR(g.h10, 1e-5, 1e-20);
    EXPECT_NEAR(g.h20, 4e-5, 1e-20);
    EXPECT_NEAR(g.h12, 4e-5, 1e-20);
}

TEST(ChannelGains, ReferenceDistance)
{
    EXPECT_NEAR(channel_gains({1.0, 0.5, 2.0, 30.0}).h10, 1e-3, 1e-18);
}

TEST(ChannelGains, FadingScalesLinearly)
{
    EXPECT_NEAR(channel_gains({10.0, 0.5, 3.0, 30.0}, {2.0, 1.0, 1.0}).h10, 2e-6, 1e-20);
}

TEST(ChannelGains, RejectsBadGeometry)
{
    EXPECT_THROW(channel_gains({10.0, 1.0, 2.0, 30.0}), InvalidGeometry);
    EXPECT_THROW(channel_gains({10.0, 0.0, 2.0, 30.0}), InvalidGeometry);
    EXPECT_THROW(channel_gains({-1.0, 0.5, 2.0, 30.0}), InvalidGeometry);
    EXPECT_THROW(channel_gains({10.0, 0.5, 0.5, 30.0}), InvalidGeometry);
}

TEST(HarvestedEnergy, DirectProducts)
{
    const auto p = unit_params({1e-5, 4e-5, 4e-5});
    const auto e = harvested_energy(p, 0.4);
    EXPECT_NEAR(e.e1, 2e-6, 1e-20);
    EXPECT_NEAR(e.e2, 8e-6, 1e-20);
    const auto z = harvested_energy(p, 0.0);
    EXPECT_EQ(z.e1, 0.0);
    EXPECT_EQ(z.e2, 0.0);
    EXPECT_THROW(harvested_energy(p, 1.5), DomainError);
}

TEST(RhoParams, DirectEvaluation)
{
    const auto rho = rho_params(unit_params({1e-5, 4e-5, 4e-5}));
    EXPECT_NEAR(rho.rho1_10, 250.0, 1e-9);
}

TEST(RhoParams, InvariantUnderCommonScaling)
{
    auto p = unit_params({1e-5, 4e-5, 3e-5});
    const auto a = rho_params(p);
    p.p0 *= 7.0;
    p.sigma0_sq *= 7.0;
    p.sigma2_sq *= 7.0;
    const auto b = rho_params(p);
    EXPECT_NEAR(a.rho1_10, b.rho1_10, 1e-9 * a.rho1_10);
    EXPECT_NEAR(a.rho1_12, b.rho1_12, 1e-9 * a.rho1_12);
    EXPECT_NEAR(a.rho2, b.rho2, 1e-9 * a.rho2);
}

TEST(RhoParams, SymmetricGainsGiveEqualCoefficients)
{
    const auto rho = rho_params(unit_params({2e-5, 2e-5, 2e-5}));
    EXPECT_DOUBLE_EQ(rho.rho1_12, rho.rho2);
    const auto skew = rho_params(unit_params({1e-5, 2e-5, 2e-5}));
    EXPECT_NE(skew.rho1_12, skew.rho2);
}

TEST(RecoverPowers, IdleSlotCarriesNoPower)
{
    const auto p = unit_params({1e-5, 4e-5, 4e-5});
    EXPECT_EQ(recover_powers(p, {0.5, 0.5, 0.0, 0.0, 0.0, 0.0}).p21, 0.0);
}

TEST(RecoverPowers, DirectEvaluation)
{
    const auto p = unit_params({1e-5, 4e-5, 4e-5});
    EXPECT_NEAR(recover_powers(p, {0.3, 0.2, 0.2, 0.3, 0.1, 0.2}).p21, 5e-6, 1e-20);
}

TEST(RecoverPowers, EnergyBudgetIdentity)
{
    const auto p = unit_params({1e-5, 4e-5, 4e-5});
    const Allocation a{0.3, 0.2, 0.2, 0.3, 0.1, 0.2};
    const auto pw = recover_powers(p, a);
    const double spent = a.tau21 * pw.p21 + a.tau22 * pw.p22;
    EXPECT_NEAR(spent, p.eta2 * p.zeta2 * p.p0 * p.gains.h20 * a.tau0, 1e-20);
}

TEST(ValidateAllocation, Origin)
{
    EXPECT_TRUE(validate_allocation({}).feasible);
}

TEST(ValidateAllocation, TightConstraints)
{
    const auto r = validate_allocation({0.3, 0.3, 0.2, 0.2, 0.1, 0.2});
    EXPECT_TRUE(r.feasible);
    EXPECT_EQ(r.time_excess, 0.0);
}

TEST(ValidateAllocation, TimeExcess)
{
    const auto r = validate_allocation({0.3, 0.4, 0.2, 0.2, 0.1, 0.2});
    EXPECT_FALSE(r.feasible);
    EXPECT_NEAR(r.time_excess, 0.1, 1e-12);
}

TEST(ValidateAllocation, NegativeAndEnergy)
{
    EXPECT_FALSE(validate_allocation({0.3, -0.1, 0.2, 0.2, 0.1, 0.2}).feasible);
    EXPECT_NEAR(validate_allocation({0.1, 0.3, 0.2, 0.2, 0.1, 0.2}).energy_excess, 0.2, 1e-12);
}

TEST(SystemParams, Validation)
{
    auto p = unit_params({1e-5, 4e-5, 4e-5});
    EXPECT_NO_THROW(p.validate());
    p.eta1 = 1.5;
    EXPECT_THROW(p.validate(), InvalidParams);
    p.eta1 = 0.5;
    p.gains.h12 = 0.0;
    EXPECT_THROW(p.validate(), InvalidParams);
}

TEST(Units, DbmConversions)
{
    EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
    EXPECT_NEAR(watts_to_dbm(1e-3), 0.0, 1e-12);
    EXPECT_NEAR(db_to_linear(-30.0), 1e-3, 1e-18);
}
