#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "wpcn/dual.hpp"

using namespace wpcn;
using boost::multiprecision::cpp_bin_float_50;

namespace {

double f_high_precision(double z)
{
    const cpp_bin_float_50 x(z);
    return static_cast<double>(log(1 + x) - x / (1 + x));
}

// Maximum of fn on [lo, hi]: uniform grid, then three zoomed passes.
double grid_max_1d(const std::function<double(double)>& fn, double lo, double hi, double* arg = nullptr)
{
    double best_x = lo, best = fn(lo);
    for (int round = 0; round < 4; ++round) {
        const int n = 2000;
        for (int i = 0; i <= n; ++i) {
            const double x = lo + (hi - lo) * i / n;
            const double v = fn(x);
            if (v > best) best = v, best_x = x;
        }
        const double w = (hi - lo) / n * 2.0;
        lo = std::max(0.0, best_x - w);
        hi = best_x + w;
    }
    if (arg) *arg = best_x;
    return best;
}

// Dual point on the face lambda3 + lambda4 = w1 with lambda1 > lambda2.
DualVars random_duals(std::mt19937_64& gen, const Weights& w)
{
    std::uniform_real_distribution<double> u(0.05, 1.0);
    DualVars l;
    l.lambda2 = u(gen) * 0.01;
    l.lambda1 = l.lambda2 + u(gen);
    const double s = u(gen);
    l.lambda3 = s * w.w1;
    l.lambda4 = (1.0 - s) * w.w1;
    return l;
}

RhoParams random_rho(std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> e(0.0, 3.0);
    return {std::pow(10.0, e(gen)), std::pow(10.0, e(gen)), std::pow(10.0, e(gen))};
}

} // namespace

TEST(FKkt, Origin) { EXPECT_EQ(f_kkt(0.0), 0.0); }

TEST(FKkt, MatchesHighPrecision)
{
    EXPECT_NEAR(f_kkt(1.0), f_high_precision(1.0), 1e-15);
    EXPECT_NEAR(f_kkt(3.0), f_high_precision(3.0), 1e-15);
    EXPECT_NEAR(f_kkt(1.0), 0.193147, 1e-6);
    EXPECT_NEAR(f_kkt(3.0), 0.636294, 1e-6);
    for (double z : {1e-8, 1e-5, 9e-4, 1.1e-3, 0.5, 1e3, 1e8})
        EXPECT_NEAR(f_kkt(z), f_high_precision(z), 1e-14 * std::max(1.0, f_high_precision(z)) + 1e-30)
            << "z=" << z;
    EXPECT_THROW(f_kkt(-1.0), DomainError);
}

TEST(InvertF, Origin) { EXPECT_EQ(invert_f(0.0), 0.0); }

TEST(InvertF, InverseOfUnitValue) { EXPECT_NEAR(invert_f(f_high_precision(1.0)), 1.0, 1e-9); }

TEST(InvertF, RoundTrip)
{
    for (double z : {0.01, 1.0, 100.0}) EXPECT_NEAR(invert_f(f_kkt(z)), z, 1e-9 * std::max(1.0, z));
    EXPECT_THROW(invert_f(-0.5), DomainError);
}

TEST(SolveZ1, SingleTermReduction)
{
    const RhoParams rho{40.0, 900.0, 300.0};
    const DualVars l{0.3, 0.01, 0.7, 0.0};
    EXPECT_NEAR(solve_z1(l, rho), invert_f(0.3 * std::log(2.0) / 0.7) / 40.0, 1e-12);
}

TEST(SolveZ1, VanishingTimePrice)
{
    const RhoParams rho{40.0, 900.0, 300.0};
    EXPECT_LT(solve_z1({1e-12, 0.0, 0.5, 0.5}, rho), 1e-6);
    EXPECT_EQ(solve_z1({0.0, 0.0, 0.5, 0.5}, rho), 0.0);
    EXPECT_THROW(solve_z1({0.1, 0.0, 0.0, 0.0}, rho), DegenerateError);
}

TEST(SolveZ1, PlugBackResidual)
{
    std::mt19937_64 gen(21);
    for (int k = 0; k < 200; ++k) {
        const auto rho = random_rho(gen);
        const auto l = random_duals(gen, {0.6, 0.4});
        const double z = solve_z1(l, rho);
        const double res = l.lambda3 * f_kkt(rho.rho1_10 * z) + l.lambda4 * f_kkt(rho.rho1_12 * z) -
                           l.lambda1 * std::log(2.0);
        EXPECT_LE(std::abs(res), 1e-10);
    }
}

TEST(QuadCoeffs, EqualPricesCancelLeadingTerm)
{
    const RhoParams rho{40.0, 900.0, 300.0};
    const auto q = quad_coeffs({0.3, 0.3, 0.2, 0.5}, rho);
    EXPECT_EQ(q.a, 0.0);
    EXPECT_DOUBLE_EQ(q.b, -0.7 * 40.0 * 900.0);
}

TEST(QuadCoeffs, UnitSubstitution)
{
    // (lambda1 - lambda2) ln 2 = 1 with unit rho.
    const double d = 1.0 / std::log(2.0);
    const auto q = quad_coeffs({d + 0.1, 0.1, 0.3, 0.4}, {1.0, 1.0, 1.0});
    EXPECT_NEAR(q.a, 1.0, 1e-14);
    EXPECT_NEAR(q.b, 2.0 - 0.7, 1e-14);
    EXPECT_NEAR(q.c, 1.0 - 0.7, 1e-14);
}

// The positive root zeroes the numerical tau0-derivative of the Lagrangian.
TEST(QuadCoeffs, RootIsStationaryPoint)
{
    std::mt19937_64 gen(23);
    const Weights w{0.6, 0.4};
    int checked = 0;
    for (int k = 0; k < 300; ++k) {
        const auto rho = random_rho(gen);
        const auto l = random_duals(gen, w);
        const double z = energy_ratio_root(quad_coeffs(l, rho));
        if (!(z > 1e-6)) continue;
        auto lag = [&](double tau0) {
            return lagrangian(0.0, {tau0, 1.0, 0.0, 0.0, 0.0, 0.0}, l, rho, w);
        };
        const double h = 1e-6 * z;
        const double deriv = (lag(z + h) - lag(z - h)) / (2.0 * h);
        EXPECT_NEAR(deriv, 0.0, 1e-5 * (1.0 + l.lambda1)) << "z=" << z;
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(InnerStepEnergy, ZeroRelaySlot)
{
    const auto out = inner_step_energy({0.5, 0.01, 0.3, 0.3}, {40.0, 900.0, 300.0}, {0.6, 0.4}, {0.3, 0.0, 0.2});
    EXPECT_EQ(out.t21, 0.0);
}

TEST(InnerStepEnergy, ClampWhenRelayPriceTooLow)
{
    // lambda3 rho2 <= lambda2 ln 2.
    const double l2 = 0.5;
    const double l3 = 0.9 * l2 * std::log(2.0) / 300.0;
    const auto out = inner_step_energy({1.0, l2, l3, 0.6 - l3}, {40.0, 900.0, 300.0}, {0.6, 0.4},
                                       {0.3, 0.2, 0.2});
    EXPECT_EQ(out.t21, 0.0);
}

TEST(InnerStepEnergy, MaximizesOverEachCoordinate)
{
    std::mt19937_64 gen(29);
    const Weights w{0.6, 0.4};
    for (int k = 0; k < 30; ++k) {
        const auto rho = random_rho(gen);
        const auto l = random_duals(gen, w);
        const TimeBlock fixed{0.3, 0.2, 0.25};
        const auto e = inner_step_energy(l, rho, w, fixed);
        auto lag = [&](double tau0, double t21, double t22) {
            return lagrangian(0.0, {tau0, fixed.tau1, fixed.tau21, fixed.tau22, t21, t22}, l, rho, w);
        };
        const double at = lag(e.tau0, e.t21, e.t22);
        const double span = 4.0 * std::max({1.0, e.tau0, e.t21, e.t22});
        EXPECT_GE(at, grid_max_1d([&](double x) { return lag(x, e.t21, e.t22); }, 0.0, span) - 1e-6);
        EXPECT_GE(at, grid_max_1d([&](double x) { return lag(e.tau0, x, e.t22); }, 0.0, span) - 1e-6);
        EXPECT_GE(at, grid_max_1d([&](double x) { return lag(e.tau0, e.t21, x); }, 0.0, span) - 1e-6);
    }
}

TEST(InnerStepTime, ZeroRelayEnergy)
{
    const auto out = inner_step_time({0.5, 0.01, 0.3, 0.3}, {40.0, 900.0, 300.0}, {0.6, 0.4}, {0.3, 0.0, 0.2});
    EXPECT_EQ(out.tau21, 0.0);
}

TEST(InnerStepTime, InactiveRelayMultiplier)
{
    const auto out = inner_step_time({0.5, 0.01, 0.0, 0.6}, {40.0, 900.0, 300.0}, {0.6, 0.4}, {0.3, 0.1, 0.2});
    EXPECT_EQ(out.tau21, 0.0);
}

TEST(InnerStepTime, MaximizesOverEachCoordinate)
{
    std::mt19937_64 gen(31);
    const Weights w{0.6, 0.4};
    for (int k = 0; k < 30; ++k) {
        const auto rho = random_rho(gen);
        const auto l = random_duals(gen, w);
        const EnergyBlock fixed{0.4, 0.15, 0.2};
        const auto t = inner_step_time(l, rho, w, fixed);
        auto lag = [&](double tau1, double tau21, double tau22) {
            return lagrangian(0.0, {fixed.tau0, tau1, tau21, tau22, fixed.t21, fixed.t22}, l, rho, w);
        };
        const double at = lag(t.tau1, t.tau21, t.tau22);
        const double span = 4.0 * std::max({1.0, t.tau1, t.tau21, t.tau22});
        EXPECT_GE(at, grid_max_1d([&](double x) { return lag(x, t.tau21, t.tau22); }, 0.0, span) - 1e-6);
        EXPECT_GE(at, grid_max_1d([&](double x) { return lag(t.tau1, x, t.tau22); }, 0.0, span) - 1e-6);
        EXPECT_GE(at, grid_max_1d([&](double x) { return lag(t.tau1, t.tau21, x); }, 0.0, span) - 1e-6);
    }
}

TEST(Lagrangian, OriginValue)
{
    EXPECT_DOUBLE_EQ(lagrangian(0.0, {}, {0.7, 0.2, 0.3, 0.4}, {40.0, 900.0, 300.0}, {0.5, 0.5}), 0.7);
}

TEST(Lagrangian, WeakDualityAtFeasiblePoints)
{
    std::mt19937_64 gen(37);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    const Weights w{0.6, 0.4};
    for (int k = 0; k < 500; ++k) {
        const auto rho = random_rho(gen);
        DualVars l{u(gen), u(gen), u(gen), u(gen)};
        double tau[4], s = 0.0;
        for (double& v : tau) s += (v = u(gen));
        const double scale = u(gen) / s;
        Allocation t{tau[0] * scale, tau[1] * scale, tau[2] * scale, tau[3] * scale, 0.0, 0.0};
        t.t21 = t.tau0 * u(gen) * 0.5;
        t.t22 = t.tau0 * u(gen) * 0.5;
        const double rbar = rates(t, rho).r1_total;
        EXPECT_GE(lagrangian(rbar, t, l, rho, w), wsr_objective(t, rho, w) - 1e-12);
    }
}

TEST(Lagrangian, TightConstraintsRecoverObjective)
{
    const RhoParams rho{40.0, 900.0, 300.0};
    const Weights w{0.6, 0.4};
    // Relay branch binding: pick t21 so that R1_10 + R1_20 = R1_12.
    Allocation t{0.4, 0.2, 0.3, 0.1, 0.0, 0.0};
    const auto base = rates(t, rho);
    const double need = base.r1_12 - base.r1_10; // from the relay slot
    t.t21 = t.tau21 * (std::pow(2.0, need / t.tau21) - 1.0) / rho.rho2;
    t.t22 = t.tau0 - t.t21;
    ASSERT_GT(t.t22, 0.0);
    const auto r = rates(t, rho);
    ASSERT_NEAR(r.r1_10 + r.r1_20, r.r1_12, 1e-12);
    EXPECT_NEAR(lagrangian(r.r1_total, t, {0.5, 0.2, 0.3, 0.3}, rho, w), wsr_objective(t, rho, w), 1e-12);
}

TEST(InnerMaximize, DegenerateRelayMultiplier)
{
    const auto res = inner_maximize({0.05, 0.01, 0.0, 0.6}, {40.0, 900.0, 300.0}, {0.6, 0.4});
    EXPECT_EQ(res.t_star.tau21, 0.0);
    EXPECT_EQ(res.t_star.t21, 0.0);
}

TEST(InnerMaximize, DualValueBoundsSampledPrimal)
{
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Weights w{1.0, 1.0};
    for (int k = 0; k < 20; ++k) {
        const auto rho = random_rho(gen);
        const auto l = random_duals(gen, w);
        const double g = inner_maximize(l, rho, w).dual_value;
        for (int j = 0; j < 200; ++j) {
            double tau[4], s = 0.0;
            for (double& v : tau) s += (v = u(gen) + 1e-3);
            Allocation t{tau[0] / s, tau[1] / s, tau[2] / s, tau[3] / s, 0.0, 0.0};
            const double split = u(gen);
            t.t21 = t.tau0 * split;
            t.t22 = t.tau0 - t.t21;
            EXPECT_GE(g, wsr_objective(t, rho, w) - 1e-12);
        }
    }
}

// Coarse grid over the time simplex and the two energy shares, then zoomed
// 6-D boxes around the incumbent.
TEST(InnerMaximize, MatchesGridMaximization)
{
    std::mt19937_64 gen(43);
    const Weights w{0.6, 0.4};
    for (int k = 0; k < 5; ++k) {
        const auto rho = random_rho(gen);
        // Energy prices high enough that the optimal energy shares stay
        // inside the searched range.
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double s = u(gen);
        const DualVars l{0.05 + 0.5 * u(gen), 0.2 + 0.8 * u(gen), s * w.w1, (1.0 - s) * w.w1};
        const double g = inner_maximize(l, rho, w).dual_value;

        auto lag = [&](const std::array<double, 6>& x) {
            for (double v : x)
                if (v < 0.0) return -1e300;
            if (x[0] + x[1] + x[2] + x[3] > 1.0 + 1e-15) return -1e300;
            return lagrangian(0.0, Allocation::from_array(x), l, rho, w);
        };
        const int n = 30;
        const double emax = 6.0;
        std::array<double, 6> best{};
        double best_v = lag(best);
        for (int a = 0; a <= n; ++a)
            for (int b = 0; a + b <= n; ++b)
                for (int c = 0; a + b + c <= n; ++c)
                    for (int d = 0; a + b + c + d <= n; ++d) {
                        std::array<double, 6> x{double(a) / n, double(b) / n, double(c) / n, double(d) / n, 0, 0};
                        double b21 = -1e300, b22 = -1e300, x21 = 0, x22 = 0;
                        for (int e = 0; e <= n; ++e) {
                            x[4] = emax * e / n;
                            x[5] = 0.0;
                            const double v = lag(x);
                            if (v > b21) b21 = v, x21 = x[4];
                        }
                        x[4] = x21;
                        for (int e = 0; e <= n; ++e) {
                            x[5] = emax * e / n;
                            const double v = lag(x);
                            if (v > b22) b22 = v, x22 = x[5];
                        }
                        x[5] = x22;
                        if (b22 > best_v) best_v = b22, best = x;
                    }
        double width = 2.0 / n;
        for (int round = 0; round < 6; ++round) {
            const auto centre = best;
            const int m = 5;
            std::array<int, 6> idx{};
            for (;;) {
                std::array<double, 6> x;
                for (int i = 0; i < 6; ++i) {
                    const double span = i < 4 ? width : width * emax;
                    x[i] = centre[i] + span * (double(idx[i]) / (m - 1) - 0.5);
                }
                const double v = lag(x);
                if (v > best_v) best_v = v, best = x;
                int i = 0;
                while (i < 6 && ++idx[i] == m) idx[i++] = 0;
                if (i == 6) break;
            }
            width *= 0.5;
        }
        EXPECT_LE(best_v, g + 1e-9);
        EXPECT_NEAR(best_v, g, 5e-3 * std::abs(g)) << "case " << k;
    }
}

TEST(Subgradient, TightPointGivesZero)
{
    InnerResult r;
    const RhoParams rho{40.0, 900.0, 300.0};
    Allocation t{0.4, 0.2, 0.3, 0.1, 0.0, 0.0};
    const auto base = rates(t, rho);
    t.t21 = t.tau21 * (std::pow(2.0, (base.r1_12 - base.r1_10) / t.tau21) - 1.0) / rho.rho2;
    t.t22 = t.tau0 - t.t21;
    r.t_star = t;
    r.r_bar_star = rates(t, rho).r1_12;
    for (double v : subgradient(r, rho)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Subgradient, EmptyAllocation)
{
    InnerResult r;
    const auto nu = subgradient(r, {40.0, 900.0, 300.0});
    EXPECT_EQ(nu[0], -1.0);
    EXPECT_EQ(nu[1], 0.0);
    EXPECT_EQ(nu[2], 0.0);
    EXPECT_EQ(nu[3], 0.0);
}

TEST(Subgradient, SupportingHyperplane)
{
    std::mt19937_64 gen(47);
    const Weights w{0.6, 0.4};
    for (int k = 0; k < 50; ++k) {
        const auto rho = random_rho(gen);
        const auto l = random_duals(gen, w);
        const auto inner = inner_maximize(l, rho, w);
        const auto nu = subgradient(inner, rho);
        for (int j = 0; j < 20; ++j) {
            const auto lp = random_duals(gen, w);
            const double gp = inner_maximize(lp, rho, w).dual_value;
            const double lin = inner.dual_value - (nu[0] * (lp.lambda1 - l.lambda1) +
                                                   nu[1] * (lp.lambda2 - l.lambda2) +
                                                   nu[2] * (lp.lambda3 - l.lambda3) +
                                                   nu[3] * (lp.lambda4 - l.lambda4));
            EXPECT_GE(gp, lin - 1e-9 * (1.0 + std::abs(gp)));
        }
    }
}
