#pragma once

// Cross-checks of the dual solver against the oracles and the structural
// properties every certified solution must have.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wpcn/baseline.hpp"
#include "wpcn/montecarlo.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/solver.hpp"

namespace wpcn {

struct CheckResult {
    std::string scenario;
    std::string name;
    bool passed = false;
    double value = 0.0; // measured quantity
    double limit = 0.0; // threshold it is compared against
};

struct VerifyCase {
    std::string label;
    RhoParams rho;
    Weights weights;
};

struct VerifyOptions {
    SolverOptions solver;
    GridSpec grid;
    AscentOptions ascent;
    double oracle_rel_tol = 1e-3;
    double kkt_tol = 1e-6;
    double gap_tol = 1e-7;
    double identity_tol = 1e-8;
    std::size_t concavity_samples = 1000;
    std::uint64_t seed = 1;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
    std::size_t failures() const
    {
        return static_cast<std::size_t>(
            std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
    }
};

// Log-uniform rho on [1, 1e4] with the geometric ordering of a line
// deployment (rho1_10 is the weakest link), weights uniform on the open
// simplex.
inline VerifyCase random_case(SplitMix64& rng, const std::string& label)
{
    double r[3];
    for (double& v : r) v = std::pow(10.0, 4.0 * rng.uniform_open0());
    std::sort(r, r + 3);
    const bool relay_stronger = rng.uniform_open0() < 0.5;
    VerifyCase c;
    c.label = label;
    c.rho = {r[0], relay_stronger ? r[2] : r[1], relay_stronger ? r[1] : r[2]};
    double w1 = rng.uniform_open0();
    w1 = std::clamp(w1, 1e-6, 1.0 - 1e-6);
    c.weights = {w1, 1.0 - w1};
    return c;
}

inline std::vector<VerifyCase> random_cases(std::size_t n, std::uint64_t seed)
{
    std::vector<VerifyCase> out;
    auto rng = substream(seed, 0);
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_case(rng, "random-" + std::to_string(i)));
    return out;
}

inline double structural_time_residual(const Allocation& t) { return std::abs(t.time_sum() - 1.0); }
inline double structural_energy_residual(const Allocation& t)
{
    return std::abs(t.energy_sum() - t.tau0);
}
// R1_12 - (R1_10 + R1_20); non-negative when the relay constraint is respected.
inline double relay_balance_slack(const Allocation& t, const RhoParams& rho)
{
    const auto r = rates(t, rho);
    return r.r1_12 - (r.r1_10 + r.r1_20);
}

// Midpoint concavity of the four rate components on random feasible pairs.
inline double concavity_violation(const RhoParams& rho, std::size_t samples, std::uint64_t seed)
{
    auto rng = substream(seed, 1);
    auto random_alloc = [&] {
        double tau[4], s = 0.0;
        for (double& v : tau) {
            v = -std::log(rng.uniform_open0());
            s += v;
        }
        const double scale = rng.uniform_open0() / s;
        Allocation a{tau[0] * scale, tau[1] * scale, tau[2] * scale, tau[3] * scale, 0.0, 0.0};
        const double split = rng.uniform_open0();
        const double used = rng.uniform_open0();
        a.t21 = a.tau0 * used * split;
        a.t22 = a.tau0 * used * (1.0 - split);
        return a;
    };
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const auto a = random_alloc();
        const auto b = random_alloc();
        const double th = rng.uniform_open0();
        Allocation m;
        auto lerp = [&](double x, double y) { return th * x + (1.0 - th) * y; };
        m = {lerp(a.tau0, b.tau0), lerp(a.tau1, b.tau1), lerp(a.tau21, b.tau21),
             lerp(a.tau22, b.tau22), lerp(a.t21, b.t21), lerp(a.t22, b.t22)};
        const auto ra = rates(a, rho), rb = rates(b, rho), rm = rates(m, rho);
        const double va[] = {ra.r1_10, ra.r1_12, ra.r1_20, ra.r2};
        const double vb[] = {rb.r1_10, rb.r1_12, rb.r1_20, rb.r2};
        const double vm[] = {rm.r1_10, rm.r1_12, rm.r1_20, rm.r2};
        for (int i = 0; i < 4; ++i) worst = std::max(worst, lerp(va[i], vb[i]) - vm[i]);
    }
    return worst;
}

inline void verify_case(const VerifyCase& c, const VerifyOptions& opts, VerifyReport& report)
{
    auto add = [&](const std::string& name, bool ok, double value, double limit) {
        report.checks.push_back({c.label, name, ok, value, limit});
    };
    auto leq = [&](const std::string& name, double value, double limit) {
        add(name, value <= limit, value, limit);
    };

    Solution s;
    try {
        s = solve_wsr(c.rho, c.weights, opts.solver);
    } catch (const Error& e) {
        add(std::string("dual_solve_error: ") + e.what(), false, 0.0, 0.0);
        return;
    }
    add("dual_status_optimal", s.status == SolveStatus::Optimal, double(s.outer_iterations),
        double(opts.solver.max_outer_iters));
    leq("duality_gap", std::abs(s.duality_gap), opts.gap_tol);
    leq("kkt_max_residual", s.max_kkt_residual(), opts.kkt_tol);
    leq("kkt_rbar_identity", s.kkt_residuals.at("stationarity_rbar"), opts.identity_tol);
    leq("time_identity", structural_time_residual(s.allocation), opts.identity_tol);
    leq("energy_identity", structural_energy_residual(s.allocation), opts.identity_tol);
    add("relay_balance", relay_balance_slack(s.allocation, c.rho) >= -opts.identity_tol,
        relay_balance_slack(s.allocation, c.rho), -opts.identity_tol);

    const auto grid = grid_search(c.rho, c.weights, opts.grid);
    const double rel = std::abs(s.wsr - grid.wsr) / std::max(grid.wsr, 1e-300);
    leq("grid_oracle_rel", rel, opts.oracle_rel_tol);
    leq("grid_not_above_dual", grid.wsr - s.wsr, 1e-6);
    const auto asc = projected_ascent(c.rho, c.weights, Allocation{0.25, 0.25, 0.25, 0.25, 0.125, 0.125},
                                      opts.ascent);
    leq("ascent_oracle_rel", std::abs(s.wsr - asc.wsr) / std::max(s.wsr, 1e-300), opts.oracle_rel_tol);
    leq("ascent_not_above_dual", asc.wsr - s.wsr, 1e-6);

    const auto nc = solve_nocoop(c.rho, c.weights, opts.solver);
    add("nocoop_status_optimal", nc.status == SolveStatus::Optimal, double(nc.outer_iterations),
        double(opts.solver.max_outer_iters));
    GridSpec g2 = opts.grid;
    const auto grid_nc = grid_search(c.rho, c.weights, g2, false);
    leq("nocoop_grid_oracle_rel", std::abs(nc.wsr - grid_nc.wsr) / std::max(grid_nc.wsr, 1e-300),
        opts.oracle_rel_tol);
    if (c.rho.rho1_10 <= c.rho.rho1_12) leq("coop_dominates_nocoop", nc.wsr - s.wsr, 1e-9);

    leq("concavity_violation", concavity_violation(c.rho, opts.concavity_samples, opts.seed), 1e-10);
}

inline VerifyReport run_verification(const std::vector<VerifyCase>& cases, const VerifyOptions& opts = {})
{
    VerifyReport report;
    for (const auto& c : cases) verify_case(c, opts, report);
    return report;
}

} // namespace wpcn
