#pragma once

// Weighted sum-rate solver: ellipsoid search over the multipliers, primal
// recovery from the optimal piece rays, and KKT certification.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "wpcn/dual.hpp"
#include "wpcn/ellipsoid.hpp"
#include "wpcn/model.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

enum class SolveStatus { Optimal, MaxIter, Degenerate };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Degenerate: return "Degenerate";
    }
    return "?";
}

using ResidualMap = std::map<std::string, double>;

struct Solution {
    Allocation allocation;
    PowerAllocation powers;
    RateBundle rates;
    double wsr = 0.0;
    DualVars duals;
    ResidualMap kkt_residuals;
    std::size_t outer_iterations = 0;
    SolveStatus status = SolveStatus::MaxIter;

    double dual_value = 0.0;
    double duality_gap = 0.0;
    bool cooperative = true;
    Weights weights;

    double max_kkt_residual() const
    {
        double m = 0.0;
        for (const auto& [name, v] : kkt_residuals) m = std::max(m, v);
        return m;
    }
};

namespace detail {

// U1 rate, honoring the no-relay reading R1 = R1_10 of the baseline.
inline double user1_rate(const RateBundle& r, bool cooperative)
{
    return cooperative ? r.r1_total : r.r1_10;
}

inline RateBundle scheme_rates(const Allocation& t, const RhoParams& rho, bool cooperative)
{
    auto r = rates(t, rho);
    if (!cooperative) {
        r.r1_total = r.r1_10;
        r.r_bar = r.r1_10;
    }
    return r;
}

} // namespace detail

// Residuals of the KKT system at (allocation, duals). Stationarity is checked
// per slot: an active slot must satisfy its two stationarity equations, an
// idle one must not be profitable at the current prices.
inline ResidualMap kkt_residuals(const Allocation& t, const DualVars& l, const RhoParams& rho,
                                 const Weights& w, bool cooperative = true)
{
    ResidualMap res;
    const double l1 = l.lambda1;
    const double l2 = l.lambda2;
    const double l3 = l.lambda3;
    const double l4 = cooperative ? l.lambda4 : 0.0;
    const auto pieces = piece_rays(l, rho, w, cooperative);

    res["stationarity_rbar"] = std::abs(w.w1 - l3 - l4);

    if (t.tau1 > 0.0) {
        const double z = t.tau0 / t.tau1;
        const double u = rho.rho1_10 * z;
        const double v = rho.rho1_12 * z;
        const double d_tau0 =
            (l3 * rho.rho1_10 / (1.0 + u) + l4 * rho.rho1_12 / (1.0 + v)) / kLn2 - l1 + l2;
        res["stationarity_tau0"] = t.tau0 > 0.0 ? std::abs(d_tau0) : std::max(0.0, d_tau0);
        res["stationarity_tau1"] = std::abs((l3 * f_kkt(u) + l4 * f_kkt(v)) / kLn2 - l1);
    } else {
        res["stationarity_tau0"] = t.tau0 > 0.0 ? std::max(0.0, l2 - l1) : 0.0;
        res["stationarity_tau1"] = std::max(0.0, pieces.level_u1 - l1);
    }

    auto u2_slot_residuals = [&](const char* tau_name, const char* t_name, double tau, double e,
                                 double mu, double level) {
        if (tau > 0.0 && mu > 0.0) {
            const double zz = rho.rho2 * e / tau;
            res[tau_name] = std::abs(mu * f_kkt(zz) / kLn2 - l1);
            const double d_e = mu * rho.rho2 / ((1.0 + zz) * kLn2) - l2;
            res[t_name] = e > 0.0 ? std::abs(d_e) : std::max(0.0, d_e);
        } else {
            res[tau_name] = std::max(0.0, level - l1);
            res[t_name] = tau > 0.0 ? std::max(0.0, -l1) : 0.0;
        }
    };
    if (cooperative) {
        u2_slot_residuals("stationarity_tau21", "stationarity_t21", t.tau21, t.t21, l3,
                          pieces.level_relay);
    }
    u2_slot_residuals("stationarity_tau22", "stationarity_t22", t.tau22, t.t22, w.w2,
                      pieces.level_u2);

    const auto r = detail::scheme_rates(t, rho, cooperative);
    const double r_bar = r.r1_total;
    res["slackness_time"] = std::abs(l1 * (t.time_sum() - 1.0));
    res["slackness_energy"] = std::abs(l2 * (t.energy_sum() - t.tau0));
    res["slackness_rate_direct"] = std::abs(l3 * (r_bar - r.r1_10 - r.r1_20));
    if (cooperative) res["slackness_rate_relay"] = std::abs(l4 * (r_bar - r.r1_12));

    const auto feas = validate_allocation(t, 0.0);
    res["primal_feasibility"] = feas.worst();
    return res;
}

inline ResidualMap kkt_residuals(const Solution& s, const RhoParams& rho, const Weights& w)
{
    return kkt_residuals(s.allocation, s.duals, rho, w, s.cooperative);
}

namespace detail {

// Best mixture of the three unit-time rays under the time, energy and rate
// constraints, found by vertex enumeration of a 4-variable LP in
// y = (w_u1, w_relay, w_u2, R).
struct RayMixture {
    Allocation t;
    double objective = -kInf;
    bool ok = false;
};

inline RayMixture mix_rays(const PieceRays& p, const RhoParams& rho, const Weights& w,
                           bool cooperative, bool enforce_relay_balance)
{
    const Allocation a_u1 = p.ray(0);
    const auto r_u1 = rates(a_u1, rho);
    const double e_u1 = a_u1.tau0;
    const double x21 = cooperative ? p.x21 : 0.0;
    const double x22 = p.x22;
    const double b_rl = cooperative ? perspective_rate(1.0, x21, rho.rho2) : 0.0;
    const double c_u2 = perspective_rate(1.0, x22, rho.rho2);

    using Row = Eigen::Matrix<double, 1, 4>;
    std::vector<Row> rows;
    std::vector<double> rhs;
    auto add = [&](double a0, double a1, double a2, double a3, double b) {
        rows.emplace_back(Row(a0, a1, a2, a3));
        rhs.push_back(b);
    };
    add(1, 1, 1, 0, 1);               // time
    add(-e_u1, x21, x22, 0, 0);       // energy
    add(-r_u1.r1_10, -b_rl, 0, 1, 0); // R <= R10 + R20
    if (cooperative) add(-r_u1.r1_12, 0, 0, 1, 0); // R <= R12
    for (int i = 0; i < 4; ++i) {
        Row e = Row::Zero();
        e(i) = -1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    if (!cooperative) add(0, 1, 0, 0, 0); // no relay slot
    if (enforce_relay_balance) add(r_u1.r1_10 - r_u1.r1_12, b_rl, 0, 0, 0);

    const Eigen::Vector4d cost(0.0, 0.0, w.w2 * c_u2, w.w1);
    const int m = static_cast<int>(rows.size());

    RayMixture best;
    Eigen::Vector4d best_y = Eigen::Vector4d::Zero();
    std::array<int, 4> idx{};
    // Enumerate all 4-subsets of constraints taken as active.
    for (idx[0] = 0; idx[0] < m; ++idx[0])
        for (idx[1] = idx[0] + 1; idx[1] < m; ++idx[1])
            for (idx[2] = idx[1] + 1; idx[2] < m; ++idx[2])
                for (idx[3] = idx[2] + 1; idx[3] < m; ++idx[3]) {
                    Eigen::Matrix4d A;
                    Eigen::Vector4d b;
                    for (int r = 0; r < 4; ++r) {
                        A.row(r) = rows[idx[r]];
                        b(r) = rhs[idx[r]];
                    }
                    Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
                    if (lu.rank() < 4) continue;
                    const Eigen::Vector4d y = lu.solve(b);
                    bool feasible = true;
                    for (int r = 0; r < m && feasible; ++r) {
                        const double slack = rows[r].dot(y) - rhs[r];
                        const double scale = 1.0 + rows[r].cwiseAbs().dot(y.cwiseAbs());
                        feasible = slack <= 1e-12 * scale;
                    }
                    if (!feasible) continue;
                    const double obj = cost.dot(y);
                    if (obj > best.objective) {
                        best.objective = obj;
                        best_y = y;
                        best.ok = true;
                    }
                }
    if (!best.ok) return best;

    Eigen::Vector4d y = best_y;
    for (int i = 0; i < 3; ++i)
        if (y(i) < 1e-13) y(i) = 0.0;
    best.t.tau0 = y(0) * a_u1.tau0;
    best.t.tau1 = y(0) * a_u1.tau1;
    best.t.tau21 = y(1);
    best.t.t21 = y(1) * x21;
    best.t.tau22 = y(2);
    best.t.t22 = y(2) * x22;
    // Round-off can leave the energy split a hair above tau0.
    const double e = best.t.energy_sum();
    if (e > best.t.tau0 && e > 0.0) {
        const double s = best.t.tau0 / e;
        best.t.t21 *= s;
        best.t.t22 *= s;
    }
    const double ts = best.t.time_sum();
    if (ts > 1.0) {
        best.t.tau0 /= ts;
        best.t.tau1 /= ts;
        best.t.tau21 /= ts;
        best.t.tau22 /= ts;
        best.t.t21 /= ts;
        best.t.t22 /= ts;
    }
    return best;
}

// Newton refinement of (lambda, piece weights) on the square system formed by
// the active pieces (level = lambda1) and the tight primal constraints (time,
// energy and, with lambda3 interior, relay balance).
struct Polished {
    DualVars duals;
    Allocation t;
    bool ok = false;
};

inline Polished polish(const DualVars& start, const std::array<bool, 3>& active,
                       bool balance, const RhoParams& rho, const Weights& w, bool cooperative,
                       const Allocation& seed = {})
{
    std::vector<int> pieces;
    for (int k = 0; k < 3; ++k)
        if (active[k]) pieces.push_back(k);
    const int np = static_cast<int>(pieces.size());
    const int nl = balance ? 3 : 2;
    const int n = nl + np;

    DualVars base = start;
    if (cooperative && !balance) {
        // lambda3 sits on a bound of [0, w1].
        base.lambda3 = start.lambda3 < 0.5 * w.w1 ? 0.0 : w.w1;
        base.lambda4 = w.w1 - base.lambda3;
    }
    auto duals_of = [&](const Eigen::VectorXd& x) {
        DualVars l = base;
        l.lambda1 = x(0);
        l.lambda2 = x(1);
        if (balance) {
            l.lambda3 = x(2);
            l.lambda4 = w.w1 - x(2);
        }
        return l;
    };
    struct Eval {
        Eigen::VectorXd f;
        PieceRays p;
    };
    auto residual = [&](const Eigen::VectorXd& x) {
        Eval e;
        e.f = Eigen::VectorXd::Zero(n);
        const DualVars l = duals_of(x);
        e.p = piece_rays(l, rho, w, cooperative);
        const double lv[3] = {e.p.level_u1, e.p.level_relay, e.p.level_u2};
        const double zf = std::isinf(e.p.z1) ? 1.0 : e.p.z1 / (1.0 + e.p.z1);
        const Allocation a0 = e.p.ray(0);
        const double a10 = perspective_rate(a0.tau1, a0.tau0, rho.rho1_10);
        const double a12 = perspective_rate(a0.tau1, a0.tau0, rho.rho1_12);
        const double b = perspective_rate(1.0, e.p.x21, rho.rho2);
        const double energy[3] = {-zf, e.p.x21, e.p.x22};
        const double bal[3] = {a10 - a12, b, 0.0};
        double time = -1.0, en = 0.0, bl = 0.0;
        for (int i = 0; i < np; ++i) {
            const int k = pieces[i];
            const double wk = x(nl + i);
            e.f(i) = lv[k] - l.lambda1;
            time += wk;
            en += energy[k] * wk;
            bl += bal[k] * wk;
        }
        e.f(np) = time;
        e.f(np + 1) = en;
        if (balance) e.f(np + 2) = bl;
        return e;
    };

    Polished out;
    Eigen::VectorXd x(n);
    x(0) = start.lambda1;
    x(1) = start.lambda2;
    if (balance) x(2) = start.lambda3;
    const double seed_w[3] = {seed.tau0 + seed.tau1, seed.tau21, seed.tau22};
    const bool seeded = seed.time_sum() > 0.5;
    for (int i = 0; i < np; ++i) {
        const double s0 = seeded ? seed_w[pieces[i]] : 0.0;
        x(nl + i) = s0 > 0.0 ? s0 : 1.0 / np;
    }

    try {
        Eval e = residual(x);
        for (int it = 0; it < 30 && e.f.lpNorm<Eigen::Infinity>() > 1e-14; ++it) {
            Eigen::MatrixXd J(n, n);
            for (int j = 0; j < n; ++j) {
                const double h = x(j) != 0.0 ? 1e-7 * std::abs(x(j)) : 1e-9;
                Eigen::VectorXd xp = x, xm = x;
                xp(j) += h;
                xm(j) -= h;
                J.col(j) = (residual(xp).f - residual(xm).f) / (2.0 * h);
            }
            // Equilibrate: the energy row scales like x22 / lambda2.
            Eigen::VectorXd cs(n), rs(n);
            for (int j = 0; j < n; ++j) cs(j) = x(j) != 0.0 ? std::abs(x(j)) : 1.0;
            J = J * cs.asDiagonal();
            for (int i = 0; i < n; ++i) {
                const double m = J.row(i).lpNorm<Eigen::Infinity>();
                rs(i) = m > 0.0 ? 1.0 / m : 1.0;
            }
            J = rs.asDiagonal() * J;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
            lu.setThreshold(1e-14);
            if (lu.rank() < n) return out;
            const Eigen::VectorXd dx =
                cs.asDiagonal() * lu.solve(rs.asDiagonal() * e.f).eval();
            if (!dx.allFinite()) return out;
            // Damp to stay inside the multiplier domain.
            double step = 1.0;
            for (int tries = 0; tries < 30; ++tries, step *= 0.5) {
                const Eigen::VectorXd xn = x - step * dx;
                const bool inside =
                    xn(0) > 0.0 && xn(1) > 0.0 && (!balance || (xn(2) > 0.0 && xn(2) < w.w1));
                if (!inside) continue;
                const Eval en = residual(xn);
                if (en.f.lpNorm<Eigen::Infinity>() < e.f.lpNorm<Eigen::Infinity>() ||
                    step < 1e-6) {
                    x = xn;
                    e = en;
                    break;
                }
            }
            if (step < 1e-8) return out;
        }
        if (!(e.f.lpNorm<Eigen::Infinity>() <= 1e-11)) return out;
        for (int i = 0; i < np; ++i)
            if (x(nl + i) < -1e-12) return out;
        out.duals = duals_of(x);
        for (int i = 0; i < np; ++i) {
            const int k = pieces[i];
            const double wk = std::max(0.0, x(nl + i));
            const Allocation r = e.p.ray(k);
            out.t.tau0 += wk * r.tau0;
            out.t.tau1 += wk * r.tau1;
            out.t.tau21 += wk * r.tau21;
            out.t.tau22 += wk * r.tau22;
            out.t.t21 += wk * r.t21;
            out.t.t22 += wk * r.t22;
        }
        out.ok = true;
    } catch (const Error&) {
        out.ok = false;
    }
    return out;
}

inline Allocation recover_primal(const PieceRays& p, const RhoParams& rho, const Weights& w,
                                 bool cooperative)
{
    const auto plain = mix_rays(p, rho, w, cooperative, false);
    if (cooperative && rho.rho1_10 <= rho.rho1_12) {
        const auto balanced = mix_rays(p, rho, w, cooperative, true);
        if (balanced.ok &&
            (!plain.ok || balanced.objective >= plain.objective - 1e-13 * (1.0 + plain.objective)))
            return balanced.t;
    }
    return plain.ok ? plain.t : Allocation{};
}

inline double wsr_bound(const RhoParams& rho, const Weights& w, bool cooperative)
{
    const double r1 = cooperative ? std::max(rho.rho1_10, rho.rho1_12) : rho.rho1_10;
    return w.w1 * std::log1p(r1) / kLn2 + w.w2 * std::log1p(rho.rho2) / kLn2;
}

// Ellipsoid over (lambda1, lambda2, lambda3) with lambda4 = w1 - lambda3 in
// the cooperative case, over (lambda1, lambda2) with lambda3 = w1,
// lambda4 = 0 for the baseline.
inline constexpr double kBudgetTol = 1e-10;

template <int N>
Solution solve_dual(const RhoParams& rho, const Weights& w, const SolverOptions& opts,
                    const std::optional<DualVars>& warm)
{
    static_assert(N == 2 || N == 3);
    constexpr bool cooperative = N == 3;
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;

    auto to_duals = [&](const Vec& x) {
        DualVars l;
        l.lambda1 = x(0);
        l.lambda2 = x(1);
        if constexpr (cooperative) {
            l.lambda3 = x(2);
            l.lambda4 = w.w1 - x(2);
        } else {
            l.lambda3 = w.w1;
            l.lambda4 = 0.0;
        }
        return l;
    };

    const double bound = 1.05 * wsr_bound(rho, w, cooperative) + 1e-12;
    Vec half;
    Vec center;
    half(0) = half(1) = 0.5 * bound;
    center(0) = center(1) = 0.5 * bound;
    if constexpr (cooperative) {
        half(2) = 0.5 * w.w1;
        center(2) = 0.5 * w.w1;
    }
    Mat shape = Mat::Zero();
    for (int i = 0; i < N; ++i) {
        const double r = std::sqrt(double(N)) * half(i) * opts.initial_ellipsoid_radius;
        shape(i, i) = r * r;
    }
    if (warm) {
        center(0) = warm->lambda1;
        center(1) = warm->lambda2;
        if constexpr (cooperative) center(2) = warm->lambda3;
    }

    auto oracle = [&](const Vec& x) {
        EllipsoidCut<N> cut;
        auto violated = [&](int i, double sign, double amount) {
            cut.feasible = false;
            cut.value = std::max(0.0, amount);
            cut.g = Vec::Zero();
            cut.g(i) = sign;
            return cut;
        };
        if (!(x(0) > 0.0)) return violated(0, -1.0, -x(0));
        if (!(x(1) > 0.0)) return violated(1, -1.0, -x(1));
        if constexpr (cooperative) {
            if (x(2) < 0.0) return violated(2, -1.0, -x(2));
            if (x(2) > w.w1) return violated(2, 1.0, x(2) - w.w1);
        }
        const auto inner = inner_maximize(to_duals(x), rho, w, opts, cooperative);
        const auto nu = subgradient(inner, rho);
        cut.value = inner.dual_value;
        cut.g(0) = -nu[0];
        cut.g(1) = -nu[1];
        if constexpr (cooperative) cut.g(2) = -nu[2] + nu[3];
        return cut;
    };

    EllipsoidOptions eo;
    eo.max_iters = opts.max_outer_iters;
    eo.abs_tol = 1e-3 * opts.outer_tol;
    eo.rel_tol = 1e-14;
    const auto er = ellipsoid_minimize<N>(center, shape, oracle, eo);

    Solution sol;
    sol.cooperative = cooperative;
    sol.weights = w;
    sol.outer_iterations = er.iterations;
    DualVars l = to_duals(er.best);
    if (!er.found_feasible) {
        sol.duals = l;
        sol.status = SolveStatus::Degenerate;
        return sol;
    }

    const double scale = std::max(1.0, bound);
    auto finish = [&](DualVars d, Allocation t) {
        // Leftover harvested energy goes to U2's own slot: R2 can only grow,
        // and with tau22 = 0 (energy has no use, lambda2 = 0) nothing changes.
        const double spare = t.tau0 - t.energy_sum();
        if (spare > 0.0) t.t22 += spare;
        Solution out = sol;
        // lambda1 only needs to reach the best piece level.
        d.lambda1 = piece_rays(d, rho, w, cooperative).max_level();
        out.duals = d;
        out.dual_value = d.lambda1;
        out.allocation = t;
        out.rates = scheme_rates(t, rho, cooperative);
        out.wsr = w.w1 * user1_rate(out.rates, cooperative) + w.w2 * out.rates.r2;
        out.duality_gap = out.dual_value - out.wsr;
        out.kkt_residuals = kkt_residuals(t, d, rho, w, cooperative);
        // Both budgets carry positive prices, so they must be met with equality
        // much tighter than the product form in the slackness residuals.
        const bool tight = std::abs(t.time_sum() - 1.0) <= kBudgetTol &&
                           std::abs(t.energy_sum() - t.tau0) <= kBudgetTol;
        const bool certified = std::abs(out.duality_gap) <= opts.outer_tol &&
                               out.max_kkt_residual() <= opts.kkt_tol && tight;
        const bool degenerate = !(d.lambda1 > 1e-14 * scale) || !(d.lambda2 > 1e-14 * scale);
        out.status = certified ? SolveStatus::Optimal
                               : (degenerate ? SolveStatus::Degenerate : SolveStatus::MaxIter);
        return out;
    };
    auto merit = [](const Solution& s) {
        return std::max(std::abs(s.duality_gap), s.max_kkt_residual());
    };

    const auto pieces = piece_rays(l, rho, w, cooperative);
    Solution best = finish(l, recover_primal(pieces, rho, w, cooperative));
    if (best.status == SolveStatus::Optimal) return best;

    const std::array<bool, 3> from_primal = {
        best.allocation.tau0 + best.allocation.tau1 > 0.0, best.allocation.tau21 > 0.0,
        best.allocation.tau22 > 0.0};
    const double top = pieces.max_level();
    const double tie = 1e-6 * std::max(1.0, std::abs(top));
    const std::array<bool, 3> from_levels = {pieces.level_u1 >= top - tie,
                                             pieces.level_relay >= top - tie,
                                             pieces.level_u2 >= top - tie};
    const bool interior =
        cooperative && l.lambda3 > 1e-9 * w.w1 && l.lambda4 > 1e-9 * w.w1;
    // The recovered allocation is usually a good Newton seed; when it is far
    // off (flat dual directions) the neutral start can still converge.
    const Allocation seeds[2] = {best.allocation, Allocation{}};
    for (bool balance : {interior, cooperative && !interior}) {
        for (const auto& act : {from_primal, from_levels}) {
            if (!(act[0] || act[1] || act[2])) continue;
            for (const auto& seed : seeds) {
                const auto p = polish(l, act, balance, rho, w, cooperative, seed);
                if (!p.ok) continue;
                Solution cand = finish(p.duals, p.t);
                if (merit(cand) < merit(best)) best = cand;
                if (best.status == SolveStatus::Optimal) return best;
            }
        }
        if (!cooperative) break;
    }
    return best;
}

inline void check_solver_inputs(const RhoParams& rho, const Weights& w, const SolverOptions& opts)
{
    rho.validate();
    opts.validate();
    if (!(w.w1 > 0.0) || !(w.w2 > 0.0))
        throw DomainError("the dual solver needs strictly positive weights");
    if (!(rho.rho1_10 > 0.0) || !(rho.rho1_12 > 0.0) || !(rho.rho2 > 0.0))
        throw DomainError("the dual solver needs strictly positive rho coefficients");
}

} // namespace detail

inline Solution solve_wsr(const RhoParams& rho, const Weights& w, const SolverOptions& opts = {},
                          const std::optional<DualVars>& warm = std::nullopt)
{
    detail::check_solver_inputs(rho, w, opts);
    return detail::solve_dual<3>(rho, w, opts, warm);
}

inline Solution solve_wsr(const SystemParams& params, const Weights& w,
                          const SolverOptions& opts = {})
{
    params.validate();
    auto sol = solve_wsr(rho_params(params), w, opts);
    sol.powers = recover_powers(params, sol.allocation);
    return sol;
}

} // namespace wpcn
