#pragma once

// Brute-force reference solvers used to cross-check the dual solver:
// a refined grid over the tight-constraint parameterization and projected
// supergradient ascent on the full allocation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

struct GridSpec {
    int resolution = 40; // intervals per axis; doubling it nests the grids
    int refinement_rounds = 4;
    double shrink_factor = 0.25;

    void validate() const
    {
        if (resolution < 8) throw InvalidParams("grid resolution must be >= 8");
        if (refinement_rounds < 0) throw InvalidParams("refinement rounds must be >= 0");
        if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
            throw InvalidParams("shrink factor must lie in (0, 1)");
    }
};

struct ApproxSolution {
    Allocation allocation;
    RateBundle rates;
    double wsr = 0.0;
    std::size_t evaluations = 0;
};

// Objective of either scheme; the baseline has no relay path and R1 = R1_10.
inline double scheme_objective(const Allocation& t, const RhoParams& rho, const Weights& w,
                               bool cooperative)
{
    const auto r = rates(t, rho);
    return w.w1 * (cooperative ? r.r1_total : r.r1_10) + w.w2 * r.r2;
}

// Search over (tau0, tau1, tau21, s) with tau22 = 1 - tau0 - tau1 - tau21,
// t21 = s tau0 and t22 = (1 - s) tau0. Each round re-centers a box shrunk by
// shrink_factor on the incumbent. Ties keep the lexicographically first point.
inline ApproxSolution grid_search(const RhoParams& rho, const Weights& w, const GridSpec& spec = {},
                                  bool cooperative = true)
{
    spec.validate();
    rho.validate();

    ApproxSolution best;
    best.wsr = -1.0;
    const int n = spec.resolution;
    std::array<double, 4> lo{0.0, 0.0, 0.0, 0.0};
    std::array<double, 4> hi{1.0, 1.0, cooperative ? 1.0 : 0.0, cooperative ? 1.0 : 0.0};
    std::array<double, 4> incumbent{0.0, 0.0, 0.0, 0.0};

    auto axis = [&](int d, int i) {
        return hi[d] > lo[d] ? lo[d] + (hi[d] - lo[d]) * i / n : lo[d];
    };
    for (int round = 0; round <= spec.refinement_rounds; ++round) {
        const int n2 = hi[2] > lo[2] ? n + 1 : 1;
        const int n3 = hi[3] > lo[3] ? n + 1 : 1;
        for (int i0 = 0; i0 <= n; ++i0) {
            const double tau0 = axis(0, i0);
            for (int i1 = 0; i1 <= n; ++i1) {
                const double tau1 = axis(1, i1);
                if (tau0 + tau1 > 1.0) break;
                for (int i2 = 0; i2 < n2; ++i2) {
                    const double tau21 = axis(2, i2);
                    const double rest = 1.0 - tau0 - tau1 - tau21;
                    if (rest < 0.0) break;
                    for (int i3 = 0; i3 < n3; ++i3) {
                        const double s = axis(3, i3);
                        const Allocation t{tau0, tau1, tau21, rest, s * tau0, (1.0 - s) * tau0};
                        const double v = scheme_objective(t, rho, w, cooperative);
                        ++best.evaluations;
                        if (v > best.wsr) {
                            best.wsr = v;
                            best.allocation = t;
                            incumbent = {tau0, tau1, tau21, s};
                        }
                    }
                }
            }
        }
        for (int d = 0; d < 4; ++d) {
            const double half = 0.5 * spec.shrink_factor * (hi[d] - lo[d]);
            lo[d] = std::max(0.0, incumbent[d] - half);
            hi[d] = std::min(1.0, incumbent[d] + half);
        }
    }
    best.rates = rates(best.allocation, rho);
    if (!cooperative) best.rates.r1_total = best.rates.r_bar = best.rates.r1_10;
    return best;
}

namespace detail {

// Euclidean projection onto {x >= 0, sum x <= 1}.
template <std::size_t N>
std::array<double, N> project_capped_simplex(std::array<double, N> x)
{
    double sum = 0.0;
    for (auto& v : x) {
        v = std::max(v, 0.0);
        sum += v;
    }
    if (sum <= 1.0) return x;
    // Shift theta with sum max(x - theta, 0) = 1, by sorting.
    std::array<double, N> s = x;
    std::sort(s.begin(), s.end(), std::greater<>());
    double acc = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        acc += s[k];
        const double cand = (acc - 1.0) / double(k + 1);
        if (k + 1 == N || s[k + 1] <= cand) {
            theta = cand;
            break;
        }
    }
    for (auto& v : x) v = std::max(v - theta, 0.0);
    return x;
}

inline Allocation project_set_a(const Allocation& t)
{
    const auto tau = project_capped_simplex<4>({t.tau0, t.tau1, t.tau21, t.tau22});
    return {tau[0], tau[1], tau[2], tau[3], std::max(t.t21, 0.0), std::max(t.t22, 0.0)};
}

// Half-space t21 + t22 - tau0 <= 0.
inline Allocation project_set_b(Allocation t)
{
    const double viol = t.t21 + t.t22 - t.tau0;
    if (viol <= 0.0) return t;
    const double step = viol / 3.0;
    t.tau0 += step;
    t.t21 -= step;
    t.t22 -= step;
    return t;
}

inline std::array<double, 6> sub(const std::array<double, 6>& a, const std::array<double, 6>& b)
{
    std::array<double, 6> r{};
    for (std::size_t i = 0; i < 6; ++i) r[i] = a[i] - b[i];
    return r;
}

inline std::array<double, 6> add(const std::array<double, 6>& a, const std::array<double, 6>& b)
{
    std::array<double, 6> r{};
    for (std::size_t i = 0; i < 6; ++i) r[i] = a[i] + b[i];
    return r;
}

} // namespace detail

// Projection onto {t >= 0, sum tau <= 1, t21 + t22 <= tau0} by Dykstra's
// alternating projections.
inline Allocation project_feasible(const Allocation& t, int max_iters = 5000, double tol = 1e-15)
{
    using detail::add;
    using detail::sub;
    auto x = t.as_array();
    std::array<double, 6> p{}, q{};
    for (int k = 0; k < max_iters; ++k) {
        const auto y = detail::project_set_a(Allocation::from_array(add(x, p))).as_array();
        p = sub(add(x, p), y);
        const auto xn = detail::project_set_b(Allocation::from_array(add(y, q))).as_array();
        q = sub(add(y, q), xn);
        double change = 0.0;
        for (std::size_t i = 0; i < 6; ++i) change = std::max(change, std::abs(xn[i] - x[i]));
        x = xn;
        if (change <= tol) break;
    }
    // Dykstra ends on the half-space; clean up round-off against the other set.
    auto a = Allocation::from_array(x);
    for (double* v : {&a.tau0, &a.tau1, &a.tau21, &a.tau22, &a.t21, &a.t22}) *v = std::max(*v, 0.0);
    const double ts = a.time_sum();
    if (ts > 1.0) {
        a.tau0 /= ts;
        a.tau1 /= ts;
        a.tau21 /= ts;
        a.tau22 /= ts;
    }
    const double es = a.energy_sum();
    if (es > a.tau0 && es > 0.0) {
        a.t21 *= a.tau0 / es;
        a.t22 *= a.tau0 / es;
    }
    return a;
}

struct AscentOptions {
    std::size_t max_iters = 20000;
    double initial_step = 0.05;
    bool cooperative = true;
};

namespace detail {

// Partial derivatives of g(x1, x2) = x1 log2(1 + alpha x2 / x1), with x1
// floored to keep the boundary gradient finite.
inline std::array<double, 2> perspective_gradient(double x1, double x2, double alpha)
{
    x1 = std::max(x1, 1e-12);
    const double y = alpha * x2 / x1;
    const double d1 = (std::log1p(y) - y / (1.0 + y)) / std::numbers::ln2;
    const double d2 = alpha / ((1.0 + y) * std::numbers::ln2);
    return {d1, d2};
}

} // namespace detail

// Supergradient ascent with diminishing normalized steps; returns the best
// feasible iterate.
inline ApproxSolution projected_ascent(const RhoParams& rho, const Weights& w, const Allocation& start,
                                       const AscentOptions& opts = {})
{
    rho.validate();
    Allocation x = project_feasible(start);
    ApproxSolution best;
    best.allocation = x;
    best.wsr = scheme_objective(x, rho, w, opts.cooperative);

    for (std::size_t k = 0; k < opts.max_iters; ++k) {
        const auto r = rates(x, rho);
        std::array<double, 6> g{}; // (tau0, tau1, tau21, tau22, t21, t22)
        const auto g10 = detail::perspective_gradient(x.tau1, x.tau0, rho.rho1_10);
        const auto g12 = detail::perspective_gradient(x.tau1, x.tau0, rho.rho1_12);
        const auto g20 = detail::perspective_gradient(x.tau21, x.t21, rho.rho2);
        const auto g22 = detail::perspective_gradient(x.tau22, x.t22, rho.rho2);
        const bool relay_branch = opts.cooperative && r.r1_10 + r.r1_20 > r.r1_12;
        if (relay_branch) {
            g[0] += w.w1 * g12[1];
            g[1] += w.w1 * g12[0];
        } else {
            g[0] += w.w1 * g10[1];
            g[1] += w.w1 * g10[0];
            if (opts.cooperative) {
                g[2] += w.w1 * g20[0];
                g[4] += w.w1 * g20[1];
            }
        }
        g[3] += w.w2 * g22[0];
        g[5] += w.w2 * g22[1];
        if (!opts.cooperative) g[2] = g[4] = 0.0;

        double norm = 0.0;
        for (double v : g) norm += v * v;
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) break;
        const double step = opts.initial_step / std::sqrt(double(k + 1));
        auto a = x.as_array();
        for (std::size_t i = 0; i < 6; ++i) a[i] += step * g[i] / norm;
        x = project_feasible(Allocation::from_array(a));
        if (!opts.cooperative) x.tau21 = x.t21 = 0.0;
        const double v = scheme_objective(x, rho, w, opts.cooperative);
        ++best.evaluations;
        if (v > best.wsr) {
            best.wsr = v;
            best.allocation = x;
        }
    }
    best.rates = rates(best.allocation, rho);
    if (!opts.cooperative) best.rates.r1_total = best.rates.r_bar = best.rates.r1_10;
    return best;
}

} // namespace wpcn
