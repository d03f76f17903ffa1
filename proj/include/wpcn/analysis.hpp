#pragma once

// Experiments on top of the solvers: throughput-region sweeps, max-min
// (common) throughput, far-user gain and placement sweeps.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wpcn/baseline.hpp"
#include "wpcn/scenario.hpp"
#include "wpcn/solver.hpp"

namespace wpcn {

inline constexpr double kWeightEps = 1e-9;

struct AnalysisOptions {
    SolverOptions solver;
    bool cooperative = true;
    double weight_eps = kWeightEps;
};

inline Solution solve_scheme(const RhoParams& rho, const Weights& w, const AnalysisOptions& opts)
{
    return opts.cooperative ? solve_wsr(rho, w, opts.solver) : solve_nocoop(rho, w, opts.solver);
}

inline double user1_rate(const Solution& s)
{
    return s.cooperative ? s.rates.r1_total : s.rates.r1_10;
}

struct RegionPoint {
    Weights weights;
    double r1 = 0.0; // bits/s
    double r2 = 0.0; // bits/s
    Allocation allocation;
    SolveStatus status = SolveStatus::Optimal;
    bool ok = true;
    std::string error;
};

// Pareto samples for w1 evenly spaced on [eps, 1 - eps]; the two ends are
// the single-user solves. Sorted by r1.
inline std::vector<RegionPoint> throughput_region(const RhoParams& rho, int n_points,
                                                  const AnalysisOptions& opts = {},
                                                  double bandwidth_hz = 1.0)
{
    if (n_points < 2) throw InvalidParams("a region needs at least two points");
    std::vector<RegionPoint> out;
    out.reserve(static_cast<std::size_t>(n_points));
    const double eps = opts.weight_eps;
    for (int i = 0; i < n_points; ++i) {
        const double w1 = eps + (1.0 - 2.0 * eps) * i / (n_points - 1);
        RegionPoint pt;
        pt.weights = {w1, 1.0 - w1};
        try {
            const auto s = solve_scheme(rho, pt.weights, opts);
            pt.r1 = bandwidth_hz * user1_rate(s);
            pt.r2 = bandwidth_hz * s.rates.r2;
            pt.allocation = s.allocation;
            pt.status = s.status;
            pt.ok = s.status == SolveStatus::Optimal;
            if (!pt.ok) pt.error = to_string(s.status);
        } catch (const Error& e) {
            pt.ok = false;
            pt.status = SolveStatus::Degenerate;
            pt.error = e.what();
        }
        out.push_back(pt);
    }
    std::stable_sort(out.begin(), out.end(), [](const RegionPoint& a, const RegionPoint& b) {
        return a.r1 < b.r1;
    });
    return out;
}

struct FarUserGain {
    double r1max_wc = 0.0;
    double r1max_nc = 0.0;
    double delta = 0.0;
};

inline double max_user1_rate(const RhoParams& rho, bool cooperative, const SolverOptions& opts = {})
{
    const Weights w{1.0 - kWeightEps, kWeightEps};
    const auto s = cooperative ? solve_wsr(rho, w, opts) : solve_nocoop(rho, w, opts);
    if (s.status != SolveStatus::Optimal)
        throw ConvergenceError(std::string("far-user solve ended with status ") +
                               to_string(s.status));
    return user1_rate(s);
}

inline FarUserGain far_user_gain(const RhoParams& rho, const SolverOptions& opts = {})
{
    FarUserGain g;
    g.r1max_wc = max_user1_rate(rho, true, opts);
    g.r1max_nc = max_user1_rate(rho, false, opts);
    if (!(g.r1max_nc > 0.0)) throw DomainError("far-user gain undefined: zero baseline rate");
    g.delta = g.r1max_wc / g.r1max_nc;
    return g;
}

inline FarUserGain far_user_gain(const Scenario& sc, const SolverOptions& opts = {})
{
    return far_user_gain(sc.rho(), opts);
}

struct CommonOptions {
    SolverOptions solver;
    bool cooperative = true;
    double tol = 1e-10;          // on the max-min value bracket
    double rate_gap_tol = 1e-6;  // relative |R1 - R2|
    int max_evaluations = 100;
    int fallback_points = 201;
};

struct CommonThroughputResult {
    double r_common = 0.0; // bits/s/Hz
    Weights weights_at_equality;
    Allocation allocation;
    double r1 = 0.0;
    double r2 = 0.0;
    double rate_gap = 0.0;
    double upper_bound = 0.0;
    int evaluations = 0;
    bool fallback_used = false;
};

namespace detail {

struct FrontierEval {
    double omega = 0.0;
    double phi = 0.0;   // omega c1 R1 + (1 - omega) c2 R2
    double slope = 0.0; // c1 R1 - c2 R2
    double r1 = 0.0;
    double r2 = 0.0;
    Allocation t;
};

inline RateBundle mixed_rates(const Allocation& t, const RhoParams& rho, bool cooperative)
{
    return scheme_rates(t, rho, cooperative);
}

inline Allocation mix(const Allocation& a, const Allocation& b, double theta)
{
    auto lerp = [&](double x, double y) { return theta * x + (1.0 - theta) * y; };
    return {lerp(a.tau0, b.tau0), lerp(a.tau1, b.tau1),   lerp(a.tau21, b.tau21),
            lerp(a.tau22, b.tau22), lerp(a.t21, b.t21), lerp(a.t22, b.t22)};
}

} // namespace detail

// Maximizes min(c1 R1, c2 R2). The value is min over omega of the weighted
// optimum phi(omega), a convex function whose slope is c1 R1 - c2 R2. The
// search brackets the sign change of the slope (Illinois regula falsi) and
// stops once the end tangents pin the minimum. The allocation time-shares the
// two bracket solutions.
inline CommonThroughputResult max_min_throughput(const RhoParams& rho, double c1, double c2,
                                                 const CommonOptions& opts = {})
{
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw DomainError("rate scalings must be positive");
    CommonThroughputResult res;
    auto evaluate = [&](double omega) {
        const double a = omega * c1;
        const double b = (1.0 - omega) * c2;
        // omega can round to 0 or 1 when the scalings differ widely.
        const double v = std::clamp(a / (a + b), kWeightEps, 1.0 - kWeightEps);
        const Weights w{v, 1.0 - v};
        const auto s = opts.cooperative ? solve_wsr(rho, w, opts.solver)
                                        : solve_nocoop(rho, w, opts.solver);
        ++res.evaluations;
        if (s.status != SolveStatus::Optimal)
            throw ConvergenceError(std::string("weighted solve ended with status ") +
                                   to_string(s.status));
        detail::FrontierEval e;
        e.omega = omega;
        e.r1 = user1_rate(s);
        e.r2 = s.rates.r2;
        e.phi = omega * c1 * e.r1 + (1.0 - omega) * c2 * e.r2;
        e.slope = c1 * e.r1 - c2 * e.r2;
        e.t = s.allocation;
        return e;
    };
    auto finish_single = [&](const detail::FrontierEval& e) {
        res.allocation = e.t;
        res.r1 = e.r1;
        res.r2 = e.r2;
        res.r_common = std::min(c1 * e.r1, c2 * e.r2);
        res.rate_gap = std::abs(c1 * e.r1 - c2 * e.r2);
        res.weights_at_equality = {e.omega, 1.0 - e.omega};
        res.upper_bound = std::max(res.upper_bound, res.r_common);
        return res;
    };
    // Weight reported is the mixing-weighted average of the bracket weights.
    auto finish_mix = [&](const detail::FrontierEval& lo, const detail::FrontierEval& hi) {
        const double theta = hi.slope / (hi.slope - lo.slope);
        const double omega = theta * lo.omega + (1.0 - theta) * hi.omega;
        res.allocation = detail::mix(lo.t, hi.t, theta);
        const auto r = detail::mixed_rates(res.allocation, rho, opts.cooperative);
        res.r1 = opts.cooperative ? r.r1_total : r.r1_10;
        res.r2 = r.r2;
        res.r_common = std::min(c1 * res.r1, c2 * res.r2);
        res.rate_gap = std::abs(c1 * res.r1 - c2 * res.r2);
        res.weights_at_equality = {omega, 1.0 - omega};
        return res;
    };

    // omega at which the normalized weight on R1 equals v; the bracket ends
    // must be extreme in v, not in omega, when c1 and c2 differ widely.
    auto omega_of = [&](double v) { return v * c2 / (v * c2 + (1.0 - v) * c1); };
    const double eps = kWeightEps;
    auto lo = evaluate(omega_of(eps));
    auto hi = evaluate(omega_of(1.0 - eps));
    res.upper_bound = std::min(lo.phi, hi.phi);
    if (lo.slope >= 0.0) return finish_single(lo);
    if (hi.slope <= 0.0) return finish_single(hi);

    auto fallback = [&]() {
        // Fine sweep: best single point or sign-change mixture.
        CommonThroughputResult best;
        best.r_common = -1.0;
        const int n = std::max(opts.fallback_points, 3);
        std::vector<detail::FrontierEval> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back(evaluate(omega_of(eps + (1.0 - 2.0 * eps) * i / (n - 1))));
        for (int i = 0; i < n; ++i) {
            const auto cand = finish_single(pts[i]);
            if (cand.r_common > best.r_common) best = cand;
            if (i + 1 < n && pts[i].slope < 0.0 && pts[i + 1].slope > 0.0) {
                const auto m = finish_mix(pts[i], pts[i + 1]);
                if (m.r_common > best.r_common) best = m;
            }
        }
        double ub = pts[0].phi;
        for (const auto& p : pts) ub = std::min(ub, p.phi);
        best.upper_bound = ub;
        best.evaluations = res.evaluations;
        best.fallback_used = true;
        return best;
    };

    // Illinois-weighted slopes of the bracket ends for regula falsi.
    double s_lo = lo.slope;
    double s_hi = hi.slope;
    int last_side = 0;
    while (res.evaluations < opts.max_evaluations) {
        // Tangents at the bracket ends meet at the best lower bound.
        const double cross = (hi.phi - lo.phi + lo.slope * lo.omega - hi.slope * hi.omega) /
                             (lo.slope - hi.slope);
        const double lower = lo.phi + lo.slope * (cross - lo.omega);
        const double scale = std::max(1.0, res.upper_bound);
        finish_mix(lo, hi);
        if (res.upper_bound - lower <= opts.tol * scale &&
            res.rate_gap <= opts.rate_gap_tol * std::max(res.r_common, 1e-300))
            return res;
        const double width = hi.omega - lo.omega;
        if (!(width > 0.0)) break;
        double omega = lo.omega - s_lo * width / (s_hi - s_lo);
        if (!(omega > lo.omega && omega < hi.omega)) omega = lo.omega + 0.5 * width;

        const auto m = evaluate(omega);
        res.upper_bound = std::min(res.upper_bound, m.phi);
        // Extreme-weight solves pin the rates only to tolerance / weight.
        const double guard = 1e-6 * std::max({1.0, std::abs(lo.slope), std::abs(hi.slope)});
        if (m.slope < lo.slope - guard || m.slope > hi.slope + guard) return fallback();
        if (m.slope == 0.0) return finish_single(m);
        const int side = m.slope < 0.0 ? -1 : 1;
        if (side < 0) {
            lo = m;
            s_lo = m.slope;
            if (last_side < 0) s_hi *= 0.5;
        } else {
            hi = m;
            s_hi = m.slope;
            if (last_side > 0) s_lo *= 0.5;
        }
        last_side = side;
    }
    if (res.rate_gap <= opts.rate_gap_tol * std::max(res.r_common, 1e-300)) return res;
    return fallback();
}

inline CommonThroughputResult common_throughput(const RhoParams& rho, const CommonOptions& opts = {})
{
    return max_min_throughput(rho, 1.0, 1.0, opts);
}

struct KappaRegion {
    double kappa = 0.0;
    double r1max_wc = 0.0; // bits/s/Hz
    double r1max_nc = 0.0;
    std::vector<RegionPoint> region_wc;
    std::vector<RegionPoint> region_nc;
};

inline std::vector<KappaRegion> region_vs_kappa(const Scenario& base, const std::vector<double>& kappas,
                                                int n_points, const SolverOptions& opts = {})
{
    std::vector<KappaRegion> out;
    for (double k : kappas) {
        if (!(k > 0.0 && k < 1.0)) throw InvalidGeometry("kappa must lie in (0, 1)");
        Scenario sc = base;
        sc.geometry.kappa = k;
        const auto rho = sc.rho();
        KappaRegion kr;
        kr.kappa = k;
        kr.r1max_wc = max_user1_rate(rho, true, opts);
        kr.r1max_nc = max_user1_rate(rho, false, opts);
        AnalysisOptions ao;
        ao.solver = opts;
        const double bw = sc.params.bandwidth_hz;
        kr.region_wc = throughput_region(rho, n_points, ao, bw);
        ao.cooperative = false;
        kr.region_nc = throughput_region(rho, n_points, ao, bw);
        out.push_back(std::move(kr));
    }
    return out;
}

// Whether the cooperative frontier contains a point at least as good as
// (r1, r2) in both coordinates, within tol. Rates in bits/s/Hz.
inline bool coop_dominates(const RhoParams& rho, double r1, double r2, double tol = 1e-9,
                           const SolverOptions& opts = {})
{
    if (r1 <= tol && r2 <= tol) return true;
    CommonOptions co;
    co.solver = opts;
    if (r1 <= tol) {
        const auto s = solve_wsr(rho, {kWeightEps, 1.0 - kWeightEps}, opts);
        return s.rates.r2 >= r2 - tol;
    }
    if (r2 <= tol) return max_user1_rate(rho, true, opts) >= r1 - tol;
    // Largest scaling s with s (r1, r2) on the frontier.
    const auto m = max_min_throughput(rho, 1.0 / r1, 1.0 / r2, co);
    return m.r1 >= r1 - tol && m.r2 >= r2 - tol;
}

} // namespace wpcn
