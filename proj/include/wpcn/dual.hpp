#pragma once

// Lagrangian machinery of the epigraph problem
//
//   max  w1 R + w2 R2(t)
//   s.t. tau0 + tau1 + tau21 + tau22 <= 1        (lambda1)
//        t21 + t22 <= tau0                        (lambda2)
//        R <= R1_10(t) + R1_20(t)                 (lambda3)
//        R <= R1_12(t)                            (lambda4)
//
// Every rate is positively homogeneous in t, so the Lagrangian splits into
// three independent homogeneous "pieces": the U1 slot (tau0, tau1), the relay
// slot (tau21, t21) and the U2 slot (tau22, t22). Each piece is maximized
// along a ray whose direction has a closed form; the value per unit of time
// along that ray is the piece's level. With the time budget kept in the inner
// domain, the dual function is G(lambda) = max(lambda1, max_k level_k).

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DualVars {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    double lambda4 = 0.0;

    bool non_negative() const
    {
        return lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0 && lambda4 >= 0.0;
    }
    // lambda3 + lambda4 >= w1 keeps the epigraph variable bounded.
    bool dual_feasible(double w1, double tol = 0.0) const
    {
        return non_negative() && lambda3 + lambda4 >= w1 - tol;
    }
};

struct SolverOptions {
    double inner_tol = 1e-10;
    double outer_tol = 1e-7; // duality gap, bits/s/Hz
    double kkt_tol = 1e-6;
    std::size_t max_inner_iters = 500;
    std::size_t max_outer_iters = 2000;
    // Multiplies the analytic bounding box of the multipliers.
    double initial_ellipsoid_radius = 1.0;

    void validate() const
    {
        if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(kkt_tol > 0.0) ||
            !(initial_ellipsoid_radius > 0.0))
            throw InvalidParams("solver tolerances must be positive");
    }
};

inline double lagrangian(double r_bar, const Allocation& t, const DualVars& l, const RhoParams& rho,
                         const Weights& w)
{
    const auto r = rates(t, rho);
    return w.w1 * r_bar + w.w2 * r.r2 - l.lambda1 * (t.time_sum() - 1.0) -
           l.lambda2 * (t.energy_sum() - t.tau0) - l.lambda3 * (r_bar - r.r1_10 - r.r1_20) -
           l.lambda4 * (r_bar - r.r1_12);
}

// f(z) = ln(1 + z) - z / (1 + z): strictly increasing on z >= 0, f(0) = 0.
inline double f_kkt(double z)
{
    if (!(z >= 0.0)) throw DomainError("f_kkt: z must be non-negative");
    if (z < 1e-3) {
        // sum_{k>=2} (-1)^k (k-1)/k z^k, avoids cancellation
        double term = z * z;
        double sum = 0.0;
        for (int k = 2; k <= 9; ++k) {
            sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1.0) / k * term;
            term *= z;
        }
        return sum;
    }
    return std::log1p(z) - z / (1.0 + z);
}

inline double f_kkt_derivative(double z) { return z / ((1.0 + z) * (1.0 + z)); }

namespace detail {

struct RootResult {
    double x = 0.0;
    std::uintmax_t iterations = 0;
};

// Root of a continuous function with fn(lo) and fn(hi) of opposite signs.
template <class F>
RootResult bracketed_root(F&& fn, double lo, double hi)
{
    std::uintmax_t iters = 200;
    const double flo = fn(lo);
    const double fhi = fn(hi);
    if (flo == 0.0) return {lo, 0};
    if (fhi == 0.0) return {hi, 0};
    auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<double>(52),
                                                    iters);
    return {0.5 * (a + b), iters};
}

// Smallest power-of-four multiple of `start` at which the increasing
// function `fn` becomes >= 0.
template <class F>
double expand_upper(F&& fn, double start)
{
    constexpr double cap = 1e300;
    double hi = start;
    while (fn(hi) < 0.0) {
        if (hi >= cap) throw UnboundedError("root bracket exceeded the double range");
        hi = std::min(hi * 4.0, cap);
    }
    return hi;
}

} // namespace detail

// z >= 0 with f(z) = target.
inline double invert_f(double target)
{
    if (!(target >= 0.0)) throw DomainError("invert_f: target must be non-negative");
    if (std::isinf(target)) throw UnboundedError("invert_f: infinite target");
    if (target == 0.0) return 0.0;
    auto fn = [target](double z) { return f_kkt(z) - target; };
    const double hi = detail::expand_upper(fn, std::max(1.0, std::sqrt(2.0 * target)));
    double z = detail::bracketed_root(fn, 0.0, hi).x;
    for (int i = 0; i < 2; ++i) {
        const double d = f_kkt_derivative(z);
        if (!(d > 0.0)) break;
        const double next = z - fn(z) / d;
        if (next > 0.0 && std::abs(fn(next)) <= std::abs(fn(z))) z = next;
    }
    return z;
}

// Root of lambda3 f(rho10 z) + lambda4 f(rho12 z) = lambda1 ln 2.
inline double solve_z1(const DualVars& l, const RhoParams& rho)
{
    if (l.lambda3 == 0.0 && l.lambda4 == 0.0)
        throw DegenerateError("solve_z1: lambda3 = lambda4 = 0 leaves no root");
    if (l.lambda3 * rho.rho1_10 + l.lambda4 * rho.rho1_12 == 0.0)
        throw DegenerateError("solve_z1: both U1 links have zero gain");
    if (l.lambda1 < 0.0) throw DomainError("solve_z1: lambda1 must be non-negative");
    if (l.lambda1 == 0.0) return 0.0;
    const double target = l.lambda1 * kLn2;
    auto fn = [&](double z) {
        return l.lambda3 * f_kkt(rho.rho1_10 * z) + l.lambda4 * f_kkt(rho.rho1_12 * z) - target;
    };
    const double hi = detail::expand_upper(fn, 1.0);
    return detail::bracketed_root(fn, 0.0, hi).x;
}

// Coefficients of a z^2 + b z + c = 0, the tau0-stationarity condition of the
// Lagrangian written in z = tau0 / tau1 and multiplied through by
// ln2 (1 + rho10 z)(1 + rho12 z).
struct QuadCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

inline QuadCoeffs quad_coeffs(const DualVars& l, const RhoParams& rho)
{
    const double d = (l.lambda1 - l.lambda2) * kLn2;
    const double r10 = rho.rho1_10;
    const double r12 = rho.rho1_12;
    return {d * r10 * r12, d * (r10 + r12) - (l.lambda3 + l.lambda4) * r10 * r12,
            d - l.lambda3 * r10 - l.lambda4 * r12};
}

// Non-negative root of the quadratic, with the linear and clamped fallbacks.
inline double energy_ratio_root(const QuadCoeffs& q)
{
    const double scale = std::abs(q.b) + std::abs(q.c) + 1.0;
    if (std::abs(q.a) < 1e-14 * scale) {
        if (std::abs(q.b) < 1e-14 * (std::abs(q.c) + 1.0)) return 0.0;
        return std::max(0.0, -q.c / q.b);
    }
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    if (!(disc >= 0.0)) return 0.0;
    const double s = std::sqrt(disc);
    const double z = q.b >= 0.0 ? -2.0 * q.c / (q.b + s) : (s - q.b) / (2.0 * q.a);
    return (z >= 0.0 && std::isfinite(z)) ? z : 0.0;
}

struct EnergyBlock {
    double tau0 = 0.0;
    double t21 = 0.0;
    double t22 = 0.0;
};

struct TimeBlock {
    double tau1 = 0.0;
    double tau21 = 0.0;
    double tau22 = 0.0;
};

// Maximizes the Lagrangian over (tau0, t21, t22) with (tau1, tau21, tau22) held.
inline EnergyBlock inner_step_energy(const DualVars& l, const RhoParams& rho, const Weights& w,
                                     const TimeBlock& fixed)
{
    if (!(l.lambda2 > 0.0))
        throw DegenerateError("inner_step_energy: lambda2 = 0 leaves the energy split undefined");
    EnergyBlock out;
    out.tau0 = energy_ratio_root(quad_coeffs(l, rho)) * fixed.tau1;
    if (rho.rho2 > 0.0) {
        out.t21 = std::max(0.0, l.lambda3 * fixed.tau21 / (l.lambda2 * kLn2) - fixed.tau21 / rho.rho2);
        out.t22 = std::max(0.0, w.w2 * fixed.tau22 / (l.lambda2 * kLn2) - fixed.tau22 / rho.rho2);
    }
    return out;
}

// Maximizes the Lagrangian over (tau1, tau21, tau22) with (tau0, t21, t22) held.
inline TimeBlock inner_step_time(const DualVars& l, const RhoParams& rho, const Weights& w,
                                 const EnergyBlock& fixed)
{
    if (!(l.lambda1 > 0.0))
        throw DegenerateError("inner_step_time: lambda1 = 0 leaves the slot lengths undefined");
    TimeBlock out;
    const bool u1_alive = l.lambda3 * rho.rho1_10 + l.lambda4 * rho.rho1_12 > 0.0;
    if (u1_alive && fixed.tau0 > 0.0) out.tau1 = fixed.tau0 / solve_z1(l, rho);
    if (l.lambda3 > 0.0 && fixed.t21 > 0.0)
        out.tau21 = rho.rho2 * fixed.t21 / invert_f(l.lambda1 * kLn2 / l.lambda3);
    if (w.w2 > 0.0 && fixed.t22 > 0.0)
        out.tau22 = rho.rho2 * fixed.t22 / invert_f(l.lambda1 * kLn2 / w.w2);
    return out;
}

// Per-piece maximizing directions and levels for given (lambda2, lambda3,
// lambda4). Level = Lagrangian value per unit of slot time along the ray,
// excluding the -lambda1 time price.
struct PieceRays {
    double level_u1 = 0.0;    // slot (tau0, tau1)
    double level_relay = 0.0; // slot (tau21, t21)
    double level_u2 = 0.0;    // slot (tau22, t22)
    double z1 = 0.0;          // tau0 / tau1 (infinite: tau1 = 0)
    double x21 = 0.0;         // t21 / tau21
    double x22 = 0.0;         // t22 / tau22
    bool relay_enabled = true;
    std::uintmax_t root_iterations = 0;

    double max_level() const { return std::max({level_u1, level_relay, level_u2}); }

    // Index of the piece with the largest level; ties go to the lowest index.
    int argmax() const
    {
        const double m = max_level();
        if (level_u1 == m) return 0;
        if (level_relay == m) return 1;
        return 2;
    }

    // Unit-time allocation along piece k.
    Allocation ray(int k) const
    {
        Allocation t;
        if (k == 0) {
            if (std::isinf(z1)) {
                t.tau0 = 1.0;
            } else {
                t.tau0 = z1 / (1.0 + z1);
                t.tau1 = 1.0 / (1.0 + z1);
            }
        } else if (k == 1) {
            t.tau21 = 1.0;
            t.t21 = x21;
        } else {
            t.tau22 = 1.0;
            t.t22 = x22;
        }
        return t;
    }
};

namespace detail {

inline double log2_1p(double x) { return std::log1p(x) / kLn2; }

// Energy-to-time ratio of a relay/U2 slot and its level for slot weight `mu`.
inline std::pair<double, double> u2_slot(double mu, double lambda2, double rho2)
{
    if (!(mu > 0.0) || !(rho2 > 0.0)) return {0.0, 0.0};
    if (!(lambda2 > 0.0)) return {kInf, kInf};
    const double x = std::max(0.0, mu / (lambda2 * kLn2) - 1.0 / rho2);
    return {x, mu * log2_1p(rho2 * x) - lambda2 * x};
}

} // namespace detail

inline PieceRays piece_rays(const DualVars& l, const RhoParams& rho, const Weights& w,
                            bool relay_enabled = true)
{
    PieceRays p;
    p.relay_enabled = relay_enabled;

    const double k10 = l.lambda3 * rho.rho1_10;
    const double k12 = l.lambda4 * rho.rho1_12;
    if (k10 + k12 <= 0.0) {
        p.z1 = kInf;
        p.level_u1 = l.lambda2;
    } else {
        // h(z) = (lambda3 log2(1+rho10 z) + lambda4 log2(1+rho12 z) + lambda2 z) / (1 + z)
        // is quasi-concave; its stationarity condition phi(z) = 0 is strictly
        // decreasing in z.
        auto phi = [&](double z) {
            const double u = rho.rho1_10 * z;
            const double v = rho.rho1_12 * z;
            return l.lambda2 + (l.lambda3 * (rho.rho1_10 / (1.0 + u) - f_kkt(u)) +
                                l.lambda4 * (rho.rho1_12 / (1.0 + v) - f_kkt(v))) /
                                   kLn2;
        };
        auto neg_phi = [&](double z) { return -phi(z); };
        if (phi(1e300) > 0.0) {
            // h increases over the whole range: all slot time goes to energy.
            p.z1 = kInf;
            p.level_u1 = l.lambda2;
        } else {
            const double hi = detail::expand_upper(neg_phi, 1.0);
            const auto root = detail::bracketed_root(phi, 0.0, hi);
            p.z1 = root.x;
            p.root_iterations = root.iterations;
            const double z = p.z1;
            p.level_u1 = (l.lambda3 * detail::log2_1p(rho.rho1_10 * z) +
                          l.lambda4 * detail::log2_1p(rho.rho1_12 * z) + l.lambda2 * z) /
                         (1.0 + z);
        }
    }

    if (relay_enabled) {
        std::tie(p.x21, p.level_relay) = detail::u2_slot(l.lambda3, l.lambda2, rho.rho2);
    } else {
        p.level_relay = -kInf;
    }
    std::tie(p.x22, p.level_u2) = detail::u2_slot(w.w2, l.lambda2, rho.rho2);
    return p;
}

struct InnerResult {
    Allocation t_star;
    double r_bar_star = 0.0;
    double dual_value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    PieceRays pieces;
};

// Maximizes the Lagrangian over {t >= 0, sum tau <= 1, R >= 0}. The maximizer
// is the unit-time ray of the best piece when its level reaches lambda1, and
// t = 0 otherwise.
inline InnerResult inner_maximize(const DualVars& l, const RhoParams& rho, const Weights& w,
                                  const SolverOptions& opts = {}, bool relay_enabled = true)
{
    if (!(l.lambda1 > 0.0) || !(l.lambda2 > 0.0))
        throw DegenerateError("inner_maximize: lambda1 and lambda2 must be positive");
    if (!l.dual_feasible(w.w1, 1e-12 * std::max(1.0, w.w1)))
        throw DomainError("inner_maximize: multipliers violate lambda3 + lambda4 >= w1");

    InnerResult res;
    res.pieces = piece_rays(l, rho, w, relay_enabled);
    const double top = res.pieces.max_level();
    if (top >= l.lambda1) res.t_star = res.pieces.ray(res.pieces.argmax());
    res.r_bar_star = rates(res.t_star, rho).r1_total;
    res.dual_value = std::max(l.lambda1, top);
    res.iterations = static_cast<std::size_t>(res.pieces.root_iterations);
    res.converged = res.iterations <= opts.max_inner_iters && std::isfinite(res.dual_value);
    return res;
}

// Constraint values at the inner maximizer. The subgradient of G is the
// negation: G(l') >= G(l) - nu . (l' - l).
inline std::array<double, 4> subgradient(const InnerResult& inner, const RhoParams& rho)
{
    const auto& t = inner.t_star;
    const auto r = rates(t, rho);
    return {t.time_sum() - 1.0, t.energy_sum() - t.tau0, inner.r_bar_star - r.r1_10 - r.r1_20,
            inner.r_bar_star - r.r1_12};
}

} // namespace wpcn
