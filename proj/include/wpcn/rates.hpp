#pragma once

// Achievable rates in bits/s/Hz per normalized block, in both the (tau, P)
// form and the substituted allocation form, plus the perspective function
// g(x1, x2) = x1 log2(1 + alpha x2 / x1) that all of them reduce to.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"

namespace wpcn {

// Effective SNR coefficients of the U1->H-AP, U1->U2 and U2->H-AP links.
struct RhoParams {
    double rho1_10 = 0.0;
    double rho1_12 = 0.0;
    double rho2 = 0.0;

    void validate() const
    {
        for (double r : {rho1_10, rho1_12, rho2}) {
            if (!(r >= 0.0) || !std::isfinite(r))
                throw InvalidParams("rho coefficients must be finite and non-negative");
        }
    }
};

inline RhoParams rho_params(const SystemParams& p)
{
    if (!(p.sigma0_sq > 0.0) || !(p.sigma2_sq > 0.0))
        throw InvalidParams("noise powers must be positive");
    const auto& g = p.gains;
    const double u1 = p.eta1 * p.zeta1 * p.p0;
    const double u2 = p.eta2 * p.zeta2 * p.p0;
    return {g.h10 * g.h10 * u1 / p.sigma0_sq, g.h10 * g.h12 * u1 / p.sigma2_sq,
            g.h20 * g.h20 * u2 / p.sigma0_sq};
}

struct Weights {
    double w1 = 0.5;
    double w2 = 0.5;
};

// Below this the time share is treated as exactly zero.
inline constexpr double kZeroTime = 1e-300;

inline double perspective_rate(double x1, double x2, double alpha)
{
    if (x1 < 0.0 || x2 < 0.0 || alpha < 0.0)
        throw DomainError("perspective_rate: negative argument");
    if (x1 < kZeroTime) return 0.0;
    return x1 * std::log1p(alpha * (x2 / x1)) / std::numbers::ln2;
}

// Closed-form quadratic form of the Hessian of g along v; never positive.
inline double hessian_quadratic_form(double x1, double x2, double alpha, std::array<double, 2> v)
{
    if (!(x1 > 0.0)) throw DomainError("Hessian of g is undefined at x1 = 0");
    if (x2 < 0.0 || alpha < 0.0) throw DomainError("hessian_quadratic_form: negative argument");
    const double s = 1.0 + alpha * x2 / x1;
    const double d = (x2 / x1) * v[0] - v[1];
    return -(alpha * alpha / (x1 * s * s)) * d * d;
}

struct RateBundle {
    double r1_10 = 0.0;
    double r1_12 = 0.0;
    double r1_20 = 0.0;
    double r2 = 0.0;
    double r1_total = 0.0;
    double r_bar = 0.0;
};

namespace detail {

inline RateBundle assemble(double r10, double r12, double r20, double r2)
{
    RateBundle b{r10, r12, r20, r2, 0.0, 0.0};
    b.r1_total = std::min(r10 + r20, r12);
    b.r_bar = b.r1_total;
    return b;
}

} // namespace detail

inline RateBundle rates(const Allocation& t, const RhoParams& rho)
{
    if (!t.non_negative()) throw DomainError("rates: allocation has a negative component");
    return detail::assemble(perspective_rate(t.tau1, t.tau0, rho.rho1_10),
                            perspective_rate(t.tau1, t.tau0, rho.rho1_12),
                            perspective_rate(t.tau21, t.t21, rho.rho2),
                            perspective_rate(t.tau22, t.t22, rho.rho2));
}

// Rates from the time vector and explicit powers. Only the tau part of `t`
// is read.
inline RateBundle rates_raw(const Allocation& t, const PowerAllocation& pw, const SystemParams& p)
{
    if (!t.non_negative() || pw.p1 < 0.0 || pw.p21 < 0.0 || pw.p22 < 0.0)
        throw DomainError("rates_raw: negative time or power");
    const auto& g = p.gains;
    auto slot = [](double tau, double snr) {
        return tau < kZeroTime ? 0.0 : tau * std::log1p(snr) / std::numbers::ln2;
    };
    return detail::assemble(slot(t.tau1, pw.p1 * g.h10 / p.sigma0_sq),
                            slot(t.tau1, pw.p1 * g.h12 / p.sigma2_sq),
                            slot(t.tau21, pw.p21 * g.h20 / p.sigma0_sq),
                            slot(t.tau22, pw.p22 * g.h20 / p.sigma0_sq));
}

inline double wsr_objective(const Allocation& t, const RhoParams& rho, const Weights& w)
{
    if (w.w1 < 0.0 || w.w2 < 0.0) throw DomainError("weights must be non-negative");
    const auto r = rates(t, rho);
    return w.w1 * r.r1_total + w.w2 * r.r2;
}

} // namespace wpcn
