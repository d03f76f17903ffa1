#pragma once

// Physical scenario of the two-user network: geometry, channel gains,
// energy harvesting and the time/energy allocation vector.
//
// All quantities are SI (watts, seconds, Hz). The block length is
// normalized to one, so time allocations are fractions and energies are
// joules per unit block.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "wpcn/error.hpp"

namespace wpcn {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// H-AP, near user U2 and far user U1 on a line: d20 = kappa*d10 and
// d12 = (1 - kappa)*d10.
struct Geometry {
    double d10 = 10.0;
    double kappa = 0.5;
    double alpha = 2.0;
    double ref_loss_db = 30.0;

    double d20() const { return kappa * d10; }
    double d12() const { return (1.0 - kappa) * d10; }

    void validate() const
    {
        if (!(d10 > 0.0) || !std::isfinite(d10))
            throw InvalidGeometry("d10 must be positive and finite");
        if (!(kappa > 0.0 && kappa < 1.0))
            throw InvalidGeometry("kappa must lie in (0, 1)");
        if (!(alpha >= 1.0) || !std::isfinite(alpha))
            throw InvalidGeometry("path-loss exponent must be >= 1");
        if (!std::isfinite(ref_loss_db))
            throw InvalidGeometry("reference loss must be finite");
    }
};

struct ChannelGains {
    double h10 = 0.0;
    double h20 = 0.0;
    double h12 = 0.0;

    void validate() const
    {
        for (double h : {h10, h20, h12}) {
            if (!(h > 0.0) || !std::isfinite(h))
                throw InvalidParams("channel gains must be positive and finite");
        }
    }
};

// Short-term fading multipliers; all ones is the deterministic case.
struct FadingDraw {
    double theta10 = 1.0;
    double theta20 = 1.0;
    double theta12 = 1.0;
};

struct SystemParams {
    double p0 = 1.0;          // H-AP transmit power [W]
    double sigma0_sq = 1e-13; // noise at the H-AP [W]
    double sigma2_sq = 1e-13; // noise at U2 [W]
    double bandwidth_hz = 1e6;
    double eta1 = 0.5;
    double eta2 = 0.5;
    double zeta1 = 0.5;
    double zeta2 = 0.5;
    ChannelGains gains;

    void validate() const
    {
        if (!(p0 > 0.0) || !std::isfinite(p0)) throw InvalidParams("p0 must be positive");
        if (!(sigma0_sq > 0.0) || !(sigma2_sq > 0.0))
            throw InvalidParams("noise powers must be positive");
        if (!(bandwidth_hz > 0.0)) throw InvalidParams("bandwidth must be positive");
        for (double e : {eta1, eta2, zeta1, zeta2}) {
            if (!(e > 0.0 && e <= 1.0))
                throw InvalidParams("efficiencies must lie in (0, 1]");
        }
        gains.validate();
    }
};

// t = [tau0, tau1, tau21, tau22, t21, t22]. t21/t22 are the portions of the
// DL slot whose harvested energy U2 spends on relaying and on its own data.
struct Allocation {
    double tau0 = 0.0;
    double tau1 = 0.0;
    double tau21 = 0.0;
    double tau22 = 0.0;
    double t21 = 0.0;
    double t22 = 0.0;

    double time_sum() const { return tau0 + tau1 + tau21 + tau22; }
    double energy_sum() const { return t21 + t22; }

    std::array<double, 6> as_array() const { return {tau0, tau1, tau21, tau22, t21, t22}; }
    static Allocation from_array(const std::array<double, 6>& a)
    {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    bool non_negative() const
    {
        return tau0 >= 0.0 && tau1 >= 0.0 && tau21 >= 0.0 && tau22 >= 0.0 && t21 >= 0.0 &&
               t22 >= 0.0;
    }
};

struct PowerAllocation {
    double p1 = 0.0;
    double p21 = 0.0;
    double p22 = 0.0;
};

inline ChannelGains channel_gains(const Geometry& geo, const FadingDraw& fading = {})
{
    geo.validate();
    if (fading.theta10 < 0.0 || fading.theta20 < 0.0 || fading.theta12 < 0.0)
        throw InvalidParams("fading multipliers must be non-negative");
    const double ref = std::pow(10.0, -geo.ref_loss_db / 10.0);
    auto gain = [&](double theta, double d) { return ref * theta * std::pow(d, -geo.alpha); };
    return {gain(fading.theta10, geo.d10), gain(fading.theta20, geo.d20()),
            gain(fading.theta12, geo.d12())};
}

struct HarvestedEnergy {
    double e1 = 0.0;
    double e2 = 0.0;
};

inline HarvestedEnergy harvested_energy(const SystemParams& p, double tau0)
{
    detail::require(tau0 >= 0.0 && tau0 <= 1.0, "tau0 must lie in [0, 1]");
    return {p.zeta1 * p.p0 * p.gains.h10 * tau0, p.zeta2 * p.p0 * p.gains.h20 * tau0};
}

// Transmit powers implied by an allocation. Zero-length slots carry zero power.
inline PowerAllocation recover_powers(const SystemParams& p, const Allocation& a)
{
    const double u1 = p.eta1 * p.zeta1 * p.p0 * p.gains.h10;
    const double u2 = p.eta2 * p.zeta2 * p.p0 * p.gains.h20;
    PowerAllocation out;
    out.p1 = a.tau1 > 0.0 ? u1 * a.tau0 / a.tau1 : 0.0;
    out.p21 = a.tau21 > 0.0 ? u2 * a.t21 / a.tau21 : 0.0;
    out.p22 = a.tau22 > 0.0 ? u2 * a.t22 / a.tau22 : 0.0;
    return out;
}

struct FeasibilityReport {
    double negativity = 0.0;  // largest negative component magnitude
    double time_excess = 0.0; // max(0, sum tau - 1)
    double energy_excess = 0.0; // max(0, t21 + t22 - tau0)
    bool feasible = true;

    double worst() const { return std::max({negativity, time_excess, energy_excess}); }
};

inline FeasibilityReport validate_allocation(const Allocation& a, double tol = 1e-12)
{
    FeasibilityReport r;
    for (double v : a.as_array()) r.negativity = std::max(r.negativity, -v);
    r.time_excess = std::max(0.0, a.time_sum() - 1.0);
    r.energy_excess = std::max(0.0, a.energy_sum() - a.tau0);
    r.feasible = r.worst() <= tol;
    return r;
}

} // namespace wpcn
