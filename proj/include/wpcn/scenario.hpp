#pragma once

// Geometry-driven scenario: radio parameters plus node placement, resolved
// into SystemParams and RhoParams per fading draw.

#include "wpcn/model.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

struct Scenario {
    Geometry geometry;
    SystemParams params; // gains are filled in from the geometry when resolved
    bool explicit_gains = false;

    SystemParams resolve(const FadingDraw& fading = {}) const
    {
        SystemParams p = params;
        if (!explicit_gains) p.gains = channel_gains(geometry, fading);
        p.validate();
        return p;
    }

    RhoParams rho(const FadingDraw& fading = {}) const { return rho_params(resolve(fading)); }
};

// Far user at 10 m, 1 W H-AP, -160 dBm/Hz over 1 MHz, all efficiencies 0.5.
inline Scenario reference_scenario(double alpha = 2.0, double kappa = 0.5)
{
    Scenario s;
    s.geometry.d10 = 10.0;
    s.geometry.kappa = kappa;
    s.geometry.alpha = alpha;
    s.geometry.ref_loss_db = 30.0;
    s.params.p0 = dbm_to_watts(30.0);
    s.params.bandwidth_hz = 1e6;
    s.params.sigma0_sq = dbm_to_watts(-160.0) * s.params.bandwidth_hz;
    s.params.sigma2_sq = s.params.sigma0_sq;
    return s;
}

} // namespace wpcn
