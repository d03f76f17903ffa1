#pragma once

// No-cooperation reference: harvest-then-transmit with the relay slot
// removed (tau21 = t21 = 0) and R1 = R1_10.

#include <optional>

#include "wpcn/solver.hpp"

namespace wpcn {

inline Solution solve_nocoop(const RhoParams& rho, const Weights& w, const SolverOptions& opts = {},
                             const std::optional<DualVars>& warm = std::nullopt)
{
    detail::check_solver_inputs(rho, w, opts);
    return detail::solve_dual<2>(rho, w, opts, warm);
}

inline Solution solve_nocoop(const SystemParams& params, const Weights& w,
                             const SolverOptions& opts = {})
{
    params.validate();
    auto sol = solve_nocoop(rho_params(params), w, opts);
    sol.powers = recover_powers(params, sol.allocation);
    return sol;
}

} // namespace wpcn
