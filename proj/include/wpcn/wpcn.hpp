#pragma once

#include "wpcn/analysis.hpp"
#include "wpcn/baseline.hpp"
#include "wpcn/config.hpp"
#include "wpcn/dual.hpp"
#include "wpcn/ellipsoid.hpp"
#include "wpcn/error.hpp"
#include "wpcn/io.hpp"
#include "wpcn/model.hpp"
#include "wpcn/montecarlo.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/rates.hpp"
#include "wpcn/scenario.hpp"
#include "wpcn/solver.hpp"

namespace wpcn {

inline constexpr const char* kVersion = "0.1.0";

} // namespace wpcn
