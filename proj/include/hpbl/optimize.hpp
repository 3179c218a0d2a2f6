#pragma once

#include <functional>
#include <utility>

#include "hpbl/types.hpp"

namespace hpbl {

using Objective = std::function<double(const RVector&)>;

// Plain Nelder-Mead with standard coefficients. Stops when the simplex values agree to ftol,
// a zero value is hit, or maxEval evaluations are spent. Returns the best vertex and its value.
std::pair<RVector, double> nelder_mead(const Objective& f, const RVector& x0, double step, int maxEval,
                                       double ftol = 1e-18);

}  // namespace hpbl
