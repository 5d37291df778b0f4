#pragma once

#include "khl/dioph.hpp"

namespace khl {

inline constexpr int kZetaDefaultTerms = 64;

/// Riemann zeta for real s > 1: direct sum of the first `terms` terms plus an
/// Euler-Maclaurin tail (integral, half term and four Bernoulli corrections).
/// With the default depth the relative error is below 1e-14 for s >= 1.5.
double zeta(double s, int terms = kZetaDefaultTerms);

/// Volume of the unit ball of R^d in the given norm.
double vol_unit_ball(NormKind norm, int d);

}  // namespace khl
