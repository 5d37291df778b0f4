#include "khl/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "khl/errors.hpp"

namespace khl {

double zeta(double s, int terms) {
  if (!(s > 1.0) || !std::isfinite(s)) throw DomainError("zeta: argument must satisfy s > 1");
  if (terms < 8) throw PreconditionError("zeta: need at least 8 direct terms");
  // Sum the direct part from the small end up to limit cancellation-free
  // rounding; all terms are positive.
  double head = 0.0;
  for (int k = terms - 1; k >= 1; --k) head += std::pow(static_cast<double>(k), -s);
  const double n = terms;
  const double ns = std::pow(n, -s);
  double tail = n * ns / (s - 1.0) + 0.5 * ns;
  // B_{2j}/(2j)! times the rising factorial s(s+1)...(s+2j-2) n^{-s-2j+1}.
  constexpr std::array<double, 5> b2j = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0};
  double rising = s;
  double fact = 2.0;
  double npow = ns / n;
  for (std::size_t j = 0; j < b2j.size(); ++j) {
    tail += b2j[j] / fact * rising * npow;
    const double m = 2.0 * static_cast<double>(j);
    rising *= (s + m + 1.0) * (s + m + 2.0);
    fact *= (m + 3.0) * (m + 4.0);
    npow /= n * n;
  }
  return head + tail;
}

double vol_unit_ball(NormKind norm, int d) {
  if (d < 1) throw PreconditionError("vol_unit_ball: dimension must be positive");
  if (norm == NormKind::sup) return std::ldexp(1.0, d);
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

}  // namespace khl
