#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond the value types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "khl/dioph.hpp"
#include "khl/lattice.hpp"
#include "khl/rng.hpp"

namespace oracle {

using khl::IntVector;
using khl::Matrix;
using khl::Vector;

// Calls fn(u) for every u in [-R, R]^n.
template <class F>
void for_each_coeff(int n, std::int64_t R, F&& fn) {
  IntVector u = IntVector::Constant(n, -R);
  while (true) {
    fn(u);
    int i = 0;
    while (i < n && u(i) == R) u(i++) = -R;
    if (i == n) return;
    ++u(i);
  }
}

// Coefficients reaching a point of sup-norm <= extent satisfy
// |u|_inf <= ||B^{-1}||_inf * extent.
inline std::int64_t coeff_bound(const Matrix& basis, double extent) {
  const Matrix inv = basis.inverse();
  double row_max = 0.0;
  for (Eigen::Index i = 0; i < inv.rows(); ++i) row_max = std::max(row_max, inv.row(i).cwiseAbs().sum());
  return static_cast<std::int64_t>(std::ceil(row_max * extent)) + 1;
}

inline std::vector<Vector> box_points(const Matrix& basis, const Vector& offset, const khl::Box& box) {
  const double extent = std::max((box.lower() - offset).cwiseAbs().maxCoeff(), (box.upper() - offset).cwiseAbs().maxCoeff());
  std::vector<Vector> out;
  for_each_coeff(static_cast<int>(basis.cols()), coeff_bound(basis, extent), [&](const IntVector& u) {
    const Vector p = basis * u.cast<double>() + offset;
    if (box.contains(p)) out.push_back(p);
  });
  return out;
}

inline double shortest_length(const Matrix& basis) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < basis.cols(); ++i) best = std::min(best, basis.col(i).norm());
  for_each_coeff(static_cast<int>(basis.cols()), coeff_bound(basis, best), [&](const IntVector& u) {
    if (u.isZero()) return;
    best = std::min(best, (basis * u.cast<double>()).norm());
  });
  return best;
}

// alpha for dim 2 or 3 from pairs of short vectors. The optimal rank-2
// sublattice of covolume D <= 1 has a reduced basis with |v1| >= lambda_1 and
// |v1||v2| <= (2/sqrt 3) D, so vectors of norm <= 1.155 / lambda_1 suffice.
inline double alpha_exhaustive(const Matrix& basis) {
  const int n = static_cast<int>(basis.cols());
  const double lambda1 = shortest_length(basis);
  double best = std::max(1.0, 1.0 / lambda1);
  if (n == 3) {
    const double bound = 1.1548 / lambda1;
    std::vector<Vector> vs;
    for_each_coeff(n, coeff_bound(basis, bound), [&](const IntVector& u) {
      if (u.isZero()) return;
      const Vector p = basis * u.cast<double>();
      if (p.norm() <= bound) vs.push_back(p);
    });
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = i + 1; j < vs.size(); ++j) {
        const double gram = vs[i].squaredNorm() * vs[j].squaredNorm() - std::pow(vs[i].dot(vs[j]), 2);
        const double area = std::sqrt(std::max(gram, 0.0));
        if (area > 1e-6 * vs[i].norm() * vs[j].norm()) best = std::max(best, 1.0 / area);
      }
    }
  }
  return best;
}

// Random basis with |det| = 1 and moderate condition number.
inline Matrix random_unimodular(khl::Rng& rng, int n, double max_condition = 30.0) {
  while (true) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = khl::uniform(rng, -1.0, 1.0);
    }
    const double det = std::abs(m.determinant());
    if (det < 1e-3) continue;
    m /= std::pow(det, 1.0 / n);
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s(0) / s(n - 1) <= max_condition) return m;
  }
}

// Exact fractional part of x + k a for double inputs: every double in [0, 1)
// used here is a multiple of 2^-kShift, so the sum is an exact integer
// multiple of 2^-kShift in 128-bit arithmetic.
constexpr int kShift = 62;

inline __int128 fixed(double v) {
  const double scaled = std::ldexp(v, kShift);
  if (scaled != std::floor(scaled)) throw std::runtime_error("oracle: input needs more than 62 fractional bits");
  return static_cast<__int128>(scaled);
}

inline bool frac_below(double x, const std::vector<double>& a_row, const std::vector<std::int64_t>& k, double rho) {
  const __int128 one = static_cast<__int128>(1) << kShift;
  __int128 v = fixed(x);
  for (std::size_t i = 0; i < k.size(); ++i) v += static_cast<__int128>(k[i]) * fixed(a_row[i]);
  v %= one;
  if (v < 0) v += one;
  if (rho >= 1.0) return true;
  // v / 2^62 < rho  <=>  v < ceil(rho * 2^62) for integer v; the scaling is exact.
  return v < static_cast<__int128>(std::ceil(std::ldexp(rho, kShift)));
}

// Box-target hit count for d = 1 by the exact test above.
inline std::uint64_t count_d1(const std::vector<double>& a, const std::vector<double>& x, double c, std::int64_t N) {
  const int r = static_cast<int>(a.size());
  std::uint64_t total = 0;
  for (std::int64_t m = 1; m < N; ++m) {
    const double rho = c * std::pow(static_cast<double>(m), -1.0 / r);
    for (std::int64_t k : {m, -m}) {
      bool hit = true;
      for (int j = 0; j < r && hit; ++j) hit = frac_below(x[static_cast<std::size_t>(j)], {a[static_cast<std::size_t>(j)]}, {k}, rho);
      total += hit ? 1 : 0;
    }
  }
  return total;
}

}  // namespace oracle
