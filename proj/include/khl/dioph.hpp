#pragma once

// Hit counters for r linear forms in d integer variables against the
// shrinking targets B(k) of radius c |k|^{-d/r}.
//
// Conventions used throughout:
//   * k = 0 is never counted.
//   * Box targets (iota = 1) test the fractional parts in [0,1) against the
//     half-open interval [0, radius).
//   * Ball targets (iota = 2) use the signed representative in [-1/2, 1/2)
//     of each coordinate and the strict inequality ||.|| < radius.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "khl/errors.hpp"
#include "khl/lattice.hpp"

namespace khl {

enum class NormKind { sup, euclidean };
enum class TargetShape { box = 1, ball = 2 };

std::string to_string(NormKind norm);
std::string to_string(TargetShape shape);
NormKind parse_norm(const std::string& s);

struct Dims {
  int d = 1;
  int r = 1;
  int n() const noexcept { return d + r; }
};

/// The r x d coefficient matrix; row j holds the coefficients of form j.
/// Entries are reduced into [0,1).
class FormsMatrix {
 public:
  explicit FormsMatrix(Matrix entries);
  static FormsMatrix zero(Dims dims);

  int d() const noexcept { return static_cast<int>(entries_.cols()); }
  int r() const noexcept { return static_cast<int>(entries_.rows()); }
  Dims dims() const noexcept { return {d(), r()}; }
  const Matrix& entries() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

/// Inhomogeneous shift x in [0,1)^r.
class Offset {
 public:
  explicit Offset(Vector x);
  static Offset zero(int r) { return Offset(Vector::Zero(r)); }

  int r() const noexcept { return static_cast<int>(x_.size()); }
  const Vector& values() const noexcept { return x_; }

 private:
  Vector x_;
};

struct TargetSpec {
  TargetShape iota = TargetShape::box;
  double c = 1.0;
  NormKind norm = NormKind::sup;

  void validate() const;
};

double mod1(double v);

/// Norm of an integer vector in the chosen norm on R^d.
double int_norm(std::span<const std::int64_t> k, NormKind norm);

/// c |k|^{-d/r}; throws PreconditionError for k = 0.
double target_radius(std::span<const std::int64_t> k, const TargetSpec& spec, Dims dims);

/// Fractional part of x_j + sum_i k_i a_{j,i}, in [0,1). Products are formed
/// with an error-free transformation (fma), so the error stays near one ulp
/// even for |k| ~ 2^22.
inline double linear_form_frac(const FormsMatrix& a, const Offset& x, std::span<const std::int64_t> k, int j) {
  double hi = x.values()(j);
  double lo = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto ki = static_cast<double>(k[i]);
    const double aji = a.entries()(j, static_cast<Eigen::Index>(i));
    const double p = ki * aji;
    lo += std::fma(ki, aji, -p);
    hi += p - std::floor(p);
  }
  double s = (hi - std::floor(hi)) + lo;
  s -= std::floor(s);
  return s < 1.0 ? s : 0.0;
}

bool hit_test(const FormsMatrix& a, const Offset& x, std::span<const std::int64_t> k, const TargetSpec& spec);

/// Per dyadic block counts: entry t counts hits with 2^t <= |k| < 2^{t+1}.
using HitSeries = std::vector<std::uint64_t>;

/// Scans every k with 1 <= |k| < N. Radii are tabulated once per scanner, so
/// one scanner should be shared across Monte Carlo samples. Thread-safe for
/// concurrent const use.
class HitScanner {
 public:
  HitScanner(Dims dims, TargetSpec spec, std::int64_t N, std::uint64_t max_work = work_cap());

  Dims dims() const noexcept { return dims_; }
  const TargetSpec& spec() const noexcept { return spec_; }
  std::int64_t horizon() const noexcept { return n_; }

  std::uint64_t count(const FormsMatrix& a, const Offset& x) const;
  HitSeries blocks(const FormsMatrix& a, const Offset& x) const;

  /// Calls on_hit(k) for every hit; used by the pairwise statistics.
  template <class F>
  void for_each_hit(const FormsMatrix& a, const Offset& x, F&& on_hit) const;

 private:
  template <class F>
  void scan(const FormsMatrix& a, const Offset& x, F&& on_hit) const;

  // Integer key of |k|: |k| itself when it is an integer (sup norm or d = 1),
  // otherwise |k|^2.
  std::uint64_t key_of(std::span<const std::int64_t> k) const;
  double radius_for(std::uint64_t key) const {
    return key_squared_ ? spec_.c * std::pow(static_cast<double>(key), exponent_ / 2.0)
                        : radius_table_[static_cast<std::size_t>(key)];
  }
  int block_of(std::uint64_t key) const {
    const int bits = static_cast<int>(std::bit_width(key)) - 1;
    return key_squared_ ? bits / 2 : bits;
  }

  Dims dims_;
  TargetSpec spec_;
  std::int64_t n_;
  bool key_squared_;
  double exponent_;                   // -d/r
  std::vector<double> radius_table_;  // indexed by integer |k| when !key_squared_
};

/// Direct O(N^d r d) scans. Throw ResourceError when (2N-1)^d exceeds the cap.
std::uint64_t count_U(const FormsMatrix& a, const TargetSpec& spec, std::int64_t N);
std::uint64_t count_V(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, std::int64_t N);

/// hit blocks t = 0 .. t_max-1; sums to count_V at N = 2^t_max.
HitSeries hit_series(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, int t_max);

/// Volume of B(1, d, r, c): c^r for boxes, c^r times the unit r-ball volume for balls.
double target_volume_at_one(const TargetSpec& spec, int r);

struct ExpectedCount {
  double integral_mean;  // Vol(B(1)) * d * Vol(unit |.|-ball in R^d) * ln N
  double vhat;           // Vol(B(1)) * ln N
};

ExpectedCount expected_count(const TargetSpec& spec, Dims dims, std::int64_t N);

/// Probability that a uniform point of the torus lands in the target of
/// radius rho (clipped to the fundamental cell).
double hit_probability(const TargetSpec& spec, int r, double rho);

/// Exact finite-N mean of the hit counts for uniformly random forms:
/// sum over 1 <= |k| < N of hit_probability at radius c|k|^{-d/r}.
double exact_expected_count(const TargetSpec& spec, Dims dims, std::int64_t N);

/// Volume of { y in [-1/2,1/2]^r : ||y|| < rho }.
double ball_cube_volume(int r, double rho);

// --- implementation of the scan template -------------------------------------

template <class F>
void HitScanner::for_each_hit(const FormsMatrix& a, const Offset& x, F&& on_hit) const {
  scan(a, x, [&](std::span<const std::int64_t> k, int) { on_hit(k); });
}

template <class F>
void HitScanner::scan(const FormsMatrix& a, const Offset& x, F&& on_hit) const {
  const int d = dims_.d;
  const int r = dims_.r;
  if (a.d() != d || a.r() != r || x.r() != r) throw PreconditionError("HitScanner: dimension mismatch");

  std::vector<std::int64_t> k(static_cast<std::size_t>(d), 0);
  auto test = [&](std::uint64_t key) {
    const double rho = radius_for(key);
    if (spec_.iota == TargetShape::box) {
      for (int j = 0; j < r; ++j) {
        if (!(linear_form_frac(a, x, k, j) < rho)) return;
      }
    } else {
      double s = 0.0;
      const double rho2 = rho * rho;
      for (int j = 0; j < r; ++j) {
        double f = linear_form_frac(a, x, k, j);
        if (f >= 0.5) f -= 1.0;
        s += f * f;
        if (!(s < rho2)) return;
      }
    }
    on_hit(std::span<const std::int64_t>(k), block_of(key));
  };

  if (d == 1) {
    for (std::int64_t m = 1; m < n_; ++m) {
      const auto key = static_cast<std::uint64_t>(m);
      k[0] = m;
      test(key);
      k[0] = -m;
      test(key);
    }
    return;
  }

  // Odometer over the cube (-N, N)^d.
  for (auto& v : k) v = -(n_ - 1);
  while (true) {
    const std::uint64_t key = key_of(k);
    const auto n = static_cast<std::uint64_t>(n_);
    const bool inside = key_squared_ ? key < n * n : key < n;
    if (key != 0 && inside) test(key);
    int i = 0;
    while (i < d && k[static_cast<std::size_t>(i)] == n_ - 1) {
      k[static_cast<std::size_t>(i)] = -(n_ - 1);
      ++i;
    }
    if (i == d) break;
    ++k[static_cast<std::size_t>(i)];
  }
}

}  // namespace khl
