#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "khl/errors.hpp"
#include "khl/siegel.hpp"
#include "oracles.hpp"

using namespace khl;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::uint64_t brute_transform(const TestFunction& f, const Matrix& basis, const Vector& offset) {
  std::uint64_t total = 0;
  for (const Box& b : f.boxes()) {
    for (const Vector& p : oracle::box_points(basis, offset, b)) total += p.isZero() ? 0 : 1;
  }
  return total;
}

// Length of [a/p, b/p] intersected with [a'/q, b'/q], q of either sign.
double overlap_1d(double a, double b, double p, double a2, double b2, double q) {
  const double lo1 = a / p, hi1 = b / p;
  const double lo2 = std::min(a2 / q, b2 / q), hi2 = std::max(a2 / q, b2 / q);
  return std::max(0.0, std::min(hi1, hi2) - std::max(lo1, lo2));
}

// (int f)^2 + sum over p >= 1, 0 < |q| <= Q coprime of int f(px) f(qx) dx.
double naive_second_reference(const TestFunction& f, int Q) {
  double v = f.integral();
  double sum = 0.0;
  for (int p = 1; p <= Q; ++p) {
    for (int q = -Q; q <= Q; ++q) {
      if (q == 0 || std::gcd(p, std::abs(q)) != 1) continue;
      for (const Box& a : f.boxes()) {
        for (const Box& b : f.boxes()) {
          double vol = 1.0;
          for (int i = 0; i < a.dim(); ++i) {
            vol *= overlap_1d(a.lower()(i), a.upper()(i), p, b.lower()(i), b.upper()(i), q);
          }
          sum += vol;
        }
      }
    }
  }
  return v * v + sum;
}

TestFunction unit_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return TestFunction::box(Box::half_open(vec(lo), vec(hi)));
}

}  // namespace

TEST_CASE("test functions must avoid the origin") {
  CHECK_THROWS_AS(unit_box({-1, -1}, {1, 1}), PreconditionError);
  CHECK_THROWS_AS(unit_box({0, -1}, {1, 1}), PreconditionError);
  CHECK_NOTHROW(unit_box({0.1, -1}, {1, 1}));
}

TEST_CASE("test function integrals") {
  const TestFunction f({Box::half_open(vec({1, 0, 0}), vec({2, 1, 1})), Box::half_open(vec({1.5, 0.5, 0}), vec({2.5, 1, 1}))});
  CHECK(f.integral() == doctest::Approx(1.5));
  // Overlap [1.5,2] x [0.5,1] x [0,1] counted twice in the square.
  CHECK(f.integral_of_square() == doctest::Approx(1.5 + 2.0 * 0.25));
  CHECK(f(vec({1.7, 0.7, 0.5})) == 2.0);
  CHECK(f(vec({1.2, 0.7, 0.5})) == 1.0);
}

TEST_CASE("siegel transform examples") {
  const auto z3 = LatticeBasis::identity(3);
  CHECK(siegel_transform(TestFunction::box(Box::closed(vec({0.5, -0.5, -0.5}), vec({1.5, 0.5, 0.5}))), z3) == 1);
  CHECK(siegel_transform(unit_box({0.01, 0.01, 0.01}, {0.4, 0.4, 0.4}), z3) == 0);

  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 10, 10, 0.01;
  const TestFunction gap({Box::closed(vec({-2, -2, 0.005}), vec({2, 2, 2})),
                          Box::closed(vec({-2, -2, -2}), vec({2, 2, -0.005}))});
  const auto expect = brute_transform(gap, m, Vector::Zero(3));
  CHECK(expect == 400);
  CHECK(siegel_transform(gap, LatticeBasis(m)) == expect);
}

TEST_CASE("transforms agree with the coefficient scan on random lattices") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const LatticeBasis b(oracle::random_unimodular(rng, n), 1e-9);
    Vector lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo(i) = uniform(rng, 0.05, 1.0);
      hi(i) = lo(i) + uniform(rng, 0.2, 1.5);
    }
    const TestFunction f({Box::half_open(lo, hi), Box::closed(-hi, -lo)});
    CHECK(siegel_transform(f, b) == brute_transform(f, b.columns(), Vector::Zero(n)));
    const Vector off = Vector::NullaryExpr(n, [&] { return uniform(rng, -1.0, 1.0); });
    const AffineLattice al(b, off);
    CHECK(affine_siegel_transform(f, al) == brute_transform(f, b.columns(), al.offset()));
  }
}

TEST_CASE("affine transform examples") {
  const auto f = unit_box({0.4, 0.4}, {0.6, 0.6});
  CHECK(affine_siegel_transform(f, AffineLattice(LatticeBasis::identity(2), vec({0.5, 0.5}))) == 1);
  Rng rng(42);
  const auto g = unit_box({0.3, -1}, {1.7, 1});
  for (int trial = 0; trial < 5; ++trial) {
    const auto lattice = haar_sample(rng, {1, 1});
    CHECK(affine_siegel_transform(g, AffineLattice(lattice, Vector::Zero(2))) == siegel_transform(g, lattice));
  }
}

TEST_CASE("first moment") {
  McOptions opts;
  opts.samples = 10000;
  opts.seed = 43;
  const auto half = rogers_first_mc(unit_box({1, 0, 0}, {1.5, 1, 1}), {1, 2}, opts);
  CHECK(half.reference == doctest::Approx(0.5));
  CHECK(std::abs(half.z()) <= 3.0);

  const auto box = rogers_first_mc(unit_box({1, 0.2, 0.2}, {1.5, 0.7, 0.7}), {1, 2}, opts);
  CHECK(box.reference == doctest::Approx(0.125));
  CHECK(std::abs(box.z()) <= 3.0);

  opts.samples = 1000;
  const auto flat = rogers_first_mc(TestFunction::box(Box::closed(vec({1, 0.2, 0.2}), vec({1, 0.7, 0.7}))), {1, 2}, opts);
  CHECK(flat.estimate == 0.0);
  CHECK(flat.reference == 0.0);

  opts.samples = 99;
  CHECK_THROWS_AS(rogers_first_mc(unit_box({1, 0, 0}, {1.5, 1, 1}), {1, 2}, opts), PreconditionError);
}

TEST_CASE("second moment reference against a direct double sum") {
  const TestFunction f({Box::half_open(vec({1, 0.2, 0.2}), vec({1.5, 0.7, 0.7})),
                        Box::half_open(vec({-0.9, 0.3, -1}), vec({-0.4, 0.9, -0.5}))});
  const auto ref = rogers_second_lattice_reference(f, 48);
  CHECK(ref.q_max == 48);
  CHECK(ref.value == doctest::Approx(naive_second_reference(f, 48)).epsilon(1e-12));
  // The tail bound covers the terms beyond Q.
  const double wide = naive_second_reference(f, 200);
  CHECK(wide - ref.value >= -1e-12);
  CHECK(wide - ref.value <= ref.tail_bound);
}

TEST_CASE("second moment reference for a tiny positive box") {
  const auto f = unit_box({1, 0.5, 0.5}, {1.01, 0.51, 0.51});
  const double v = f.integral();
  const auto ref = rogers_second_lattice_reference(f);
  CHECK(ref.value == doctest::Approx(v * v + v).epsilon(1e-3));
  CHECK(ref.value >= v * v + v);
  CHECK(ref.tail_bound <= 1e-3 * (v * v + v));
  CHECK_THROWS_AS(rogers_second_lattice_reference(unit_box({1, 0}, {2, 1})), DomainError);
}

TEST_CASE("second moment Monte Carlo") {
  McOptions opts;
  opts.samples = 4000;
  opts.seed = 44;
  const auto f = unit_box({1, 0, 0}, {1.3, 1, 1});
  const auto aff = rogers_second_mc(f, {1, 2}, opts, true);
  CHECK(aff.reference == doctest::Approx(0.39));
  CHECK(std::abs(aff.z()) <= 3.0);
  const auto lat = rogers_second_mc(f, {1, 2}, opts, false);
  CHECK(std::abs(lat.z()) <= 3.0);

  // Quadrupling M halves the standard error.
  opts.samples = 16000;
  const auto aff4 = rogers_second_mc(f, {1, 2}, opts, true);
  CHECK(aff.std_error / aff4.std_error == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("Monte Carlo results do not depend on the worker count") {
  McOptions opts;
  opts.samples = 300;
  opts.seed = 45;
  const auto f = unit_box({1, 0, 0}, {1.5, 1, 1});
  const auto one = rogers_first_mc(f, {1, 2}, opts);
  opts.workers = 4;
  const auto four = rogers_first_mc(f, {1, 2}, opts);
  CHECK(one.per_sample == four.per_sample);
  CHECK(one.estimate == four.estimate);
}

TEST_CASE("truncated transform") {
  const auto f = unit_box({0.5, -0.5, -0.5}, {1.5, 0.5, 0.5});
  const auto z3 = LatticeBasis::identity(3);
  for (double K : {1.0, 2.0, 10.0}) CHECK(truncated_transform(f, z3, K) == siegel_transform(f, z3));
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 0.2, 2.5, 2.0;  // alpha = 5
  const auto f2 = unit_box({0.1, -1, -1}, {1.1, 1, 1});
  CHECK(siegel_transform(f2, LatticeBasis(m)) == 5);
  CHECK(truncated_transform(f2, LatticeBasis(m), 4.9) == 0);
  CHECK(truncated_transform(f2, LatticeBasis(m), 5.1) == 5);
  CHECK_THROWS_AS(truncated_transform(f2, z3, 0.5), PreconditionError);
}

TEST_CASE("truncation deficit") {
  McOptions opts;
  opts.samples = 2000;
  opts.seed = 46;
  const auto f = unit_box({1, 0, 0}, {2, 1, 1});
  const auto rep = truncation_deficit_mc(f, {1, 2}, {2, 4, 1e9}, opts);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[2].mean_deficit == 0.0);
  CHECK(rep.rows[2].alpha_events == 0);
  CHECK(rep.rows[0].mean_deficit >= rep.rows[1].mean_deficit);
  for (std::size_t i = 0; i < rep.alpha.size(); ++i) CHECK(rep.alpha[i] >= 1.0);
  CHECK_THROWS_AS(truncation_deficit_mc(f, {1, 2}, {4, 2}, opts), PreconditionError);
}

TEST_CASE("alpha tail") {
  McOptions opts;
  opts.samples = 2000;
  opts.seed = 47;
  const auto rep = alpha_tail_mc({1, 2}, {1, 2, 3, 4}, opts);
  CHECK(rep.fraction[0] == 1.0);
  CHECK(rep.monotone);
  for (std::size_t i = 1; i < rep.fraction.size(); ++i) CHECK(rep.fraction[i] <= rep.fraction[i - 1]);
}
