#pragma once

// The diagonal flow g^t, unipotent translations Lambda_a, the window E_c, and
// an approximate Haar sampler on the space of unimodular (affine) lattices.
//
// Points of R^{d+r} are written (x, y) with x in R^d, y in R^r.

#include <cstdint>

#include "khl/dioph.hpp"
#include "khl/lattice.hpp"
#include "khl/rng.hpp"

namespace khl {

inline constexpr int kMaxFlowTime = 40;
inline constexpr int kDefaultBurnIn = 40;
inline constexpr double kDefaultEta = 0.5;

struct FlowParams {
  int d = 1;
  int r = 1;
  int t = 0;
};

/// diag(2^{-t} Id_d, 2^{t d/r} Id_r).
Matrix g_matrix(const FlowParams& params);

/// [[Id_d, 0], [a, Id_r]] for the r x d matrix a (not reduced mod 1).
Matrix lambda_a_matrix(const Matrix& a);
LatticeBasis lambda_a(const FormsMatrix& a);

/// [[Id_d, b], [0, Id_r]] for the d x r matrix b.
Matrix lambda_bar_matrix(const Matrix& b);

/// diag(1+t_1, ..., 1+t_{n-1}, prod(1+t_l)^{-1}); throws DegenerateInput when
/// some factor 1+t_l vanishes.
Matrix d_t_matrix(const Vector& tvec);

struct Perturbation {
  Vector tvec;  // d+r-1 entries in [-eta, eta]
  Matrix bmat;  // d x r entries in [-1, 1]
  Vector y;     // d entries in [-1, 1]; the x-part of the affine offset

  static Perturbation none(Dims dims);
};

/// (x, y) in E_c: |x| in [1, 2) and |x|^{d/r} y_j in [0, c) for every j
/// (box), or ||(|x|^{d/r} y_j)_j|| < c (ball).
bool ec_membership(const Vector& point, Dims dims, const TargetSpec& spec);

/// Number of points of g^t L in E_c. The lattice is LLL-reduced after
/// flowing and the bounding box of E_c is enumerated.
std::uint64_t siegel_count_Ec(const LatticeBasis& lattice, int t, const TargetSpec& spec, Dims dims);
std::uint64_t siegel_count_Ec(const AffineLattice& lattice, int t, const TargetSpec& spec, Dims dims);

struct DaniCheck {
  std::uint64_t lhs = 0;  // direct hit count up to N = 2^j
  std::uint64_t rhs = 0;  // sum over t < j of the E_c counts
  bool equal = false;
};

/// Compares count_U(a, spec, 2^j) with the orbit sum along g^t Lambda_a Z^{d+r}.
/// The two agree exactly whenever every target radius fits in the unit cell,
/// i.e. c <= 1 for boxes and c <= 1/2 for balls.
DaniCheck dani_check(const FormsMatrix& a, const TargetSpec& spec, int j);

/// Inhomogeneous version: count_V against the affine lattice Lambda_a Z^{d+r} + (0, x).
DaniCheck dani_check_affine(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, int j);

/// g^T D_t Lambda-bar_b Lambda_a Z^{d+r}, flowed one unit step at a time with
/// LLL reduction after each step, determinant renormalized to 1.
LatticeBasis flowed_lattice(const FormsMatrix& a, const Perturbation& p, int T);

/// Draws a, b, t and returns the flowed lattice. Extra random low-order bits
/// of a are injected while flowing, so that the final lattice depends on about
/// T(1 + d/r) + 53 random bits of a instead of the 53 a double holds.
LatticeBasis haar_sample(Rng& rng, Dims dims, int burn_in = kDefaultBurnIn);

/// As haar_sample, with an offset uniform on the torus R^n / L before flowing.
AffineLattice haar_sample_affine(Rng& rng, Dims dims, int burn_in = kDefaultBurnIn);

}  // namespace khl
