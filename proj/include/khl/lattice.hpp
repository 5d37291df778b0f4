#pragma once

// Lattice linear algebra: bases, LLL reduction, enumeration of lattice points
// in boxes and balls, shortest vectors, and the sublattice function alpha(L).
//
// Bases are stored column-wise: the lattice is { B u : u in Z^n }.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "khl/limits.hpp"

namespace khl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Square basis of a unimodular lattice in R^n. Construction fails with
/// DegenerateInput unless ||det| - 1| <= tolerance.
class LatticeBasis {
 public:
  static constexpr double kDefaultTolerance = 1e-9;

  explicit LatticeBasis(Matrix columns, double tolerance = kDefaultTolerance);

  static LatticeBasis identity(int n);

  int dim() const noexcept { return static_cast<int>(columns_.cols()); }
  const Matrix& columns() const noexcept { return columns_; }
  double tolerance() const noexcept { return tolerance_; }

  Vector point(const IntVector& coeffs) const;

 private:
  Matrix columns_;
  double tolerance_;
};

/// Translate L + offset, with the offset reduced into the fundamental
/// parallelepiped B [0,1)^n.
class AffineLattice {
 public:
  AffineLattice(LatticeBasis basis, Vector offset);

  const LatticeBasis& basis() const noexcept { return basis_; }
  const Vector& offset() const noexcept { return offset_; }
  int dim() const noexcept { return basis_.dim(); }

 private:
  LatticeBasis basis_;
  Vector offset_;
};

/// Axis-aligned box. Coordinate i is [lower_i, upper_i) when half_open[i] is
/// set and [lower_i, upper_i] otherwise.
class Box {
 public:
  Box(Vector lower, Vector upper, std::vector<bool> half_open);

  static Box closed(Vector lower, Vector upper);
  static Box half_open(Vector lower, Vector upper);

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  bool is_half_open(int i) const { return half_open_[static_cast<std::size_t>(i)]; }
  const std::vector<bool>& half_open_mask() const noexcept { return half_open_; }

  bool contains(const Vector& p) const;
  double volume() const;

 private:
  Vector lower_;
  Vector upper_;
  std::vector<bool> half_open_;
};

struct LllResult {
  LatticeBasis basis;
  IntMatrix transform;  // basis = input * transform, det(transform) = +-1
};

LllResult lll_reduce_with_transform(const LatticeBasis& basis, double delta = 0.99);
LatticeBasis lll_reduce(const LatticeBasis& basis, double delta = 0.99);

/// A lattice point together with its integer coordinates in the input basis.
struct LatticePoint {
  IntVector coeffs;
  Vector point;
};

/// Every point of the lattice inside the box, each exactly once, sorted
/// lexicographically by integer coordinates in the LLL-reduced basis.
/// Throws ResourceError once the number of visited enumeration nodes would
/// exceed max_work.
std::vector<LatticePoint> enumerate_in_box(const LatticeBasis& basis, const Box& box,
                                           std::uint64_t max_work = work_cap());

/// Points of L + offset inside the box. coeffs are the integer coordinates of
/// the lattice part, point includes the offset.
std::vector<LatticePoint> enumerate_in_box(const AffineLattice& lattice, const Box& box,
                                           std::uint64_t max_work = work_cap());

/// Nonzero lattice vectors with Euclidean norm <= radius.
std::vector<LatticePoint> enumerate_in_ball(const LatticeBasis& basis, double radius,
                                            std::uint64_t max_work = work_cap());

struct ShortestVector {
  Vector vector;
  double length;
  IntVector coeffs;
};

/// Nonzero lattice vector of minimal Euclidean length. Among vectors whose
/// lengths agree to a relative 1e-12 the lexicographically greatest
/// coordinate vector wins, so the result never depends on enumeration order.
ShortestVector shortest_vector(const LatticeBasis& basis);

double covolume(const LatticeBasis& basis);

/// Dual basis (B^{-1})^T.
LatticeBasis dual(const LatticeBasis& basis);

inline constexpr int kAlphaMaxDim = 4;

/// Smallest covolume of a rank-k sublattice, 1 <= k <= dim. Exact for
/// rank <= 3 (successive-minima vectors of the optimal sublattice are a basis
/// of it, and Minkowski's second theorem bounds their lengths).
double min_sublattice_covolume(const LatticeBasis& basis, int rank);

/// alpha(L) = max over sublattices of covol^{-1}. Ranks above dim/2 are
/// evaluated on the dual lattice, so only ranks 1 and 2 are searched directly.
double alpha(const LatticeBasis& basis, int max_dim = kAlphaMaxDim);

namespace detail {

// LLL on a raw column basis (no unimodularity check). Reduces `basis` in
// place and accumulates the unimodular column transform into `transform`.
void lll_in_place(Matrix& basis, IntMatrix& transform, double delta);

// All integer u with ||basis * u - center|| <= radius. `basis` should be
// LLL-reduced for the enumeration tree to stay small.
std::vector<IntVector> fincke_pohst(const Matrix& basis, const Vector& center, double radius,
                                    std::uint64_t max_work);

}  // namespace detail

}  // namespace khl
