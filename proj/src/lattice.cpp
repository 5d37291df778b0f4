#include "khl/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "khl/errors.hpp"

namespace khl {

namespace {

bool lex_less(const IntVector& a, const IntVector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DegenerateInput(std::string(what) + ": basis must be a non-empty square matrix");
  }
}

// Gram-Schmidt data for the column basis: mu(i, j) = <b_i, b*_j> / |b*_j|^2.
struct GramSchmidt {
  Matrix mu;
  Vector norms_sq;
};

GramSchmidt gram_schmidt(const Matrix& b) {
  const Eigen::Index n = b.cols();
  GramSchmidt gs{Matrix::Identity(n, n), Vector::Zero(n)};
  Matrix star = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      gs.mu(i, j) = b.col(i).dot(star.col(j)) / gs.norms_sq(j);
      star.col(i) -= gs.mu(i, j) * star.col(j);
    }
    gs.norms_sq(i) = star.col(i).squaredNorm();
  }
  return gs;
}

double gram_covolume(const Matrix& vectors) {
  const Matrix gram = vectors.transpose() * vectors;
  return std::sqrt(std::max(0.0, gram.determinant()));
}

std::int64_t gcd_of(const IntVector& v) {
  std::int64_t g = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) g = std::gcd(g, v(i));
  return g;
}

// Exact rank test on integer coordinates: some k x k minor is nonzero.
bool independent_columns(const std::vector<const IntVector*>& cols) {
  const auto k = cols.size();
  const auto n = static_cast<int>(cols.front()->size());
  auto at = [&](std::size_t c, int row) { return static_cast<__int128>((*cols[c])(row)); };
  if (k == 1) return !cols[0]->isZero();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (k == 2) {
        if (at(0, i) * at(1, j) - at(0, j) * at(1, i) != 0) return true;
        continue;
      }
      for (int l = j + 1; l < n; ++l) {
        const __int128 det = at(0, i) * (at(1, j) * at(2, l) - at(1, l) * at(2, j)) -
                             at(1, i) * (at(0, j) * at(2, l) - at(0, l) * at(2, j)) +
                             at(2, i) * (at(0, j) * at(1, l) - at(0, l) * at(1, j));
        if (det != 0) return true;
      }
    }
  }
  return false;
}

}  // namespace

// --- LatticeBasis / AffineLattice / Box -----------------------------------

LatticeBasis::LatticeBasis(Matrix columns, double tolerance)
    : columns_(std::move(columns)), tolerance_(tolerance) {
  require_square(columns_, "LatticeBasis");
  if (!columns_.allFinite()) throw DegenerateInput("LatticeBasis: non-finite entries");
  const double det = std::abs(columns_.determinant());
  if (det == 0.0) throw DegenerateInput("LatticeBasis: columns are linearly dependent");
  if (std::abs(det - 1.0) > tolerance_) {
    throw DegenerateInput("LatticeBasis: |det| = " + std::to_string(det) + " is not 1");
  }
}

LatticeBasis LatticeBasis::identity(int n) { return LatticeBasis(Matrix::Identity(n, n)); }

Vector LatticeBasis::point(const IntVector& coeffs) const {
  return columns_ * coeffs.cast<double>();
}

AffineLattice::AffineLattice(LatticeBasis basis, Vector offset)
    : basis_(std::move(basis)), offset_(std::move(offset)) {
  if (offset_.size() != basis_.dim()) throw DegenerateInput("AffineLattice: offset dimension mismatch");
  // Subtract a lattice vector rather than rebuilding B frac(u): coordinates
  // the shift leaves exact (such as an integer x-part) stay exact.
  Vector u = basis_.columns().partialPivLu().solve(offset_);
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = std::floor(u(i));
  offset_ -= basis_.columns() * u;
}

Box::Box(Vector lower, Vector upper, std::vector<bool> half_open)
    : lower_(std::move(lower)), upper_(std::move(upper)), half_open_(std::move(half_open)) {
  if (lower_.size() != upper_.size() || static_cast<Eigen::Index>(half_open_.size()) != lower_.size()) {
    throw PreconditionError("Box: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_(i) <= upper_(i))) throw PreconditionError("Box: lower bound exceeds upper bound");
    if (!std::isfinite(lower_(i)) || !std::isfinite(upper_(i))) throw PreconditionError("Box: unbounded");
  }
}

Box Box::closed(Vector lower, Vector upper) {
  const auto n = static_cast<std::size_t>(lower.size());
  return Box(std::move(lower), std::move(upper), std::vector<bool>(n, false));
}

Box Box::half_open(Vector lower, Vector upper) {
  const auto n = static_cast<std::size_t>(lower.size());
  return Box(std::move(lower), std::move(upper), std::vector<bool>(n, true));
}

bool Box::contains(const Vector& p) const {
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (p(i) < lower_(i)) return false;
    if (half_open_[static_cast<std::size_t>(i)] ? p(i) >= upper_(i) : p(i) > upper_(i)) return false;
  }
  return true;
}

double Box::volume() const { return (upper_ - lower_).prod(); }

// --- LLL --------------------------------------------------------------------

namespace detail {

void lll_in_place(Matrix& b, IntMatrix& transform, double delta) {
  if (!(delta > 0.25 && delta < 1.0)) throw PreconditionError("lll_reduce: delta must lie in (0.25, 1)");
  const Eigen::Index n = b.cols();
  if (transform.rows() != n || transform.cols() != n) transform = IntMatrix::Identity(n, n);
  if (n < 2) return;

  constexpr long kMaxIterations = 1'000'000;
  long iterations = 0;
  GramSchmidt gs = gram_schmidt(b);
  Eigen::Index k = 1;
  while (k < n) {
    if (++iterations > kMaxIterations) throw DegenerateInput("lll_reduce: no convergence");
    // Size-reduce b_k against b_{k-1}, ..., b_0.
    bool changed = false;
    for (Eigen::Index j = k - 1; j >= 0; --j) {
      const double q = std::round(gs.mu(k, j));
      if (q == 0.0) continue;
      if (std::abs(q) > 9.0e18) throw DegenerateInput("lll_reduce: coefficient overflow");
      const auto qi = static_cast<std::int64_t>(q);
      b.col(k) -= q * b.col(j);
      transform.col(k) -= qi * transform.col(j);
      for (Eigen::Index l = 0; l < j; ++l) gs.mu(k, l) -= q * gs.mu(j, l);
      gs.mu(k, j) -= q;
      changed = true;
    }
    if (changed) gs = gram_schmidt(b);
    const double mu = gs.mu(k, k - 1);
    if (gs.norms_sq(k) >= (delta - mu * mu) * gs.norms_sq(k - 1)) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      transform.col(k).swap(transform.col(k - 1));
      gs = gram_schmidt(b);
      k = std::max<Eigen::Index>(k - 1, 1);
    }
  }
}

std::vector<IntVector> fincke_pohst(const Matrix& basis, const Vector& center, double radius,
                                    std::uint64_t max_work) {
  const auto n = static_cast<int>(basis.cols());
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  const Vector y = qr.householderQ().transpose() * center;
  const double r2 = radius * radius;

  std::vector<IntVector> out;
  IntVector u = IntVector::Zero(n);
  std::uint64_t work = 0;

  // Depth-first over coordinates n-1 .. 0 of the triangular system.
  auto recurse = [&](auto&& self, int i, double partial) -> void {
    double s = y(i);
    for (int j = i + 1; j < n; ++j) s -= r(i, j) * static_cast<double>(u(j));
    const double rii = r(i, i);
    const double c = s / rii;
    const double rem = r2 - partial;
    if (rem < 0.0) return;
    const double w = std::sqrt(rem) / std::abs(rii);
    const double lo = std::ceil(c - w);
    const double hi = std::floor(c + w);
    if (hi - lo + 1.0 > static_cast<double>(max_work)) {
      throw ResourceError("lattice enumeration: too many candidates", max_work);
    }
    for (double v = lo; v <= hi; v += 1.0) {
      if (++work > max_work) throw ResourceError("lattice enumeration: work cap exceeded", max_work);
      const double diff = s - rii * v;
      const double p = partial + diff * diff;
      if (p > r2) continue;
      u(i) = static_cast<std::int64_t>(v);
      if (i == 0) {
        out.push_back(u);
      } else {
        self(self, i - 1, p);
      }
    }
    u(i) = 0;
  };
  recurse(recurse, n - 1, 0.0);
  return out;
}

}  // namespace detail

LllResult lll_reduce_with_transform(const LatticeBasis& basis, double delta) {
  Matrix b = basis.columns();
  IntMatrix t = IntMatrix::Identity(basis.dim(), basis.dim());
  detail::lll_in_place(b, t, delta);
  // Recompute from the original basis so floating drift from the in-place
  // updates does not accumulate.
  Matrix fresh = basis.columns() * t.cast<double>();
  return {LatticeBasis(std::move(fresh), basis.tolerance()), std::move(t)};
}

LatticeBasis lll_reduce(const LatticeBasis& basis, double delta) {
  return lll_reduce_with_transform(basis, delta).basis;
}

// --- Enumeration -----------------------------------------------------------

namespace {

// Enumerate lattice points (plus offset) in a box. The box is mapped onto the
// cube [-1,1]^n by an axis scaling, the scaled basis is LLL-reduced, and the
// circumscribed ball of radius sqrt(n) is enumerated; candidates are then
// filtered against the exact box in the original coordinates.
std::vector<LatticePoint> enumerate_box_impl(const LatticeBasis& basis, const Vector& offset,
                                             const Box& box, std::uint64_t max_work) {
  const int n = basis.dim();
  if (box.dim() != n) throw PreconditionError("enumerate_in_box: dimension mismatch");

  Vector center = (box.lower() + box.upper()) / 2.0;
  Vector half = (box.upper() - box.lower()) / 2.0;
  for (int i = 0; i < n; ++i) {
    const double floor_width = 1e-9 * std::max(1.0, std::abs(center(i)));
    half(i) = std::max(half(i), floor_width);
  }
  const Vector inv_half = half.cwiseInverse();

  Matrix scaled = inv_half.asDiagonal() * basis.columns();
  IntMatrix transform = IntMatrix::Identity(n, n);
  detail::lll_in_place(scaled, transform, 0.99);
  const Vector target = inv_half.asDiagonal() * (center - offset);

  const double radius = std::sqrt(static_cast<double>(n)) * (1.0 + 1e-9) + 1e-12;
  std::vector<IntVector> reduced = detail::fincke_pohst(scaled, target, radius, max_work);
  std::sort(reduced.begin(), reduced.end(), lex_less);

  std::vector<LatticePoint> out;
  for (const IntVector& ur : reduced) {
    IntVector coeffs = transform * ur;
    Vector p = basis.point(coeffs) + offset;
    if (box.contains(p)) out.push_back({std::move(coeffs), std::move(p)});
  }
  return out;
}

}  // namespace

std::vector<LatticePoint> enumerate_in_box(const LatticeBasis& basis, const Box& box, std::uint64_t max_work) {
  return enumerate_box_impl(basis, Vector::Zero(basis.dim()), box, max_work);
}

std::vector<LatticePoint> enumerate_in_box(const AffineLattice& lattice, const Box& box, std::uint64_t max_work) {
  return enumerate_box_impl(lattice.basis(), lattice.offset(), box, max_work);
}

std::vector<LatticePoint> enumerate_in_ball(const LatticeBasis& basis, double radius, std::uint64_t max_work) {
  const int n = basis.dim();
  Matrix reduced = basis.columns();
  IntMatrix transform = IntMatrix::Identity(n, n);
  detail::lll_in_place(reduced, transform, 0.99);
  std::vector<IntVector> us =
      detail::fincke_pohst(reduced, Vector::Zero(n), radius * (1.0 + 1e-9) + 1e-300, max_work);
  std::sort(us.begin(), us.end(), lex_less);
  std::vector<LatticePoint> out;
  for (const IntVector& ur : us) {
    if (ur.isZero()) continue;
    IntVector coeffs = transform * ur;
    Vector p = basis.point(coeffs);
    if (p.norm() <= radius) out.push_back({std::move(coeffs), std::move(p)});
  }
  return out;
}

ShortestVector shortest_vector(const LatticeBasis& basis) {
  const int n = basis.dim();
  Matrix reduced = basis.columns();
  IntMatrix transform = IntMatrix::Identity(n, n);
  detail::lll_in_place(reduced, transform, 0.99);
  double bound = reduced.colwise().norm().minCoeff();
  std::vector<IntVector> us = detail::fincke_pohst(reduced, Vector::Zero(n), bound * (1.0 + 1e-9), work_cap());

  ShortestVector best{Vector(), std::numeric_limits<double>::infinity(), IntVector()};
  auto lex_greater = [](const Vector& a, const Vector& b) {
    return std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(), a.data() + a.size());
  };
  for (const IntVector& ur : us) {
    if (ur.isZero()) continue;
    IntVector coeffs = transform * ur;
    Vector v = basis.point(coeffs);
    const double len = v.norm();
    const double tie = 1e-12 * std::max(len, best.length == std::numeric_limits<double>::infinity() ? len : best.length);
    if (len < best.length - tie || (std::abs(len - best.length) <= tie && lex_greater(v, best.vector))) {
      best = {std::move(v), len, std::move(coeffs)};
    }
  }
  if (best.vector.size() == 0) throw DegenerateInput("shortest_vector: enumeration found no vector");
  return best;
}

double covolume(const LatticeBasis& basis) { return std::abs(basis.columns().determinant()); }

LatticeBasis dual(const LatticeBasis& basis) {
  return LatticeBasis(basis.columns().inverse().transpose(), basis.tolerance());
}

// --- alpha -------------------------------------------------------------------

double min_sublattice_covolume(const LatticeBasis& basis, int rank) {
  const int n = basis.dim();
  if (rank < 1 || rank > n) throw PreconditionError("min_sublattice_covolume: rank out of range");
  if (rank == n) return covolume(basis);
  if (rank == 1) return shortest_vector(basis).length;
  if (rank > 3) throw UnsupportedDimension("min_sublattice_covolume: rank > 3 is not supported");

  const LllResult red = lll_reduce_with_transform(basis);
  const double candidate = gram_covolume(red.basis.columns().leftCols(rank));
  const double lambda1 = shortest_vector(red.basis).length;

  // Minkowski: prod of successive minima of a rank-k lattice <= gamma_k^{k/2} covol.
  constexpr std::array<double, 3> kMinkowski = {1.0, 1.1547005383792515, 1.4142135623730951};
  const double factor = kMinkowski[static_cast<std::size_t>(rank - 1)] * candidate;
  // Bound on the i-th successive minimum (0-based) of an optimal sublattice.
  std::vector<double> bound(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i) {
    bound[static_cast<std::size_t>(i)] =
        std::pow(factor / std::pow(lambda1, i), 1.0 / static_cast<double>(rank - i)) * (1.0 + 1e-9);
  }

  std::vector<LatticePoint> pts = enumerate_in_ball(red.basis, bound.back());
  // One representative per +-pair.
  std::erase_if(pts, [](const LatticePoint& p) {
    for (Eigen::Index i = 0; i < p.coeffs.size(); ++i) {
      if (p.coeffs(i) != 0) return p.coeffs(i) < 0;
    }
    return true;
  });
  std::vector<double> norms;
  norms.reserve(pts.size());
  for (const auto& p : pts) norms.push_back(p.point.norm());
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });

  double best = candidate;
  Matrix chosen(n, rank);
  std::vector<const IntVector*> chosen_coeffs(static_cast<std::size_t>(rank));
  auto search = [&](auto&& self, int depth, std::size_t start, double norm_product) -> void {
    for (std::size_t idx = start; idx < order.size(); ++idx) {
      const std::size_t k = order[idx];
      if (norms[k] > bound[static_cast<std::size_t>(depth)]) break;
      if (depth == 0 && std::abs(gcd_of(pts[k].coeffs)) != 1) continue;
      chosen.col(depth) = pts[k].point;
      chosen_coeffs[static_cast<std::size_t>(depth)] = &pts[k].coeffs;
      const double prod = norm_product * norms[k];
      if (!independent_columns({chosen_coeffs.begin(), chosen_coeffs.begin() + depth + 1})) continue;
      const double vol = gram_covolume(chosen.leftCols(depth + 1));
      if (depth + 1 == rank) {
        best = std::min(best, vol);
      } else {
        self(self, depth + 1, idx + 1, prod);
      }
    }
  };
  search(search, 0, 0, 1.0);
  return best;
}

double alpha(const LatticeBasis& basis, int max_dim) {
  const int n = basis.dim();
  if (n > max_dim) {
    throw UnsupportedDimension("alpha: dimension " + std::to_string(n) + " exceeds cap " + std::to_string(max_dim));
  }
  double result = 1.0;
  std::optional<LatticeBasis> dual_basis;
  for (int k = 1; k < n; ++k) {
    double cov;
    if (k <= n - k) {
      cov = min_sublattice_covolume(basis, k);
    } else {
      if (!dual_basis) dual_basis.emplace(dual(basis));
      cov = min_sublattice_covolume(*dual_basis, n - k) * covolume(basis);
    }
    result = std::max(result, 1.0 / cov);
  }
  return result;
}

}  // namespace khl
