#include "khl/homogeneous.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "khl/errors.hpp"

namespace khl {

namespace {

void check_dims(Dims dims) {
  if (dims.d < 1 || dims.r < 1) throw PreconditionError("dimensions d and r must be positive");
}

void check_flow_time(int t) {
  if (t < 0 || t > kMaxFlowTime) {
    throw PreconditionError("flow time must lie in [0, " + std::to_string(kMaxFlowTime) + "]");
  }
}

// Scale factors of one unit step of the flow.
Vector g_diagonal(Dims dims, int t) {
  Vector diag(dims.n());
  diag.head(dims.d).setConstant(std::ldexp(1.0, -t));
  diag.tail(dims.r).setConstant(std::exp2(t * static_cast<double>(dims.d) / dims.r));
  return diag;
}

double x_norm(const Vector& p, Dims dims, NormKind norm) {
  const auto x = p.head(dims.d);
  return norm == NormKind::sup ? x.cwiseAbs().maxCoeff() : x.norm();
}

void reduce_offset(const Matrix& basis, Vector& offset) {
  Vector u = basis.partialPivLu().solve(offset);
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = std::floor(u(i));
  offset -= basis * u;
}

struct Injection {
  int step;
  Matrix delta;  // r x d
};

// Chunk of fresh random bits of a added per injection. Kept well below 53 so
// no chunk is rounded away when added to an O(1) entry.
constexpr int kInjectBits = 40;

// Runs the flow from B0 for T unit steps. `offset` may be null.
Matrix run_flow(Matrix basis, Vector* offset, Dims dims, int T, const std::vector<Injection>& injections) {
  const Vector step = g_diagonal(dims, 1);
  const int n = dims.n();
  std::size_t next = 0;
  for (int s = 1; s <= T; ++s) {
    basis = step.asDiagonal() * basis;
    if (offset) *offset = step.asDiagonal() * *offset;
    while (next < injections.size() && injections[next].step == s) {
      const Matrix l = lambda_a_matrix(injections[next].delta);
      basis = l * basis;
      if (offset) *offset = l * *offset;
      ++next;
    }
    IntMatrix transform = IntMatrix::Identity(n, n);
    detail::lll_in_place(basis, transform, 0.99);
    if (offset) reduce_offset(basis, *offset);
  }
  if (T == 0) {
    IntMatrix transform = IntMatrix::Identity(n, n);
    detail::lll_in_place(basis, transform, 0.99);
    if (offset) reduce_offset(basis, *offset);
  }
  const double det = std::abs(basis.determinant());
  if (!(det > 0.0) || !std::isfinite(det)) throw DegenerateInput("flow produced a singular basis");
  const double scale = std::pow(det, -1.0 / n);
  basis *= scale;
  if (offset) *offset *= scale;
  return basis;
}

Matrix initial_basis(const Matrix& a, const Perturbation& p) {
  return d_t_matrix(p.tvec) * lambda_bar_matrix(p.bmat) * lambda_a_matrix(a);
}

Matrix uniform_matrix(Rng& rng, int rows, int cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, lo, hi);
  }
  return m;
}

Vector uniform_vector(Rng& rng, int size, double lo, double hi) {
  Vector v(size);
  for (int i = 0; i < size; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

struct SamplerDraw {
  Matrix a;
  Perturbation p;
  std::vector<Injection> injections;
};

SamplerDraw draw_sampler(Rng& rng, Dims dims, int T) {
  check_dims(dims);
  check_flow_time(T);
  SamplerDraw draw;
  draw.a = uniform_matrix(rng, dims.r, dims.d, 0.0, 1.0);
  draw.p.bmat = uniform_matrix(rng, dims.d, dims.r, -1.0, 1.0);
  draw.p.tvec = uniform_vector(rng, dims.n() - 1, -kDefaultEta, kDefaultEta);
  draw.p.y = Vector::Zero(dims.d);
  // a = a_0 + sum_m 2^{-40m} u_m. By g^s Lambda_e g^{-s} = Lambda_{2^{s(1+d/r)} e}
  // the m-th chunk enters at the step where it has grown to O(1).
  const double rate = 1.0 + static_cast<double>(dims.d) / dims.r;
  for (int m = 1;; ++m) {
    const int s = static_cast<int>(std::floor(kInjectBits * m / rate));
    if (s > T) break;
    if (s < 1) continue;
    const double scale = std::exp2(s * rate - kInjectBits * m);
    draw.injections.push_back({s, scale * uniform_matrix(rng, dims.r, dims.d, 0.0, 1.0)});
  }
  return draw;
}

}  // namespace

Matrix g_matrix(const FlowParams& params) {
  check_dims({params.d, params.r});
  return g_diagonal({params.d, params.r}, params.t).asDiagonal();
}

Matrix lambda_a_matrix(const Matrix& a) {
  const auto r = a.rows();
  const auto d = a.cols();
  Matrix m = Matrix::Identity(d + r, d + r);
  m.bottomLeftCorner(r, d) = a;
  return m;
}

LatticeBasis lambda_a(const FormsMatrix& a) { return LatticeBasis(lambda_a_matrix(a.entries())); }

Matrix lambda_bar_matrix(const Matrix& b) {
  const auto d = b.rows();
  const auto r = b.cols();
  Matrix m = Matrix::Identity(d + r, d + r);
  m.topRightCorner(d, r) = b;
  return m;
}

Matrix d_t_matrix(const Vector& tvec) {
  const auto n = tvec.size() + 1;
  Vector diag(n);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < tvec.size(); ++i) {
    diag(i) = 1.0 + tvec(i);
    prod *= diag(i);
  }
  if (prod == 0.0 || !std::isfinite(prod)) throw DegenerateInput("D_t: some factor 1 + t_l vanishes");
  diag(n - 1) = 1.0 / prod;
  return diag.asDiagonal();
}

Perturbation Perturbation::none(Dims dims) {
  return {Vector::Zero(dims.n() - 1), Matrix::Zero(dims.d, dims.r), Vector::Zero(dims.d)};
}

bool ec_membership(const Vector& point, Dims dims, const TargetSpec& spec) {
  if (point.size() != dims.n()) throw PreconditionError("ec_membership: point dimension mismatch");
  const double nx = x_norm(point, dims, spec.norm);
  if (!(nx >= 1.0 && nx < 2.0)) return false;
  const double scale = std::pow(nx, static_cast<double>(dims.d) / dims.r);
  if (spec.iota == TargetShape::box) {
    for (int j = 0; j < dims.r; ++j) {
      const double v = scale * point(dims.d + j);
      if (!(v >= 0.0 && v < spec.c)) return false;
    }
    return true;
  }
  return (scale * point.tail(dims.r)).norm() < spec.c;
}

namespace {

Box ec_bounding_box(Dims dims, const TargetSpec& spec) {
  Vector lo(dims.n());
  Vector hi(dims.n());
  lo.head(dims.d).setConstant(-2.0);
  hi.head(dims.d).setConstant(2.0);
  lo.tail(dims.r).setConstant(spec.iota == TargetShape::box ? 0.0 : -spec.c);
  hi.tail(dims.r).setConstant(spec.c);
  return Box::closed(lo, hi);
}

template <class Points>
std::uint64_t count_members(const Points& points, Dims dims, const TargetSpec& spec) {
  std::uint64_t n = 0;
  for (const auto& p : points) n += ec_membership(p.point, dims, spec) ? 1 : 0;
  return n;
}

}  // namespace

std::uint64_t siegel_count_Ec(const LatticeBasis& lattice, int t, const TargetSpec& spec, Dims dims) {
  check_dims(dims);
  check_flow_time(t);
  spec.validate();
  if (lattice.dim() != dims.n()) throw PreconditionError("siegel_count_Ec: lattice dimension mismatch");
  const Vector g = g_diagonal(dims, t);
  const LatticeBasis flowed(g.asDiagonal() * lattice.columns(), 1e-8);
  return count_members(enumerate_in_box(flowed, ec_bounding_box(dims, spec)), dims, spec);
}

std::uint64_t siegel_count_Ec(const AffineLattice& lattice, int t, const TargetSpec& spec, Dims dims) {
  check_dims(dims);
  check_flow_time(t);
  spec.validate();
  if (lattice.dim() != dims.n()) throw PreconditionError("siegel_count_Ec: lattice dimension mismatch");
  const Vector g = g_diagonal(dims, t);
  const AffineLattice flowed(LatticeBasis(g.asDiagonal() * lattice.basis().columns(), 1e-8),
                             g.asDiagonal() * lattice.offset());
  return count_members(enumerate_in_box(flowed, ec_bounding_box(dims, spec)), dims, spec);
}

namespace {

DaniCheck dani_impl(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, int j, bool affine) {
  spec.validate();
  if (j < 0 || j > kMaxFlowTime) throw PreconditionError("dani_check: j out of range");
  const Dims dims = a.dims();
  DaniCheck out;
  out.lhs = count_V(a, x, spec, std::int64_t{1} << j);
  const LatticeBasis base = lambda_a(a);
  if (affine) {
    Vector shift = Vector::Zero(dims.n());
    shift.tail(dims.r) = x.values();
    const AffineLattice lattice(base, shift);
    for (int t = 0; t < j; ++t) out.rhs += siegel_count_Ec(lattice, t, spec, dims);
  } else {
    for (int t = 0; t < j; ++t) out.rhs += siegel_count_Ec(base, t, spec, dims);
  }
  out.equal = out.lhs == out.rhs;
  return out;
}

}  // namespace

DaniCheck dani_check(const FormsMatrix& a, const TargetSpec& spec, int j) {
  return dani_impl(a, Offset::zero(a.r()), spec, j, false);
}

DaniCheck dani_check_affine(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, int j) {
  return dani_impl(a, x, spec, j, true);
}

LatticeBasis flowed_lattice(const FormsMatrix& a, const Perturbation& p, int T) {
  check_flow_time(T);
  const Dims dims = a.dims();
  if (p.tvec.size() != dims.n() - 1 || p.bmat.rows() != dims.d || p.bmat.cols() != dims.r) {
    throw PreconditionError("flowed_lattice: perturbation dimension mismatch");
  }
  return LatticeBasis(run_flow(initial_basis(a.entries(), p), nullptr, dims, T, {}), 1e-8);
}

LatticeBasis haar_sample(Rng& rng, Dims dims, int burn_in) {
  const SamplerDraw draw = draw_sampler(rng, dims, burn_in);
  return LatticeBasis(run_flow(initial_basis(draw.a, draw.p), nullptr, dims, burn_in, draw.injections), 1e-8);
}

AffineLattice haar_sample_affine(Rng& rng, Dims dims, int burn_in) {
  SamplerDraw draw = draw_sampler(rng, dims, burn_in);
  // Offset drawn after the lattice so that the lattice part coincides with
  // haar_sample for the same generator state.
  draw.p.y = uniform_vector(rng, dims.d, -1.0, 1.0);
  Vector coords(dims.n());
  coords.head(dims.d) = draw.p.y;
  coords.tail(dims.r) = uniform_vector(rng, dims.r, 0.0, 1.0);
  const Matrix b0 = initial_basis(draw.a, draw.p);
  Vector offset = b0 * coords;
  Matrix basis = run_flow(b0, &offset, dims, burn_in, draw.injections);
  return AffineLattice(LatticeBasis(std::move(basis), 1e-8), offset);
}

}  // namespace khl
