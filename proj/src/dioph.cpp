#include "khl/dioph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "khl/special.hpp"

namespace khl {

std::string to_string(NormKind norm) { return norm == NormKind::sup ? "sup" : "euclidean"; }
std::string to_string(TargetShape shape) { return shape == TargetShape::box ? "box" : "ball"; }

NormKind parse_norm(const std::string& s) {
  if (s == "sup" || s == "max" || s == "inf") return NormKind::sup;
  if (s == "euclidean" || s == "l2") return NormKind::euclidean;
  throw ValidationError("unknown norm '" + s + "' (expected sup or euclidean)");
}

double mod1(double v) {
  double f = v - std::floor(v);
  return f < 1.0 ? f : 0.0;
}

FormsMatrix::FormsMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw PreconditionError("FormsMatrix: empty matrix");
  if (!entries_.allFinite()) throw PreconditionError("FormsMatrix: non-finite entry");
  entries_ = entries_.unaryExpr([](double v) { return mod1(v); });
}

FormsMatrix FormsMatrix::zero(Dims dims) { return FormsMatrix(Matrix::Zero(dims.r, dims.d)); }

Offset::Offset(Vector x) : x_(std::move(x)) {
  if (!x_.allFinite()) throw PreconditionError("Offset: non-finite entry");
  x_ = x_.unaryExpr([](double v) { return mod1(v); });
}

void TargetSpec::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("TargetSpec: c must be a positive real");
  if (iota != TargetShape::box && iota != TargetShape::ball) throw ValidationError("TargetSpec: iota must be 1 or 2");
}

double int_norm(std::span<const std::int64_t> k, NormKind norm) {
  if (norm == NormKind::sup) {
    std::int64_t m = 0;
    for (auto v : k) m = std::max(m, v < 0 ? -v : v);
    return static_cast<double>(m);
  }
  double s = 0.0;
  for (auto v : k) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

double target_radius(std::span<const std::int64_t> k, const TargetSpec& spec, Dims dims) {
  const double nk = int_norm(k, spec.norm);
  if (nk == 0.0) throw PreconditionError("target_radius: k = 0 is excluded from all counts");
  return spec.c * std::pow(nk, -static_cast<double>(dims.d) / dims.r);
}

bool hit_test(const FormsMatrix& a, const Offset& x, std::span<const std::int64_t> k, const TargetSpec& spec) {
  if (static_cast<int>(k.size()) != a.d() || x.r() != a.r()) throw PreconditionError("hit_test: dimension mismatch");
  const double rho = target_radius(k, spec, a.dims());
  if (spec.iota == TargetShape::box) {
    for (int j = 0; j < a.r(); ++j) {
      if (!(linear_form_frac(a, x, k, j) < rho)) return false;
    }
    return true;
  }
  double s = 0.0;
  for (int j = 0; j < a.r(); ++j) {
    double f = linear_form_frac(a, x, k, j);
    if (f >= 0.5) f -= 1.0;
    s += f * f;
  }
  return s < rho * rho;
}

// --- HitScanner -------------------------------------------------------------

HitScanner::HitScanner(Dims dims, TargetSpec spec, std::int64_t N, std::uint64_t max_work)
    : dims_(dims), spec_(spec), n_(N) {
  spec_.validate();
  if (dims.d < 1 || dims.r < 1) throw PreconditionError("HitScanner: d and r must be positive");
  if (N < 1) throw PreconditionError("HitScanner: N must be >= 1");
  const double cells = std::pow(2.0 * static_cast<double>(N) - 1.0, dims.d);
  if (cells > static_cast<double>(max_work)) {
    std::ostringstream msg;
    msg << std::fixed << std::setprecision(0) << "hit counting: (2N-1)^d = " << cells << " points exceed the work cap";
    throw ResourceError(msg.str(), max_work);
  }
  key_squared_ = spec_.norm == NormKind::euclidean && dims.d >= 2;
  exponent_ = -static_cast<double>(dims.d) / dims.r;
  if (!key_squared_) {
    radius_table_.resize(static_cast<std::size_t>(N));
    radius_table_[0] = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 1; m < N; ++m) {
      radius_table_[static_cast<std::size_t>(m)] = spec_.c * std::pow(static_cast<double>(m), exponent_);
    }
  }
}

std::uint64_t HitScanner::key_of(std::span<const std::int64_t> k) const {
  std::uint64_t key = 0;
  for (auto v : k) {
    const auto a = static_cast<std::uint64_t>(v < 0 ? -v : v);
    key = key_squared_ ? key + a * a : std::max(key, a);
  }
  return key;
}

std::uint64_t HitScanner::count(const FormsMatrix& a, const Offset& x) const {
  std::uint64_t total = 0;
  scan(a, x, [&](std::span<const std::int64_t>, int) { ++total; });
  return total;
}

HitSeries HitScanner::blocks(const FormsMatrix& a, const Offset& x) const {
  // Largest |k| scanned is below N, so the top block index is bounded by
  // floor(log2(N - 1)).
  const int top = n_ > 1 ? static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n_ - 1))) : 0;
  HitSeries series(static_cast<std::size_t>(top), 0);
  scan(a, x, [&](std::span<const std::int64_t>, int block) { ++series[static_cast<std::size_t>(block)]; });
  return series;
}

std::uint64_t count_U(const FormsMatrix& a, const TargetSpec& spec, std::int64_t N) {
  return count_V(a, Offset::zero(a.r()), spec, N);
}

std::uint64_t count_V(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, std::int64_t N) {
  return HitScanner(a.dims(), spec, N).count(a, x);
}

HitSeries hit_series(const FormsMatrix& a, const Offset& x, const TargetSpec& spec, int t_max) {
  if (t_max < 0 || t_max > 62) throw PreconditionError("hit_series: t_max out of range");
  HitSeries s = HitScanner(a.dims(), spec, std::int64_t{1} << t_max).blocks(a, x);
  s.resize(static_cast<std::size_t>(t_max), 0);
  return s;
}

// --- centering constants -------------------------------------------------------

double target_volume_at_one(const TargetSpec& spec, int r) {
  const double cr = std::pow(spec.c, r);
  return spec.iota == TargetShape::box ? cr : cr * vol_unit_ball(NormKind::euclidean, r);
}

ExpectedCount expected_count(const TargetSpec& spec, Dims dims, std::int64_t N) {
  if (N < 1) throw PreconditionError("expected_count: N must be >= 1");
  const double ln_n = std::log(static_cast<double>(N));
  const double vol_target = target_volume_at_one(spec, dims.r);
  return {vol_target * dims.d * vol_unit_ball(spec.norm, dims.d) * ln_n, vol_target * ln_n};
}

namespace {

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
constexpr std::array<double, 16> kGlNodes = {
    0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745, 0.3318686022821276498,
    0.4213512761306353453, 0.5068999089322293900, 0.5877157572407623290, 0.6630442669302152010,
    0.7321821187402896804, 0.7944837959679424070, 0.8493676137325699701, 0.8963211557660521240,
    0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354, 0.9972638618494815636};
constexpr std::array<double, 16> kGlWeights = {
    0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654, 0.0911738786957638847,
    0.0876520930044038111, 0.0833119242269467552, 0.0781938957870703065, 0.0723457941088485062,
    0.0658222227763618468, 0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
    0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706, 0.0070186100094700966};

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    s += kGlWeights[i] * (f(mid + half * kGlNodes[i]) + f(mid - half * kGlNodes[i]));
  }
  return s * half;
}

}  // namespace

double ball_cube_volume(int r, double rho) {
  if (r < 1) throw PreconditionError("ball_cube_volume: r must be positive");
  if (rho <= 0.0) return 0.0;
  if (r == 1) return std::min(2.0 * rho, 1.0);
  if (rho <= 0.5) return vol_unit_ball(NormKind::euclidean, r) * std::pow(rho, r);
  if (rho * rho >= r / 4.0) return 1.0;
  // Slice along the last coordinate; split at the kinks where the slice
  // radius crosses sqrt(m)/2.
  const double top = std::min(rho, 0.5);
  std::vector<double> cuts = {0.0, top};
  for (int m = 1; m < r; ++m) {
    const double s2 = rho * rho - m / 4.0;
    if (s2 > 0.0 && std::sqrt(s2) < top) cuts.push_back(std::sqrt(s2));
  }
  std::sort(cuts.begin(), cuts.end());
  auto slice = [&](double s) { return ball_cube_volume(r - 1, std::sqrt(std::max(0.0, rho * rho - s * s))); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) total += gauss_legendre(slice, cuts[i], cuts[i + 1]);
  }
  return 2.0 * total;
}

double hit_probability(const TargetSpec& spec, int r, double rho) {
  if (spec.iota == TargetShape::box) return std::pow(std::min(rho, 1.0), r);
  return ball_cube_volume(r, rho);
}

double exact_expected_count(const TargetSpec& spec, Dims dims, std::int64_t N) {
  if (N < 1) throw PreconditionError("exact_expected_count: N must be >= 1");
  const double expo = -static_cast<double>(dims.d) / dims.r;
  auto prob_at = [&](double norm) { return hit_probability(spec, dims.r, spec.c * std::pow(norm, expo)); };

  // Sum by norm shell. Sup-norm shells have closed-form sizes; Euclidean
  // shells in d >= 2 are tallied by a scan over |k|^2.
  double total = 0.0;
  double comp = 0.0;
  auto add = [&](double v) {
    const double y = v - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  };
  if (spec.norm == NormKind::sup || dims.d == 1) {
    for (std::int64_t m = 1; m < N; ++m) {
      const double shell = std::pow(2.0 * m + 1.0, dims.d) - std::pow(2.0 * m - 1.0, dims.d);
      add(shell * prob_at(static_cast<double>(m)));
    }
    return total;
  }
  const auto n2 = static_cast<std::uint64_t>(N) * static_cast<std::uint64_t>(N);
  const double cells = std::pow(2.0 * static_cast<double>(N) - 1.0, dims.d);
  if (cells > static_cast<double>(work_cap())) throw ResourceError("exact_expected_count: work cap", work_cap());
  std::vector<std::uint64_t> shells(n2, 0);
  std::vector<std::int64_t> k(static_cast<std::size_t>(dims.d), -(N - 1));
  while (true) {
    std::uint64_t key = 0;
    for (auto v : k) key += static_cast<std::uint64_t>(v * v);
    if (key != 0 && key < n2) ++shells[key];
    int i = 0;
    while (i < dims.d && k[static_cast<std::size_t>(i)] == N - 1) k[static_cast<std::size_t>(i++)] = -(N - 1);
    if (i == dims.d) break;
    ++k[static_cast<std::size_t>(i)];
  }
  for (std::uint64_t m2 = 1; m2 < n2; ++m2) {
    if (shells[m2] != 0) add(static_cast<double>(shells[m2]) * prob_at(std::sqrt(static_cast<double>(m2))));
  }
  return total;
}

}  // namespace khl
