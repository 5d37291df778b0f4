#include "khl/siegel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "khl/errors.hpp"
#include "khl/rng.hpp"

namespace khl {

// --- TestFunction -----------------------------------------------------------

TestFunction::TestFunction(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
  if (boxes_.empty()) throw PreconditionError("TestFunction: at least one box is required");
  const int n = boxes_.front().dim();
  for (const Box& b : boxes_) {
    if (b.dim() != n) throw PreconditionError("TestFunction: boxes of different dimensions");
    bool separated = false;
    for (int i = 0; i < n; ++i) separated = separated || b.lower()(i) > 0.0 || b.upper()(i) < 0.0;
    if (!separated) throw PreconditionError("TestFunction: the closure of the support must avoid the origin");
  }
}

double TestFunction::operator()(const Vector& p) const {
  double v = 0.0;
  for (const Box& b : boxes_) v += b.contains(p) ? 1.0 : 0.0;
  return v;
}

namespace {

// Volume of (s1 * A / p) intersected with (s2 * B / q), s = +-1.
double scaled_overlap(const Box& a, double p, const Box& b, double q, double sign) {
  double vol = 1.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double alo = a.lower()(i) / p;
    const double ahi = a.upper()(i) / p;
    const double blo = sign > 0 ? b.lower()(i) / q : -b.upper()(i) / q;
    const double bhi = sign > 0 ? b.upper()(i) / q : -b.lower()(i) / q;
    const double w = std::min(ahi, bhi) - std::max(alo, blo);
    if (w <= 0.0) return 0.0;
    vol *= w;
  }
  return vol;
}

double pair_sum(const std::vector<Box>& boxes, double p, double q, double sign) {
  double s = 0.0;
  for (const Box& a : boxes) {
    for (const Box& b : boxes) s += scaled_overlap(a, p, b, q, sign);
  }
  return s;
}

}  // namespace

double TestFunction::integral() const {
  double v = 0.0;
  for (const Box& b : boxes_) v += b.volume();
  return v;
}

double TestFunction::integral_of_square() const { return pair_sum(boxes_, 1.0, 1.0, 1.0); }

double TestFunction::inner_radius() const {
  double best = std::numeric_limits<double>::infinity();
  for (const Box& b : boxes_) {
    const Vector nearest = Vector::Zero(b.dim()).cwiseMax(b.lower()).cwiseMin(b.upper());
    best = std::min(best, nearest.norm());
  }
  return best;
}

double TestFunction::outer_radius() const {
  double best = 0.0;
  for (const Box& b : boxes_) best = std::max(best, b.lower().cwiseAbs().cwiseMax(b.upper().cwiseAbs()).norm());
  return best;
}

std::uint64_t siegel_transform(const TestFunction& f, const LatticeBasis& lattice) {
  if (f.dim() != lattice.dim()) throw PreconditionError("siegel_transform: dimension mismatch");
  std::uint64_t n = 0;
  for (const Box& b : f.boxes()) n += enumerate_in_box(lattice, b).size();
  return n;
}

std::uint64_t affine_siegel_transform(const TestFunction& f, const AffineLattice& lattice) {
  if (f.dim() != lattice.dim()) throw PreconditionError("affine_siegel_transform: dimension mismatch");
  std::uint64_t n = 0;
  for (const Box& b : f.boxes()) n += enumerate_in_box(lattice, b).size();
  return n;
}

// --- Monte Carlo drivers ------------------------------------------------------

double MomentReport::z() const {
  const double diff = std::abs(estimate - reference);
  if (std_error > 0.0) return diff / std_error;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

namespace {

void check_mc(const TestFunction* f, Dims dims, const McOptions& opts) {
  if (dims.d < 1 || dims.r < 1) throw PreconditionError("dimensions d and r must be positive");
  if (f && f->dim() != dims.n()) throw PreconditionError("test function dimension must equal d + r");
  if (opts.samples < kMinMonteCarloSamples) throw PreconditionError("Monte Carlo needs at least 100 samples");
}

template <class F>
std::vector<double> sample_values(const McOptions& opts, F&& value_of) {
  std::vector<double> out(static_cast<std::size_t>(opts.samples));
  parallel_for(out.size(), opts.workers, [&](std::size_t i) {
    Rng rng = sample_rng(opts.seed, i);
    out[i] = value_of(rng);
  });
  return out;
}

MomentReport make_report(std::vector<double> per_sample, std::vector<double> values, double reference) {
  MomentReport rep;
  rep.M = values.size();
  rep.estimate = mean(values);
  rep.std_error = standard_error(values);
  rep.reference = reference;
  rep.rel_error = std::abs(rep.estimate - reference) / std::max(std::abs(reference), 1e-12);
  rep.per_sample = std::move(per_sample);
  return rep;
}

}  // namespace

MomentReport rogers_first_mc(const TestFunction& f, Dims dims, const McOptions& opts) {
  check_mc(&f, dims, opts);
  auto values = sample_values(opts, [&](Rng& rng) {
    return static_cast<double>(siegel_transform(f, haar_sample(rng, dims, opts.burn_in)));
  });
  std::vector<double> copy = values;
  return make_report(std::move(copy), std::move(values), f.integral());
}

SecondMomentReference rogers_second_lattice_reference(const TestFunction& f, int q_max) {
  const int n = f.dim();
  if (n < 3) throw DomainError("second moment formula needs d + r > 2");
  if (q_max < 0) throw PreconditionError("q_max must be nonnegative");
  const double v = f.integral();
  const double rho = f.inner_radius();
  const double big_r = f.outer_radius();
  const double m = static_cast<double>(f.boxes().size());
  const double ratio = big_r / rho;

  // Terms with q > Q: int f(px) f(+-qx) dx <= q^{-n} int f(y) sum_p f(py/q) dy,
  // and for |y| >= rho at most m (q (R/rho - 1) + 1) values of p contribute.
  // Four such families (p or q large, either sign).
  auto tail = [&](double q) {
    return 4.0 * m * v *
           ((ratio - 1.0) * std::pow(q, 2.0 - n) / (n - 2.0) + std::pow(q, 1.0 - n) / (n - 1.0));
  };

  SecondMomentReference ref;
  if (q_max == 0) {
    const double leading = v * v + f.integral_of_square();
    q_max = 64;
    while (q_max < (1 << 14) && tail(q_max) > 1e-3 * leading) q_max *= 2;
  }
  ref.q_max = q_max;
  ref.tail_bound = v == 0.0 ? 0.0 : tail(q_max);

  // Only q/p in [rho/R, R/rho] can give overlapping supports.
  KahanSum sum;
  for (int p = 1; p <= q_max; ++p) {
    const int q_lo = std::max(1, static_cast<int>(std::floor(p / ratio)) - 1);
    const int q_hi = std::min(q_max, static_cast<int>(std::ceil(p * ratio)) + 1);
    for (int q = q_lo; q <= q_hi; ++q) {
      if (std::gcd(p, q) != 1) continue;
      sum.add(pair_sum(f.boxes(), p, q, 1.0) + pair_sum(f.boxes(), p, q, -1.0));
    }
  }
  ref.value = v * v + sum.value();
  return ref;
}

MomentReport rogers_second_mc(const TestFunction& f, Dims dims, const McOptions& opts, bool affine) {
  check_mc(&f, dims, opts);
  std::vector<double> s = sample_values(opts, [&](Rng& rng) {
    if (affine) return static_cast<double>(affine_siegel_transform(f, haar_sample_affine(rng, dims, opts.burn_in)));
    return static_cast<double>(siegel_transform(f, haar_sample(rng, dims, opts.burn_in)));
  });
  std::vector<double> sq(s.size());
  std::transform(s.begin(), s.end(), sq.begin(), [](double x) { return x * x; });
  const double v = f.integral();
  const double reference =
      affine ? v * v + f.integral_of_square() : rogers_second_lattice_reference(f).value;
  return make_report(std::move(s), std::move(sq), reference);
}

std::uint64_t truncated_transform(const TestFunction& f, const LatticeBasis& lattice, double K) {
  if (!(K >= 1.0)) throw PreconditionError("truncation level K must be >= 1");
  return alpha(lattice) <= K ? siegel_transform(f, lattice) : 0;
}

DeficitReport truncation_deficit_mc(const TestFunction& f, Dims dims, const std::vector<double>& K_list,
                                    const McOptions& opts) {
  check_mc(&f, dims, opts);
  if (dims.n() > kAlphaMaxDim) throw UnsupportedDimension("alpha is only available for d + r <= 4");
  if (K_list.empty()) throw PreconditionError("K_list must not be empty");
  for (std::size_t i = 0; i < K_list.size(); ++i) {
    if (!(K_list[i] >= 1.0) || (i > 0 && !(K_list[i] > K_list[i - 1]))) {
      throw PreconditionError("K_list must be increasing and >= 1");
    }
  }

  DeficitReport rep;
  rep.M = opts.samples;
  rep.alpha.resize(static_cast<std::size_t>(opts.samples));
  rep.transform.resize(static_cast<std::size_t>(opts.samples));
  parallel_for(rep.alpha.size(), opts.workers, [&](std::size_t i) {
    Rng rng = sample_rng(opts.seed, i);
    const LatticeBasis lattice = haar_sample(rng, dims, opts.burn_in);
    rep.alpha[i] = alpha(lattice);
    rep.transform[i] = static_cast<double>(siegel_transform(f, lattice));
  });
  rep.max_alpha = *std::max_element(rep.alpha.begin(), rep.alpha.end());

  std::vector<double> ks;
  std::vector<double> first;
  std::vector<double> second;
  for (double K : K_list) {
    std::vector<double> d1(rep.alpha.size());
    std::vector<double> d2(rep.alpha.size());
    DeficitRow row;
    row.K = K;
    for (std::size_t i = 0; i < rep.alpha.size(); ++i) {
      const double deficit = rep.alpha[i] > K ? rep.transform[i] : 0.0;
      d1[i] = deficit;
      d2[i] = deficit * deficit;
      row.alpha_events += rep.alpha[i] > K ? 1 : 0;
      row.deficit_events += deficit >= 1.0 ? 1 : 0;
    }
    row.mean_deficit = mean(d1);
    row.mean_deficit_sq = mean(d2);
    row.se_deficit = standard_error(d1);
    row.se_deficit_sq = standard_error(d2);
    rep.insufficient_events = rep.insufficient_events || row.deficit_events < kMinDeficitEvents;
    ks.push_back(K);
    first.push_back(row.mean_deficit);
    second.push_back(row.mean_deficit_sq);
    rep.rows.push_back(row);
  }
  rep.first = loglog_fit(ks, first);
  rep.second = loglog_fit(ks, second);
  return rep;
}

TailReport alpha_tail_mc(Dims dims, const std::vector<double>& s_grid, const McOptions& opts) {
  check_mc(nullptr, dims, opts);
  if (dims.n() > kAlphaMaxDim) throw UnsupportedDimension("alpha is only available for d + r <= 4");
  if (s_grid.empty()) throw PreconditionError("s_grid must not be empty");

  TailReport rep;
  rep.M = opts.samples;
  rep.s_grid = s_grid;
  rep.alpha = sample_values(opts, [&](Rng& rng) { return alpha(haar_sample(rng, dims, opts.burn_in)); });
  for (double s : s_grid) {
    const auto hits = static_cast<std::uint64_t>(
        std::count_if(rep.alpha.begin(), rep.alpha.end(), [s](double a) { return a >= s; }));
    rep.exceed.push_back(hits);
    rep.fraction.push_back(static_cast<double>(hits) / static_cast<double>(rep.M));
  }
  std::vector<std::size_t> order(s_grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return s_grid[i] < s_grid[j]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    rep.monotone = rep.monotone && rep.fraction[order[i]] <= rep.fraction[order[i - 1]];
  }
  rep.fit = loglog_fit(rep.s_grid, rep.fraction);
  return rep;
}

}  // namespace khl
