#include "khl/variance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "khl/errors.hpp"
#include "khl/rng.hpp"

namespace khl {

VarianceConstants sigma1_sq(int d, int r, double c, NormKind norm, int zeta_terms) {
  if (d < 1 || r < 1) throw PreconditionError("sigma1_sq: d and r must be positive");
  if (!(c > 0.0)) throw ValidationError("sigma1_sq: c must be positive");
  if (d + r < 3) throw DomainError("sigma1_sq: needs d + r >= 3 so that zeta(d + r - 1) converges");
  VarianceConstants v;
  v.d = d;
  v.r = r;
  v.c = c;
  v.norm = norm;
  v.zeta_num = zeta(d + r - 1.0, zeta_terms);
  v.zeta_den = zeta(d + r, zeta_terms);
  v.vol_B = vol_unit_ball(norm, d);
  v.sigma1_sq = 2.0 * std::pow(c, r) * d * v.zeta_num / v.zeta_den * v.vol_B;
  v.sigma2_sq = vol_unit_ball(NormKind::euclidean, r) * v.sigma1_sq;
  return v;
}

double rogers_variance_rate(const TargetSpec& spec, Dims dims) {
  spec.validate();
  const int n = dims.n();
  if (n < 3) throw DomainError("rogers_variance_rate: needs d + r >= 3");
  const double mu = target_volume_at_one(spec, dims.r) * dims.d * vol_unit_ball(spec.norm, dims.d);
  const double rate = mu * (2.0 * zeta(n - 1.0) / zeta(n) - 1.0);
  return spec.iota == TargetShape::ball ? 2.0 * rate : rate;
}

// --- Green-Kubo -----------------------------------------------------------------

double GreenKuboResult::per_log() const { return estimate / std::numbers::ln2; }
double GreenKuboResult::per_log_std_error() const { return std_error / std::numbers::ln2; }

GreenKuboResult green_kubo(const std::vector<std::vector<double>>& series, int lag_max) {
  if (lag_max < 0) throw PreconditionError("green_kubo: lag_max must be nonnegative");
  if (series.size() < 2) throw PreconditionError("green_kubo: needs at least two samples");
  const std::size_t blocks = series.front().size();
  for (const auto& s : series) {
    if (s.size() != blocks) throw PreconditionError("green_kubo: all samples need the same number of blocks");
  }
  if (blocks < 4 * static_cast<std::size_t>(std::max(lag_max, 1))) {
    throw PreconditionError("green_kubo: needs at least 4 * lag_max blocks per sample");
  }
  const std::size_t m = series.size();
  const auto first = static_cast<std::size_t>(lag_max);

  std::vector<double> means(blocks, 0.0);
  for (std::size_t t = first; t < blocks; ++t) {
    KahanSum s;
    for (const auto& x : series) s.add(x[t]);
    means[t] = s.value() / static_cast<double>(m);
  }

  // h[s] is sample s's share of the estimator, so that the estimate is the
  // plain mean of h and its spread gives the standard error.
  const double bessel = static_cast<double>(m) / static_cast<double>(m - 1);
  std::vector<double> h(m, 0.0);
  GreenKuboResult out;
  out.lag_max = lag_max;
  out.first_block = lag_max;
  out.autocov.assign(static_cast<std::size_t>(lag_max) + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& x = series[i];
    for (int j = 0; j <= lag_max; ++j) {
      const auto lag = static_cast<std::size_t>(j);
      const std::size_t count = blocks - first - lag;
      KahanSum s;
      for (std::size_t t = first; t + lag < blocks; ++t) s.add((x[t] - means[t]) * (x[t + lag] - means[t + lag]));
      const double c = bessel * s.value() / static_cast<double>(count);
      out.autocov[lag] += c / static_cast<double>(m);
      h[i] += (j == 0 ? 1.0 : 2.0) * c;
    }
  }
  out.estimate = mean(h);
  out.std_error = standard_error(h);
  return out;
}

GreenKuboResult green_kubo(const std::vector<HitSeries>& series, int lag_max) {
  std::vector<std::vector<double>> real(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) real[i].assign(series[i].begin(), series[i].end());
  return green_kubo(real, lag_max);
}

// --- experiments -------------------------------------------------------------------

std::string to_string(CltMode mode) {
  switch (mode) {
    case CltMode::U: return "U";
    case CltMode::V_random: return "V";
    case CltMode::V_fixed_x: return "V-fixed-x";
  }
  return "?";
}

std::string to_string(Centering centering) {
  switch (centering) {
    case Centering::exact: return "exact";
    case Centering::integral: return "integral";
    case Centering::vhat: return "vhat";
  }
  return "?";
}

CltMode parse_mode(const std::string& s) {
  if (s == "U") return CltMode::U;
  if (s == "V" || s == "V-random") return CltMode::V_random;
  if (s == "V-fixed-x" || s == "V-fixed") return CltMode::V_fixed_x;
  throw ValidationError("unknown mode '" + s + "' (expected U, V or V-fixed-x)");
}

Centering parse_centering(const std::string& s) {
  if (s == "exact") return Centering::exact;
  if (s == "integral") return Centering::integral;
  if (s == "vhat") return Centering::vhat;
  throw ValidationError("unknown centering '" + s + "' (expected exact, integral or vhat)");
}

namespace {

// Stream index reserved for the shared offset of the fixed-x mode.
constexpr std::uint64_t kFixedXStream = ~std::uint64_t{0};

Matrix draw_forms(Rng& rng, Dims dims) {
  Matrix a(dims.r, dims.d);
  for (int i = 0; i < dims.r; ++i) {
    for (int j = 0; j < dims.d; ++j) a(i, j) = uniform01(rng);
  }
  return a;
}

Vector draw_offset(Rng& rng, int r) {
  Vector x(r);
  for (int i = 0; i < r; ++i) x(i) = uniform01(rng);
  return x;
}

void check_run(Dims dims, const RunOptions& opts, std::uint64_t min_samples) {
  if (dims.d < 1 || dims.r < 1) throw PreconditionError("dimensions d and r must be positive");
  if (opts.samples < min_samples) {
    throw PreconditionError("needs at least " + std::to_string(min_samples) + " samples");
  }
}

}  // namespace

std::vector<HitSeries> hit_series_ensemble(Dims dims, const TargetSpec& spec, int t_max, const RunOptions& opts,
                                           bool affine) {
  check_run(dims, opts, 2);
  if (t_max < 1 || t_max > 40) throw PreconditionError("t_max must lie in [1, 40]");
  const HitScanner scanner(dims, spec, std::int64_t{1} << t_max);
  std::vector<HitSeries> out(static_cast<std::size_t>(opts.samples));
  parallel_for(out.size(), opts.workers, [&](std::size_t i) {
    Rng rng = sample_rng(opts.seed, i);
    const FormsMatrix a(draw_forms(rng, dims));
    const Offset x = affine ? Offset(draw_offset(rng, dims.r)) : Offset::zero(dims.r);
    HitSeries s = scanner.blocks(a, x);
    s.resize(static_cast<std::size_t>(t_max), 0);
    out[i] = std::move(s);
  });
  return out;
}

ExperimentSummary clt_experiment(CltMode mode, Dims dims, const TargetSpec& spec, std::int64_t N,
                                 const RunOptions& opts, Centering centering, std::optional<Vector> fixed_x) {
  spec.validate();
  check_run(dims, opts, kMinCltSamples);
  if (N < 2) throw PreconditionError("clt_experiment: N must be >= 2");
  if (fixed_x && mode != CltMode::V_fixed_x) throw PreconditionError("a fixed x only applies to mode V-fixed-x");

  ExperimentSummary out;
  out.mode = mode;
  out.centering_used = centering;
  out.M = opts.samples;
  out.N = N;

  const double ln_n = std::log(static_cast<double>(N));
  switch (centering) {
    case Centering::exact: out.centering_value = exact_expected_count(spec, dims, N); break;
    case Centering::integral: out.centering_value = expected_count(spec, dims, N).integral_mean; break;
    case Centering::vhat: out.centering_value = expected_count(spec, dims, N).vhat; break;
  }
  if (mode == CltMode::U && dims.n() >= 3) {
    const VarianceConstants v = sigma1_sq(dims.d, dims.r, spec.c, spec.norm);
    out.normalizer = std::sqrt((spec.iota == TargetShape::box ? v.sigma1_sq : v.sigma2_sq) * ln_n);
  } else {
    out.normalizer = std::sqrt(out.centering_value);
  }

  if (mode == CltMode::U && dims.d == 1 && dims.r == 1) {
    out.flags.push_back("(r,d) = (1,1) lies outside the CLT hypothesis for U_N; z normalized by sqrt(centering)");
  }
  if (opts.samples < 200) out.flags.push_back("fewer than 200 samples: KS and moment estimates are coarse");
  if (ln_n < 5.0) out.flags.push_back("ln N < 5: far from the asymptotic regime");

  if (mode == CltMode::V_fixed_x) {
    if (!fixed_x) {
      Rng rng = sample_rng(opts.seed, kFixedXStream);
      fixed_x = draw_offset(rng, dims.r);
    }
    if (fixed_x->size() != dims.r) throw PreconditionError("fixed x must have r entries");
    out.fixed_x = Offset(*fixed_x).values();
  }

  const HitScanner scanner(dims, spec, N);
  out.counts.assign(static_cast<std::size_t>(opts.samples), 0);
  parallel_for(out.counts.size(), opts.workers, [&](std::size_t i) {
    Rng rng = sample_rng(opts.seed, i);
    const FormsMatrix a(draw_forms(rng, dims));
    Offset x = Offset::zero(dims.r);
    if (mode == CltMode::V_random) x = Offset(draw_offset(rng, dims.r));
    if (mode == CltMode::V_fixed_x) x = Offset(*out.fixed_x);
    out.counts[i] = scanner.count(a, x);
  });

  std::vector<double> raw(out.counts.begin(), out.counts.end());
  out.mean_count = mean(raw);
  out.count_var = sample_variance(raw);
  out.z_scores.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.z_scores[i] = (raw[i] - out.centering_value) / out.normalizer;
  out.sample_mean = mean(out.z_scores);
  out.sample_var = sample_variance(out.z_scores);
  out.ks_stat = ks_statistic_normal(out.z_scores);
  out.skewness = skewness(out.z_scores);
  out.excess_kurtosis = excess_kurtosis(out.z_scores);
  return out;
}

std::vector<PairCovariance> pairwise_independence_check(
    Dims dims, const TargetSpec& spec,
    const std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>>& k_pairs,
    const RunOptions& opts) {
  spec.validate();
  check_run(dims, opts, kMinCltSamples);
  if (k_pairs.empty()) throw PreconditionError("pairwise_independence_check: no pairs given");

  // Distinct k's, each evaluated once per sample.
  std::map<std::vector<std::int64_t>, std::size_t> index;
  for (const auto& [k, k2] : k_pairs) {
    for (const auto* v : {&k, &k2}) {
      if (static_cast<int>(v->size()) != dims.d) throw PreconditionError("k must have d entries");
      if (int_norm(*v, spec.norm) == 0.0) throw PreconditionError("k = 0 is excluded");
      index.emplace(*v, index.size());
    }
  }
  std::vector<std::vector<std::int64_t>> ks(index.size());
  for (const auto& [k, i] : index) ks[i] = k;

  const auto m = static_cast<std::size_t>(opts.samples);
  const std::size_t width = ks.size();
  std::vector<unsigned char> affine_hits(m * width);
  std::vector<unsigned char> linear_hits(m * width);
  parallel_for(m, opts.workers, [&](std::size_t s) {
    Rng rng = sample_rng(opts.seed, s);
    const FormsMatrix a(draw_forms(rng, dims));
    const Offset x(draw_offset(rng, dims.r));
    const Offset zero = Offset::zero(dims.r);
    for (std::size_t i = 0; i < width; ++i) {
      affine_hits[s * width + i] = hit_test(a, x, ks[i], spec) ? 1 : 0;
      linear_hits[s * width + i] = hit_test(a, zero, ks[i], spec) ? 1 : 0;
    }
  });

  auto covariance = [&](const std::vector<unsigned char>& hits, std::size_t i, std::size_t j) {
    std::vector<double> xi(m);
    std::vector<double> xj(m);
    for (std::size_t s = 0; s < m; ++s) {
      xi[s] = hits[s * width + i];
      xj[s] = hits[s * width + j];
    }
    const double mi = mean(xi);
    const double mj = mean(xj);
    std::vector<double> prod(m);
    for (std::size_t s = 0; s < m; ++s) prod[s] = (xi[s] - mi) * (xj[s] - mj);
    const double cov = mean(prod) * static_cast<double>(m) / static_cast<double>(m - 1);
    return std::pair{cov, standard_error(prod)};
  };

  std::vector<PairCovariance> out;
  for (const auto& [k, k2] : k_pairs) {
    PairCovariance pc;
    pc.k = k;
    pc.k2 = k2;
    pc.p_k = hit_probability(spec, dims.r, target_radius(k, spec, dims));
    pc.p_k2 = hit_probability(spec, dims.r, target_radius(k2, spec, dims));
    const std::size_t i = index.at(k);
    const std::size_t j = index.at(k2);
    std::tie(pc.cov_affine, pc.se_affine) = covariance(affine_hits, i, j);
    std::tie(pc.cov_linear, pc.se_linear) = covariance(linear_hits, i, j);
    out.push_back(std::move(pc));
  }
  return out;
}

}  // namespace khl
