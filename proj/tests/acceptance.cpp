// Acceptance run: one PASS/FAIL line per criterion A1..A9, plus indented
// info lines. Exit status is nonzero if any criterion fails. Pass criterion
// names (e.g. "A1 A8") as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "khl/dioph.hpp"
#include "khl/homogeneous.hpp"
#include "khl/lattice.hpp"
#include "khl/siegel.hpp"
#include "khl/stats.hpp"
#include "khl/variance.hpp"
#include "oracles.hpp"

using namespace khl;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

void info(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

const TargetSpec kBox{TargetShape::box, 1.0, NormKind::sup};
const Dims k12{1, 2};
const int kWorkers = default_workers();

// --- A1 --------------------------------------------------------------------------

Verdict a1() {
  int equal = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng = sample_rng(1, i);
    Matrix a(2, 1);
    a << uniform01(rng), uniform01(rng);
    equal += dani_check(FormsMatrix(a), kBox, 12).equal ? 1 : 0;
  }
  return {equal == 100, fmt("%d/100 samples with lhs == rhs at j = 12", equal)};
}

// --- A2 --------------------------------------------------------------------------

Verdict a2() {
  McOptions opts;
  opts.samples = 10000;
  opts.seed = 2;
  opts.workers = kWorkers;
  const auto box = TestFunction::box(Box::half_open(vec({1, 0.2, 0.2}), vec({1.5, 0.7, 0.7})));
  const auto aff_box = TestFunction::box(Box::half_open(vec({1, 0, 0}), vec({1.3, 1, 1})));

  const auto first = rogers_first_mc(box, k12, opts);
  const auto affine = rogers_second_mc(aff_box, k12, opts, true);
  const auto lattice = rogers_second_mc(box, k12, opts, false);
  const auto ref = rogers_second_lattice_reference(box);
  info("first moment   %.5f vs %.5f  (se %.5f, z %+.2f)", first.estimate, first.reference, first.std_error, first.z());
  info("affine second  %.5f vs %.5f  (se %.5f, z %+.2f)", affine.estimate, affine.reference, affine.std_error,
       affine.z());
  info("lattice second %.5f vs %.6f  (se %.5f, z %+.2f; reference Q = %d, tail bound %.1e)", lattice.estimate,
       lattice.reference, lattice.std_error, lattice.z(), ref.q_max, ref.tail_bound);
  const bool pass = std::abs(first.z()) <= 3 && std::abs(affine.z()) <= 3 && std::abs(lattice.z()) <= 3 &&
                    std::abs(first.reference - 0.125) < 1e-12 && std::abs(affine.reference - 0.39) < 1e-12;
  return {pass, fmt("|z| = %.2f, %.2f, %.2f (limit 3)", std::abs(first.z()), std::abs(affine.z()),
                    std::abs(lattice.z()))};
}

// --- A3 --------------------------------------------------------------------------

Verdict a3() {
  const auto deep = sigma1_sq(1, 2, 1.0, NormKind::sup, 256);
  const auto shallow = sigma1_sq(1, 2, 1.0, NormKind::sup, 24);
  const double consistency = std::abs(deep.sigma1_sq - shallow.sigma1_sq) / deep.sigma1_sq;
  const double sigma = deep.sigma1_sq;
  info("sigma1^2 = %.10f (zeta depth 256 vs 24: rel diff %.1e)", sigma, consistency);

  const RunOptions opts{3000, 3, kWorkers};
  const auto series = hit_series_ensemble(k12, kBox, 18, opts, false);
  std::vector<HitSeries> prefix(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) prefix[i].assign(series[i].begin(), series[i].begin() + 12);
  const int lag = 3;
  const auto gk18 = green_kubo(series, lag);
  const auto gk12 = green_kubo(prefix, lag);
  const double est18 = gk18.per_log(), est12 = gk12.per_log();
  const double dev18 = std::abs(est18 - sigma) / sigma, dev12 = std::abs(est12 - sigma) / sigma;
  info("Green-Kubo per unit ln N, lag %d: t_max 12 -> %.3f +- %.3f, t_max 18 -> %.3f +- %.3f", lag, est12,
       gk12.per_log_std_error(), est18, gk18.per_log_std_error());
  info("relative deviation from sigma1^2: %.3f at t_max 12, %.3f at t_max 18 (limit 0.20)", dev12, dev18);
  const auto gk18_lag4 = green_kubo(series, 4);
  info("diagnostic: t_max 18 with lag 4 -> %.3f +- %.3f", gk18_lag4.per_log(), gk18_lag4.per_log_std_error());
  const double rate = rogers_variance_rate(kBox, k12);
  info("pair-correlation rate mu (2 zeta(2)/zeta(3) - 1) = %.4f; t_max 18 estimate is %.2f se from it", rate,
       (est18 - rate) / gk18.per_log_std_error());
  const bool pass = consistency <= 1e-10 && dev18 <= 0.2 && dev18 <= dev12;
  return {pass, fmt("zeta consistency %.1e, deviation %.3f at t_max 18 (limit 0.20), trend %s", consistency, dev18,
                    dev18 <= dev12 ? "ok" : "worse")};
}

// --- A4 --------------------------------------------------------------------------

// KS against N(0,1) after spreading each integer count uniformly over its unit
// cell; removes the lattice staircase from the statistic. Diagnostic only.
double jittered_ks(const ExperimentSummary& s, std::uint64_t seed) {
  std::vector<double> z(s.counts.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    Rng rng = sample_rng(seed, i);
    z[i] = (static_cast<double>(s.counts[i]) + uniform01(rng) - 0.5 - s.centering_value) / s.normalizer;
  }
  return ks_statistic_normal(z);
}

Verdict a4() {
  const std::int64_t N = 1 << 16;
  const RunOptions opts{2000, 4, kWorkers};
  const auto v = clt_experiment(CltMode::V_random, k12, kBox, N, opts);
  const auto u = clt_experiment(CltMode::U, k12, kBox, N, opts);
  info("mode V (exact centering %.3f): mean %+.4f var %.4f ks %.4f skew %+.3f", v.centering_value, v.sample_mean,
       v.sample_var, v.ks_stat, v.skewness);
  info("mode U (sigma1^2 normalization): mean %+.4f var %.4f ks %.4f", u.sample_mean, u.sample_var, u.ks_stat);
  // Diagnostics, not part of the verdict.
  double bern = 0.0, pois = 0.0;
  for (std::int64_t m = 1; m < N; ++m) {
    const double p = 1.0 / static_cast<double>(m);
    pois += 2 * p;
    bern += 2 * p * (1 - p);
  }
  info("independent-Bernoulli variance ratio at this N: %.3f", bern / pois);
  info("jittered ks (diagnostic): mode V %.4f, mode U %.4f", jittered_ks(v, 104), jittered_ks(u, 104));
  const auto vi = clt_experiment(CltMode::V_random, k12, kBox, N, opts, Centering::integral);
  info("mode V with integral centering %.3f: mean %+.4f var %.4f ks %.4f", vi.centering_value, vi.sample_mean,
       vi.sample_var, vi.ks_stat);
  const bool pass = std::abs(v.sample_mean) <= 0.07 && std::abs(v.sample_var - 1) <= 0.2 && v.ks_stat <= 0.06 &&
                    u.ks_stat <= 0.08;
  return {pass, fmt("V: |mean| %.3f (0.07), |var-1| %.3f (0.2), ks %.3f (0.06); U: ks %.3f (0.08)",
                    std::abs(v.sample_mean), std::abs(v.sample_var - 1), v.ks_stat, u.ks_stat)};
}

// --- A5 --------------------------------------------------------------------------

Verdict a5() {
  using Pairs = std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>>;
  Pairs pairs;
  for (std::int64_t i = 1; i <= 7 && pairs.size() < 20; ++i) {
    for (std::int64_t j = i + 1; j <= 7 && pairs.size() < 20; ++j) pairs.push_back({{i}, {j}});
  }
  const RunOptions opts{100000, 5, kWorkers};
  const auto rows = pairwise_independence_check({1, 1}, {TargetShape::box, 0.5, NormKind::sup}, pairs, opts);
  int within = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    const double z = r.cov_affine / r.se_affine;
    within += std::abs(z) <= 3 ? 1 : 0;
    worst = std::max(worst, std::abs(z));
  }
  const auto contrast = pairwise_independence_check({1, 1}, {TargetShape::box, 0.9, NormKind::sup}, {{{1}, {2}}}, opts);
  const double cz = contrast[0].cov_linear / contrast[0].se_linear;
  info("random (a,x): %d/20 pairs within 3 se, largest |z| %.2f", within, worst);
  info("x = 0, k = 1, k' = 2, c = 0.9: cov %.4f (se %.4f, z %.1f; exact 0.045)", contrast[0].cov_linear,
       contrast[0].se_linear, cz);
  return {within == 20 && std::abs(cz) > 3, fmt("%d/20 within 3 se; contrast |z| = %.1f (> 3)", within, std::abs(cz))};
}

// --- A6 --------------------------------------------------------------------------

Verdict a6() {
  McOptions opts;
  opts.samples = 20000;
  opts.seed = 6;
  opts.workers = kWorkers;
  const auto rep = alpha_tail_mc(k12, {2, 3, 4, 6, 8}, opts);
  std::string tail;
  for (std::size_t i = 0; i < rep.s_grid.size(); ++i) tail += fmt("%g:%.4f ", rep.s_grid[i], rep.fraction[i]);
  info("tail %s", tail.c_str());
  return {rep.fit.slope <= -2.5 && rep.monotone,
          fmt("slope %.3f (limit -2.5), monotone %s", rep.fit.slope, rep.monotone ? "yes" : "no")};
}

// --- A7 --------------------------------------------------------------------------

Verdict a7() {
  McOptions opts;
  opts.samples = 100000;
  opts.seed = 7;
  opts.workers = kWorkers;
  const auto f = TestFunction::box(Box::half_open(vec({1, 0, 0}), vec({2, 1, 1})));
  const auto rep = truncation_deficit_mc(f, k12, {2, 4, 8, 16}, opts);
  for (const auto& row : rep.rows) {
    info("K %4.0f: E[deficit] %.3e  E[deficit^2] %.3e  (alpha > K: %llu, nonzero deficit: %llu)", row.K,
         row.mean_deficit, row.mean_deficit_sq, static_cast<unsigned long long>(row.alpha_events),
         static_cast<unsigned long long>(row.deficit_events));
  }
  if (rep.insufficient_events) info("warning: fewer than %llu deficit events at some K",
                                    static_cast<unsigned long long>(kMinDeficitEvents));
  return {rep.first.slope <= -1.5 && rep.second.slope <= -0.5,
          fmt("slopes %.3f (limit -1.5), %.3f (limit -0.5)", rep.first.slope, rep.second.slope)};
}

// --- A8 --------------------------------------------------------------------------

Verdict a8() {
  Rng rng(8);
  int enum_ok = 0, sv_ok = 0, alpha_ok = 0, sv_total = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 3;
    const LatticeBasis b(oracle::random_unimodular(rng, n), 1e-9);
    Vector lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo(i) = uniform(rng, -2.0, 1.0);
      hi(i) = lo(i) + uniform(rng, 0.1, 2.5);
    }
    const Box box = Box::half_open(lo, hi);
    auto key = [](const Vector& p) {
      std::vector<long long> k;
      for (Eigen::Index i = 0; i < p.size(); ++i) k.push_back(std::llround(p(i) * 1e9));
      return k;
    };
    std::multiset<std::vector<long long>> got, want;
    for (const auto& p : enumerate_in_box(b, box)) got.insert(key(p.point));
    for (const auto& p : oracle::box_points(b.columns(), Vector::Zero(n), box)) want.insert(key(p));
    enum_ok += got == want ? 1 : 0;
    if (n <= 3) {
      ++sv_total;
      const double sv = shortest_vector(b).length, sv_ref = oracle::shortest_length(b.columns());
      sv_ok += std::abs(sv - sv_ref) <= 1e-9 * sv_ref ? 1 : 0;
      const double al = alpha(b), al_ref = oracle::alpha_exhaustive(b.columns());
      alpha_ok += std::abs(al - al_ref) <= 1e-9 * al_ref ? 1 : 0;
    }
  }
  return {enum_ok == 500 && sv_ok == sv_total && alpha_ok == sv_total,
          fmt("enumeration %d/500, shortest vector %d/%d, alpha %d/%d", enum_ok, sv_ok, sv_total, alpha_ok, sv_total)};
}

// --- A9 --------------------------------------------------------------------------

Verdict a9() {
  int passed = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::vector<double> z(2000);
    for (std::size_t i = 0; i < z.size(); ++i) {
      Rng rng = sample_rng(9 + trial * 1000003ULL, i);
      z[i] = standard_normal(rng);
    }
    passed += ks_statistic_normal(z) <= ks_critical_1pct(z.size()) ? 1 : 0;
  }
  Rng rng(9);
  std::vector<std::vector<double>> ma(3000, std::vector<double>(24));
  for (auto& s : ma) {
    double prev = standard_normal(rng);
    for (auto& v : s) {
      const double e = standard_normal(rng);
      v = e + prev;
      prev = e;
    }
  }
  const auto gk = green_kubo(ma, 4);
  const double z = (gk.estimate - 4.0) / gk.std_error;
  return {passed >= 97 && std::abs(z) <= 3,
          fmt("KS gate %d/100 (need 97); MA(1) %.3f +- %.3f vs 4 (|z| %.2f)", passed, gk.estimate, gk.std_error,
              std::abs(z))};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> all = {
      {"A1", 60, a1},  {"A2", 300, a2}, {"A3", 900, a3}, {"A4", 900, a4}, {"A5", 120, a5},
      {"A6", 600, a6}, {"A7", 600, a7}, {"A8", 120, a8}, {"A9", 60, a9},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  std::printf("acceptance run, %d worker(s)\n", kWorkers);
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.name)) continue;
    std::printf("%s running\n", c.name);
    std::fflush(stdout);
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = v.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s: %s; %.1f s (limit %.0f s%s)\n", c.name, pass ? "PASS" : "FAIL", v.detail.c_str(), secs,
                c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
