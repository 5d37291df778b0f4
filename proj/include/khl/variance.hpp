#pragma once

// Limiting variance constants, the Green-Kubo block estimator, and the
// Monte Carlo CLT experiments for the hit counters.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "khl/dioph.hpp"
#include "khl/special.hpp"
#include "khl/stats.hpp"

namespace khl {

struct VarianceConstants {
  double sigma1_sq = 0.0;
  double sigma2_sq = 0.0;
  double zeta_num = 0.0;  // zeta(d + r - 1)
  double zeta_den = 0.0;  // zeta(d + r)
  double vol_B = 0.0;     // unit ball of R^d in the chosen norm
  int d = 0;
  int r = 0;
  double c = 0.0;
  NormKind norm = NormKind::sup;
};

/// sigma1^2 = 2 c^r d zeta(d+r-1)/zeta(d+r) Vol(B) and
/// sigma2^2 = pi^{r/2}/Gamma(r/2+1) sigma1^2. DomainError when d + r < 3.
VarianceConstants sigma1_sq(int d, int r, double c, NormKind norm, int zeta_terms = kZetaDefaultTerms);

/// Variance of U_N per unit ln N obtained by summing the second moment
/// formula over all coprime pairs, the pair (1, 1) counted once:
///   mu (2 zeta(d+r-1)/zeta(d+r) - 1) for boxes,
///   2 mu (2 zeta(d+r-1)/zeta(d+r) - 1) for balls (the target is symmetric,
///   so f(px) f(-qx) contributes as much as f(px) f(qx)),
/// where mu = Vol(B(1)) d Vol(B) is the mean rate. It is smaller than
/// sigma1^2 (resp. sigma2^2) by mu (resp. more for balls).
double rogers_variance_rate(const TargetSpec& spec, Dims dims);

struct GreenKuboResult {
  double estimate = 0.0;   // per dyadic block
  double std_error = 0.0;  // from per-sample contributions
  std::vector<double> autocov;  // c(0) .. c(lag_max)
  int lag_max = 0;
  int first_block = 0;  // blocks before this one are discarded

  /// Per unit ln N (a block spans ln 2).
  double per_log() const;
  double per_log_std_error() const;
};

inline constexpr int kDefaultLagMax = 8;

/// sigma^2 = c(0) + 2 sum_{j=1}^{lag_max} c(j), where c(j) is the cross-sample
/// covariance of (xi_t, xi_{t+j}) averaged over t >= lag_max. Requires
/// t_max >= 4 lag_max blocks and at least two samples.
GreenKuboResult green_kubo(const std::vector<std::vector<double>>& series, int lag_max = kDefaultLagMax);
GreenKuboResult green_kubo(const std::vector<HitSeries>& series, int lag_max = kDefaultLagMax);

enum class CltMode { U, V_random, V_fixed_x };
enum class Centering { exact, integral, vhat };

std::string to_string(CltMode mode);
std::string to_string(Centering centering);
CltMode parse_mode(const std::string& s);
Centering parse_centering(const std::string& s);

struct RunOptions {
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Hit series of random forms a (and random x when affine), t = 0 .. t_max-1.
std::vector<HitSeries> hit_series_ensemble(Dims dims, const TargetSpec& spec, int t_max, const RunOptions& opts,
                                           bool affine = false);

struct ExperimentSummary {
  CltMode mode = CltMode::U;
  Centering centering_used = Centering::exact;
  std::uint64_t M = 0;
  std::int64_t N = 0;
  double centering_value = 0.0;  // subtracted from each count
  double normalizer = 0.0;       // counts are divided by this after centering
  double sample_mean = 0.0;      // of the z-scores
  double sample_var = 0.0;
  double ks_stat = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double mean_count = 0.0;
  double count_var = 0.0;
  std::vector<std::uint64_t> counts;
  std::vector<double> z_scores;
  std::optional<Vector> fixed_x;
  std::vector<std::string> flags;  // warnings about low power or theorem hypotheses
};

inline constexpr std::uint64_t kMinCltSamples = 30;

/// Draws M independent forms (and offsets, per mode), counts hits with
/// 1 <= |k| < N and standardizes: mode U by sqrt(sigma^2 ln N) with the
/// sigma of the target shape, modes V by the square root of the centering.
ExperimentSummary clt_experiment(CltMode mode, Dims dims, const TargetSpec& spec, std::int64_t N,
                                 const RunOptions& opts, Centering centering = Centering::exact,
                                 std::optional<Vector> fixed_x = std::nullopt);

struct PairCovariance {
  std::vector<std::int64_t> k;
  std::vector<std::int64_t> k2;
  double p_k = 0.0;  // hit probability at k for uniform forms
  double p_k2 = 0.0;
  double cov_affine = 0.0;  // random (a, x)
  double se_affine = 0.0;
  double cov_linear = 0.0;  // random a, x = 0
  double se_linear = 0.0;
};

/// Empirical covariances of the hit indicators at k and k'. Both estimates
/// use the same forms a; the affine one also draws x.
std::vector<PairCovariance> pairwise_independence_check(
    Dims dims, const TargetSpec& spec,
    const std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>>& k_pairs,
    const RunOptions& opts);

}  // namespace khl
