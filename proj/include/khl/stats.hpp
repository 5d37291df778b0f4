#pragma once

// Small statistics toolkit used by the Monte Carlo drivers.

#include <cstddef>
#include <span>
#include <vector>

namespace khl {

class KahanSum {
 public:
  void add(double v) {
    const double y = v - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const noexcept { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mean(std::span<const double> xs);
/// Unbiased sample variance (divides by M - 1).
double sample_variance(std::span<const double> xs);
/// sqrt(sample_variance / M).
double standard_error(std::span<const double> xs);
double skewness(std::span<const double> xs);
double excess_kurtosis(std::span<const double> xs);

double normal_cdf(double z);

/// sup_z |F_M(z) - Phi(z)| for the empirical distribution of xs.
double ks_statistic_normal(std::span<const double> xs);

/// Asymptotic 1% two-sided critical value 1.63 / sqrt(M).
double ks_critical_1pct(std::size_t m);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least squares fit of log y against log x over the pairs with x, y > 0.
/// Fewer than two usable pairs give points < 2 and a NaN slope.
LinearFit loglog_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace khl
