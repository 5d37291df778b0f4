#include "khl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "khl/errors.hpp"

namespace khl {

namespace {

void require(std::span<const double> xs, std::size_t min, const char* what) {
  if (xs.size() < min) throw PreconditionError(std::string(what) + ": not enough samples");
}

double central_moment(std::span<const double> xs, double mu, int power) {
  KahanSum s;
  for (double x : xs) s.add(std::pow(x - mu, power));
  return s.value() / static_cast<double>(xs.size());
}

}  // namespace

double mean(std::span<const double> xs) {
  require(xs, 1, "mean");
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  require(xs, 2, "sample_variance");
  const double mu = mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - mu) * (x - mu));
  return s.value() / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double skewness(std::span<const double> xs) {
  require(xs, 3, "skewness");
  const double mu = mean(xs);
  const double m2 = central_moment(xs, mu, 2);
  if (m2 == 0.0) return 0.0;
  return central_moment(xs, mu, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> xs) {
  require(xs, 4, "excess_kurtosis");
  const double mu = mean(xs);
  const double m2 = central_moment(xs, mu, 2);
  if (m2 == 0.0) return 0.0;
  return central_moment(xs, mu, 4) / (m2 * m2) - 3.0;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ks_statistic_normal(std::span<const double> xs) {
  require(xs, 1, "ks_statistic_normal");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

double ks_critical_1pct(std::size_t m) { return 1.63 / std::sqrt(static_cast<double>(m)); }

LinearFit loglog_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw PreconditionError("loglog_fit: size mismatch");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  LinearFit fit;
  fit.points = lx.size();
  if (lx.size() < 2) {
    fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double mx = mean(lx);
  const double my = mean(ly);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace khl
