#pragma once

// Siegel transforms of box indicators and Monte Carlo checks of their moments
// over the (approximate) Haar measure.

#include <cstdint>
#include <vector>

#include "khl/dioph.hpp"
#include "khl/homogeneous.hpp"
#include "khl/lattice.hpp"
#include "khl/stats.hpp"

namespace khl {

/// f = sum of the indicators of the given boxes. The closure of every box
/// must avoid the origin. Overlaps are allowed and simply add up.
class TestFunction {
 public:
  explicit TestFunction(std::vector<Box> boxes);
  static TestFunction box(const Box& b) { return TestFunction(std::vector<Box>{b}); }

  int dim() const noexcept { return boxes_.front().dim(); }
  const std::vector<Box>& boxes() const noexcept { return boxes_; }

  double operator()(const Vector& p) const;
  double integral() const;
  double integral_of_square() const;
  /// Euclidean distance from the origin to the support, and the largest norm on it.
  double inner_radius() const;
  double outer_radius() const;

 private:
  std::vector<Box> boxes_;
};

std::uint64_t siegel_transform(const TestFunction& f, const LatticeBasis& lattice);
std::uint64_t affine_siegel_transform(const TestFunction& f, const AffineLattice& lattice);

/// Monte Carlo settings shared by the drivers below. Sample i always uses the
/// generator sample_rng(seed, i).
struct McOptions {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
  int burn_in = kDefaultBurnIn;
};

struct MomentReport {
  double estimate = 0.0;
  double reference = 0.0;
  double rel_error = 0.0;
  std::uint64_t M = 0;
  double std_error = 0.0;
  std::vector<double> per_sample;  // the transform value of each sample

  /// |estimate - reference| in units of std_error (infinity if std_error = 0
  /// and the two differ).
  double z() const;
};

inline constexpr std::uint64_t kMinMonteCarloSamples = 100;

/// Mean of S(f) over Haar samples; reference = integral of f.
MomentReport rogers_first_mc(const TestFunction& f, Dims dims, const McOptions& opts);

struct SecondMomentReference {
  double value = 0.0;       // (int f)^2 + truncated coprime sum
  double tail_bound = 0.0;  // bound on the omitted terms with max(p, q) > q_max
  int q_max = 0;
};

/// (int f)^2 + sum over coprime 1 <= p, q <= q_max of
/// int f(px) f(qx) + f(px) f(-qx) dx, each term an exact box intersection.
/// q_max = 0 picks the cutoff from the support geometry so that the tail
/// bound is below 1e-3 of the leading terms. Requires dim >= 3.
SecondMomentReference rogers_second_lattice_reference(const TestFunction& f, int q_max = 0);

/// Mean of S(f)^2 (or of the affine transform squared) over Haar samples.
/// Reference: the coprime sum above, or (int f)^2 + int f^2 in the affine case.
MomentReport rogers_second_mc(const TestFunction& f, Dims dims, const McOptions& opts, bool affine);

/// S(f)(L) when alpha(L) <= K, else 0.
std::uint64_t truncated_transform(const TestFunction& f, const LatticeBasis& lattice, double K);

struct DeficitRow {
  double K = 0.0;
  double mean_deficit = 0.0;     // E[S - S^K]
  double mean_deficit_sq = 0.0;  // E[(S - S^K)^2]
  double se_deficit = 0.0;
  double se_deficit_sq = 0.0;
  std::uint64_t alpha_events = 0;    // samples with alpha > K
  std::uint64_t deficit_events = 0;  // samples with S - S^K >= 1
};

struct DeficitReport {
  std::vector<DeficitRow> rows;
  LinearFit first;
  LinearFit second;
  bool insufficient_events = false;
  std::uint64_t M = 0;
  double max_alpha = 0.0;
  std::vector<double> alpha;      // per sample
  std::vector<double> transform;  // per sample, S(f)(L)
};

inline constexpr std::uint64_t kMinDeficitEvents = 5;

DeficitReport truncation_deficit_mc(const TestFunction& f, Dims dims, const std::vector<double>& K_list,
                                    const McOptions& opts);

struct TailReport {
  std::vector<double> s_grid;
  std::vector<double> fraction;  // share of samples with alpha >= s (so 1 at s = 1)
  std::vector<std::uint64_t> exceed;
  LinearFit fit;
  bool monotone = true;
  std::uint64_t M = 0;
  std::vector<double> alpha;  // per sample
};

TailReport alpha_tail_mc(Dims dims, const std::vector<double>& s_grid, const McOptions& opts);

}  // namespace khl
