#pragma once

// Experiment configuration, validation and execution behind the command line
// tool. A run writes <out>.csv (per-sample rows) and <out>.json (summary plus
// the echoed configuration).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "khl/dioph.hpp"
#include "khl/homogeneous.hpp"
#include "khl/variance.hpp"

namespace khl {

enum class Command { count, dani_check, rogers, truncation, tail, clt, variance, independence };

std::string to_string(Command command);
Command parse_command(const std::string& s);

struct ExperimentConfig {
  Command command = Command::count;
  int d = 1;
  int r = 2;
  int iota = 1;
  double c = 1.0;
  NormKind norm = NormKind::sup;
  std::optional<std::int64_t> N;
  std::optional<int> j;
  std::optional<std::uint64_t> M;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string output_path;
  Centering centering = Centering::exact;
  int burn_in = kDefaultBurnIn;

  CltMode mode = CltMode::U;          // clt
  std::string moment = "first";       // rogers: first | second | affine
  std::vector<double> a;              // count: explicit r x d forms, row-major
  std::vector<double> x;              // count, clt V-fixed-x: explicit offset
  std::vector<double> lower, upper;   // rogers, truncation: test box
  std::vector<double> K_list;         // truncation
  std::vector<double> s_grid;         // tail
  std::string pairs;                  // independence: "k:k';k:k'" with k as comma list
  int t_max = 12;                     // variance (Green-Kubo)
  int lag_max = 3;                    // variance (Green-Kubo)
  int q_max = 0;                      // rogers second: 0 = automatic
};

struct Violation {
  std::string field;
  std::string message;
  bool warning = false;  // warnings do not block a run
};

/// Empty (or warnings only) iff run() would accept the configuration.
std::vector<Violation> validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Reads the keys produced by to_json; unknown keys are a ValidationError.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Quotes per RFC 4180 when needed.
std::string csv_field(const std::string& s);
/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_number(double v);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitResource = 3;

/// Validates, runs and writes the outputs. Messages go to `log`. Returns the
/// process exit status.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace khl
