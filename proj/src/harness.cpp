#include "khl/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "khl/errors.hpp"
#include "khl/homogeneous.hpp"
#include "khl/rng.hpp"
#include "khl/siegel.hpp"
#include "khl/version.hpp"

namespace khl {

using nlohmann::json;

namespace {

constexpr std::uint64_t kMaxSamples = 100'000'000;
constexpr int kMaxWorkers = 1024;
constexpr int kMaxDim = 8;
constexpr std::int64_t kMaxHorizon = std::int64_t{1} << 40;

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::count, "count"}, {Command::dani_check, "dani-check"}, {Command::rogers, "rogers"},
    {Command::truncation, "truncation"}, {Command::tail, "tail"}, {Command::clt, "clt"},
    {Command::variance, "variance"}, {Command::independence, "independence"},
};

bool needs_seed(const ExperimentConfig& c) {
  switch (c.command) {
    case Command::count: return c.a.empty();
    case Command::variance: return c.M.has_value();
    default: return true;
  }
}

std::uint64_t min_samples(Command command) {
  switch (command) {
    case Command::rogers:
    case Command::truncation:
    case Command::tail: return kMinMonteCarloSamples;
    case Command::clt:
    case Command::independence: return kMinCltSamples;
    case Command::variance: return 2;
    default: return 1;
  }
}

bool needs_samples(const ExperimentConfig& c) {
  switch (c.command) {
    case Command::count: return c.a.empty();
    case Command::variance: return false;
    default: return true;
  }
}

using KPairs = std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>>;

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::int64_t v = 0;
    const char* first = item.data();
    const char* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ValidationError("pairs: '" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

KPairs parse_pairs(const std::string& s, int d) {
  KPairs out;
  std::stringstream ss(s);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw ValidationError("pairs: expected k:k' in '" + pair + "'");
    auto k = parse_int_list(pair.substr(0, colon));
    auto k2 = parse_int_list(pair.substr(colon + 1));
    if (static_cast<int>(k.size()) != d || static_cast<int>(k2.size()) != d) {
      throw ValidationError("pairs: every k needs d entries");
    }
    out.emplace_back(std::move(k), std::move(k2));
  }
  return out;
}

// The first 20 pairs (i, j), 1 <= i < j <= 7, along the first axis.
KPairs default_pairs(int d) {
  KPairs out;
  for (int i = 1; i <= 7 && out.size() < 20; ++i) {
    for (int j = i + 1; j <= 7 && out.size() < 20; ++j) {
      std::vector<std::int64_t> k(static_cast<std::size_t>(d), 0);
      std::vector<std::int64_t> k2(static_cast<std::size_t>(d), 0);
      k[0] = i;
      k2[0] = j;
      out.emplace_back(k, k2);
    }
  }
  return out;
}

Box test_box(const ExperimentConfig& c, const Vector& lo_default, const Vector& hi_default) {
  if (c.lower.empty()) return Box::half_open(lo_default, hi_default);
  return Box::half_open(Eigen::Map<const Vector>(c.lower.data(), static_cast<Eigen::Index>(c.lower.size())),
                        Eigen::Map<const Vector>(c.upper.data(), static_cast<Eigen::Index>(c.upper.size())));
}

// [1, 1.5] x [0.2, 0.7]^{n-1}: volume 0.5^n, away from the origin.
Box default_rogers_box(const ExperimentConfig& c, int n) {
  Vector lo = Vector::Constant(n, 0.2);
  Vector hi = Vector::Constant(n, 0.7);
  lo(0) = 1.0;
  hi(0) = 1.5;
  if (c.moment == "affine") {
    lo.setZero();
    hi.setOnes();
    lo(0) = 1.0;
    hi(0) = 1.3;
  }
  return test_box(c, lo, hi);
}

Box default_truncation_box(const ExperimentConfig& c, int n) {
  Vector lo = Vector::Zero(n);
  Vector hi = Vector::Ones(n);
  lo(0) = 1.0;
  hi(0) = 2.0;
  return test_box(c, lo, hi);
}

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

TargetSpec spec_of(const ExperimentConfig& c) {
  return {c.iota == 2 ? TargetShape::ball : TargetShape::box, c.c, c.norm};
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << "\r\n";
    ++rows_;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  std::size_t rows_ = 0;
};

std::string num(double v) { return format_number(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

json fit_json(const LinearFit& f) {
  return {{"slope", std::isfinite(f.slope) ? json(f.slope) : json(nullptr)}, {"points", f.points}};
}

json report_json(const MomentReport& r) {
  return {{"estimate", r.estimate}, {"reference", r.reference}, {"rel_error", r.rel_error},
          {"M", r.M},               {"std_error", r.std_error}, {"z", r.z()}};
}

Matrix random_forms(Rng& rng, int r, int d) {
  Matrix a(r, d);
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < d; ++k) a(i, k) = uniform01(rng);
  }
  return a;
}

struct Output {
  std::string csv;
  json result;
};

Output run_count(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  const TargetSpec spec = spec_of(c);
  const std::int64_t N = *c.N;
  const Offset x = c.x.empty() ? Offset::zero(c.r) : Offset(Eigen::Map<const Vector>(c.x.data(), c.r));
  const HitScanner scanner(dims, spec, N);
  Csv csv({"sample_index", "count"});
  std::vector<std::uint64_t> counts;
  if (!c.a.empty()) {
    Matrix a(c.r, c.d);
    for (int i = 0; i < c.r; ++i) {
      for (int k = 0; k < c.d; ++k) a(i, k) = c.a[static_cast<std::size_t>(i * c.d + k)];
    }
    counts.push_back(scanner.count(FormsMatrix(a), x));
  } else {
    counts.assign(static_cast<std::size_t>(*c.M), 0);
    parallel_for(counts.size(), c.workers, [&](std::size_t i) {
      Rng rng = sample_rng(*c.seed, i);
      counts[i] = scanner.count(FormsMatrix(random_forms(rng, c.r, c.d)), x);
    });
  }
  for (std::size_t i = 0; i < counts.size(); ++i) csv.row({num(std::uint64_t{i}), num(counts[i])});
  const ExpectedCount e = expected_count(spec, dims, N);
  std::vector<double> real(counts.begin(), counts.end());
  return {csv.str(),
          {{"rows", counts.size()},
           {"mean_count", mean(real)},
           {"expected_integral", e.integral_mean},
           {"expected_vhat", e.vhat},
           {"expected_exact", exact_expected_count(spec, dims, N)}}};
}

Output run_dani(const ExperimentConfig& c) {
  const TargetSpec spec = spec_of(c);
  std::vector<DaniCheck> rows(static_cast<std::size_t>(*c.M));
  parallel_for(rows.size(), c.workers, [&](std::size_t i) {
    Rng rng = sample_rng(*c.seed, i);
    rows[i] = dani_check(FormsMatrix(random_forms(rng, c.r, c.d)), spec, *c.j);
  });
  Csv csv({"sample_index", "lhs", "rhs", "equal"});
  std::uint64_t equal = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv.row({num(std::uint64_t{i}), num(rows[i].lhs), num(rows[i].rhs), rows[i].equal ? "true" : "false"});
    equal += rows[i].equal ? 1 : 0;
  }
  return {csv.str(), {{"rows", rows.size()}, {"equal", equal}, {"all_equal", equal == rows.size()}}};
}

McOptions mc_options(const ExperimentConfig& c) { return {*c.M, *c.seed, c.workers, c.burn_in}; }

Output run_rogers(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  const TestFunction f = TestFunction::box(default_rogers_box(c, dims.n()));
  MomentReport rep;
  json extra = json::object();
  if (c.moment == "first") {
    rep = rogers_first_mc(f, dims, mc_options(c));
  } else if (c.moment == "second") {
    rep = rogers_second_mc(f, dims, mc_options(c), false);
    const SecondMomentReference ref = rogers_second_lattice_reference(f, c.q_max);
    extra = {{"q_max", ref.q_max}, {"tail_bound", ref.tail_bound}, {"reference_at_q_max", ref.value}};
  } else {
    rep = rogers_second_mc(f, dims, mc_options(c), true);
  }
  Csv csv({"sample_index", "value"});
  for (std::size_t i = 0; i < rep.per_sample.size(); ++i) csv.row({num(std::uint64_t{i}), num(rep.per_sample[i])});
  json result = report_json(rep);
  result["moment"] = c.moment;
  result["integral"] = f.integral();
  if (!extra.empty()) result["lattice_reference"] = extra;
  return {csv.str(), result};
}

Output run_truncation(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  const TestFunction f = TestFunction::box(default_truncation_box(c, dims.n()));
  const DeficitReport rep = truncation_deficit_mc(f, dims, or_default(c.K_list, {2, 4, 8, 16}), mc_options(c));
  Csv csv({"sample_index", "alpha", "transform"});
  for (std::size_t i = 0; i < rep.alpha.size(); ++i) {
    csv.row({num(std::uint64_t{i}), num(rep.alpha[i]), num(rep.transform[i])});
  }
  json rows = json::array();
  for (const DeficitRow& r : rep.rows) {
    rows.push_back({{"K", r.K},
                    {"mean_deficit", r.mean_deficit},
                    {"se_deficit", r.se_deficit},
                    {"mean_deficit_sq", r.mean_deficit_sq},
                    {"se_deficit_sq", r.se_deficit_sq},
                    {"alpha_events", r.alpha_events},
                    {"deficit_events", r.deficit_events}});
  }
  const double n = dims.n();
  return {csv.str(),
          {{"rows", rows},
           {"first_moment_fit", fit_json(rep.first)},
           {"second_moment_fit", fit_json(rep.second)},
           {"first_moment_slope_bound", -(n - 1.0) + 0.5},
           {"second_moment_slope_bound", -(n - 2.0) + 0.5},
           {"insufficient_events", rep.insufficient_events},
           {"max_alpha", rep.max_alpha},
           {"M", rep.M}}};
}

Output run_tail(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  const TailReport rep = alpha_tail_mc(dims, or_default(c.s_grid, {2, 3, 4, 6, 8}), mc_options(c));
  Csv csv({"sample_index", "alpha"});
  for (std::size_t i = 0; i < rep.alpha.size(); ++i) csv.row({num(std::uint64_t{i}), num(rep.alpha[i])});
  return {csv.str(),
          {{"s_grid", rep.s_grid},
           {"fraction", rep.fraction},
           {"exceed", rep.exceed},
           {"fit", fit_json(rep.fit)},
           {"slope_bound", -static_cast<double>(dims.n()) + 0.5},
           {"monotone", rep.monotone},
           {"M", rep.M}}};
}

Output run_clt(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  std::optional<Vector> fixed;
  if (!c.x.empty()) fixed = Eigen::Map<const Vector>(c.x.data(), c.r);
  const ExperimentSummary s =
      clt_experiment(c.mode, dims, spec_of(c), *c.N, {*c.M, *c.seed, c.workers}, c.centering, fixed);
  Csv csv({"sample_index", "count", "z_score"});
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    csv.row({num(std::uint64_t{i}), num(s.counts[i]), num(s.z_scores[i])});
  }
  json result = {{"mode", to_string(s.mode)},
                 {"centering_used", to_string(s.centering_used)},
                 {"M", s.M},
                 {"N", s.N},
                 {"centering_value", s.centering_value},
                 {"normalizer", s.normalizer},
                 {"sample_mean", s.sample_mean},
                 {"sample_var", s.sample_var},
                 {"ks_stat", s.ks_stat},
                 {"ks_critical_1pct", ks_critical_1pct(s.M)},
                 {"skewness", s.skewness},
                 {"excess_kurtosis", s.excess_kurtosis},
                 {"mean_count", s.mean_count},
                 {"count_var", s.count_var},
                 {"flags", s.flags}};
  if (s.fixed_x) result["fixed_x"] = std::vector<double>(s.fixed_x->data(), s.fixed_x->data() + s.fixed_x->size());
  return {csv.str(), result};
}

Output run_variance(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  const VarianceConstants v = sigma1_sq(c.d, c.r, c.c, c.norm);
  const double rate = rogers_variance_rate(spec_of(c), dims);
  json result = {{"sigma1_sq", v.sigma1_sq},
                 {"sigma2_sq", v.sigma2_sq},
                 {"zeta_num", v.zeta_num},
                 {"zeta_den", v.zeta_den},
                 {"vol_B", v.vol_B},
                 {"rogers_variance_rate", rate}};
  if (!c.M) {
    Csv csv({"d", "r", "c", "norm", "sigma1_sq", "sigma2_sq", "rogers_variance_rate"});
    csv.row({std::to_string(c.d), std::to_string(c.r), num(c.c), to_string(c.norm), num(v.sigma1_sq),
             num(v.sigma2_sq), num(rate)});
    return {csv.str(), result};
  }
  const auto series = hit_series_ensemble(dims, spec_of(c), c.t_max, {*c.M, *c.seed, c.workers});
  const GreenKuboResult gk = green_kubo(series, c.lag_max);
  std::vector<std::string> header = {"sample_index"};
  for (int t = 0; t < c.t_max; ++t) header.push_back("xi_" + std::to_string(t));
  Csv csv(header);
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::vector<std::string> row = {num(std::uint64_t{i})};
    for (auto xi : series[i]) row.push_back(num(xi));
    csv.row(row);
  }
  result["green_kubo"] = {{"per_block", gk.estimate},     {"per_block_std_error", gk.std_error},
                          {"per_log", gk.per_log()},      {"per_log_std_error", gk.per_log_std_error()},
                          {"autocov", gk.autocov},        {"lag_max", gk.lag_max},
                          {"first_block", gk.first_block}, {"t_max", c.t_max}};
  return {csv.str(), result};
}

Output run_independence(const ExperimentConfig& c) {
  const Dims dims{c.d, c.r};
  const KPairs pairs = c.pairs.empty() ? default_pairs(c.d) : parse_pairs(c.pairs, c.d);
  const auto rows = pairwise_independence_check(dims, spec_of(c), pairs, {*c.M, *c.seed, c.workers});
  Csv csv({"k", "k2", "p_k", "p_k2", "cov_affine", "se_affine", "cov_linear", "se_linear"});
  std::uint64_t within = 0;
  for (const PairCovariance& p : rows) {
    csv.row({join_ints(p.k), join_ints(p.k2), num(p.p_k), num(p.p_k2), num(p.cov_affine), num(p.se_affine),
             num(p.cov_linear), num(p.se_linear)});
    within += std::abs(p.cov_affine) <= 3.0 * p.se_affine ? 1 : 0;
  }
  return {csv.str(), {{"pairs", rows.size()}, {"affine_within_3se", within}, {"M", *c.M}}};
}

}  // namespace

std::string to_string(Command command) {
  for (const auto& c : kCommands) {
    if (c.command == command) return c.name;
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (const auto& c : kCommands) {
    if (s == c.name) return c.command;
  }
  throw ValidationError("unknown command '" + s + "'");
}

std::vector<Violation> validate(const ExperimentConfig& c) {
  std::vector<Violation> v;
  auto bad = [&](const std::string& field, const std::string& msg) { v.push_back({field, msg, false}); };
  auto warn = [&](const std::string& field, const std::string& msg) { v.push_back({field, msg, true}); };
  const int n = c.d + c.r;

  if (c.d < 1 || c.d > kMaxDim) bad("d", "must lie in [1, 8]");
  if (c.r < 1 || c.r > kMaxDim) bad("r", "must lie in [1, 8]");
  if (c.iota != 1 && c.iota != 2) bad("iota", "must be 1 (box) or 2 (ball)");
  if (!(c.c > 0.0) || !std::isfinite(c.c)) bad("c", "must be a positive real");
  if (c.workers < 1 || c.workers > kMaxWorkers) bad("workers", "must lie in [1, 1024]");
  if (c.burn_in < 0 || c.burn_in > kMaxFlowTime) bad("burn_in", "must lie in [0, 40]");
  if (c.output_path.empty()) bad("out", "an output path prefix is required");

  if (needs_seed(c) && !c.seed) bad("seed", "required for stochastic commands");
  if (needs_samples(c) && !c.M) bad("M", "required for this command");
  if (c.M) {
    if (*c.M < min_samples(c.command)) bad("M", "must be at least " + std::to_string(min_samples(c.command)));
    if (*c.M > kMaxSamples) bad("M", "must not exceed 1e8");
  }

  const bool needs_n = c.command == Command::count || c.command == Command::clt;
  if (needs_n && !c.N) bad("N", "required for this command");
  if (c.N && (*c.N < 2 || *c.N > kMaxHorizon)) bad("N", "must lie in [2, 2^40]");
  if (c.command == Command::dani_check) {
    if (!c.j) bad("j", "required for dani-check");
    else if (*c.j < 0 || *c.j > kMaxFlowTime) bad("j", "must lie in [0, 40]");
    if ((c.iota == 1 && c.c > 1.0) || (c.iota == 2 && c.c > 0.5)) {
      warn("c", "targets wider than the unit cell: the orbit sum may undercount");
    }
  }

  if (!c.a.empty() && static_cast<int>(c.a.size()) != c.r * c.d) bad("a", "needs r * d entries");
  if (!c.x.empty() && static_cast<int>(c.x.size()) != c.r) bad("x", "needs r entries");
  if (c.command == Command::clt && !c.x.empty() && c.mode != CltMode::V_fixed_x) {
    bad("x", "an explicit offset only applies to mode V-fixed-x");
  }
  if (c.command == Command::clt && c.mode == CltMode::U && c.d == 1 && c.r == 1) {
    warn("mode", "(r,d) = (1,1) is excluded from the CLT for U_N; results are exploratory");
  }

  if (c.lower.size() != c.upper.size()) bad("lower/upper", "must have the same length");
  if (!c.lower.empty()) {
    if (static_cast<int>(c.lower.size()) != n) bad("lower/upper", "need d + r entries");
    for (std::size_t i = 0; i < std::min(c.lower.size(), c.upper.size()); ++i) {
      if (!(c.lower[i] <= c.upper[i])) bad("lower/upper", "lower must not exceed upper");
    }
    bool separated = false;
    for (std::size_t i = 0; i < std::min(c.lower.size(), c.upper.size()); ++i) {
      separated = separated || c.lower[i] > 0.0 || c.upper[i] < 0.0;
    }
    if (!separated) bad("lower/upper", "the box closure must avoid the origin");
  }

  if (c.command == Command::rogers) {
    if (c.moment != "first" && c.moment != "second" && c.moment != "affine") {
      bad("moment", "must be first, second or affine");
    }
    if (c.moment == "second" && n < 3) bad("moment", "the lattice second moment needs d + r > 2");
    if (c.q_max < 0) bad("q_max", "must be nonnegative");
  }
  if ((c.command == Command::truncation || c.command == Command::tail) && n > kAlphaMaxDim) {
    bad("d/r", "alpha is only available for d + r <= 4");
  }
  for (std::size_t i = 0; i < c.K_list.size(); ++i) {
    if (!(c.K_list[i] >= 1.0) || (i && !(c.K_list[i] > c.K_list[i - 1]))) bad("K", "must be increasing and >= 1");
  }
  for (double s : c.s_grid) {
    if (!(s > 0.0)) bad("s_grid", "entries must be positive");
  }
  if (c.command == Command::variance) {
    if (n < 3) bad("d/r", "variance constants need d + r >= 3");
    if (c.t_max < 1 || c.t_max > kMaxFlowTime) bad("t_max", "must lie in [1, 40]");
    if (c.lag_max < 0) bad("lag_max", "must be nonnegative");
    if (c.t_max < 4 * std::max(c.lag_max, 1)) bad("t_max", "must be at least 4 * lag_max");
  }
  if (c.command == Command::independence && !c.pairs.empty()) {
    try {
      for (const auto& [k, k2] : parse_pairs(c.pairs, c.d)) {
        if (std::all_of(k.begin(), k.end(), [](auto e) { return e == 0; }) ||
            std::all_of(k2.begin(), k2.end(), [](auto e) { return e == 0; })) {
          bad("pairs", "k = 0 is excluded");
        }
      }
    } catch (const ValidationError& e) {
      bad("pairs", e.what());
    }
  }
  return v;
}

json to_json(const ExperimentConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"d", c.d},
            {"r", c.r},
            {"iota", c.iota},
            {"c", c.c},
            {"norm", to_string(c.norm)},
            {"workers", c.workers},
            {"out", c.output_path},
            {"centering", to_string(c.centering)},
            {"burn_in", c.burn_in},
            {"mode", to_string(c.mode)},
            {"moment", c.moment},
            {"a", c.a},
            {"x", c.x},
            {"lower", c.lower},
            {"upper", c.upper},
            {"K", c.K_list},
            {"s_grid", c.s_grid},
            {"pairs", c.pairs},
            {"t_max", c.t_max},
            {"lag_max", c.lag_max},
            {"q_max", c.q_max}};
  j["N"] = c.N ? json(*c.N) : json(nullptr);
  j["j"] = c.j ? json(*c.j) : json(nullptr);
  j["M"] = c.M ? json(*c.M) : json(nullptr);
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  ExperimentConfig c;
  static const std::set<std::string> known = {
      "command", "d",     "r",     "iota",  "c",      "norm",  "N", "j",       "M",      "seed", "workers",
      "out",     "centering", "burn_in", "mode", "moment", "a", "x", "lower", "upper", "K",    "s_grid",
      "pairs",   "t_max", "lag_max", "q_max"};
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ValidationError("config: unknown key '" + key + "'");
      if (value.is_null()) continue;
      if (key == "command") c.command = parse_command(value.get<std::string>());
      else if (key == "d") c.d = value.get<int>();
      else if (key == "r") c.r = value.get<int>();
      else if (key == "iota") c.iota = value.get<int>();
      else if (key == "c") c.c = value.get<double>();
      else if (key == "norm") c.norm = parse_norm(value.get<std::string>());
      else if (key == "N") c.N = value.get<std::int64_t>();
      else if (key == "j") c.j = value.get<int>();
      else if (key == "M") c.M = value.get<std::uint64_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "out") c.output_path = value.get<std::string>();
      else if (key == "centering") c.centering = parse_centering(value.get<std::string>());
      else if (key == "burn_in") c.burn_in = value.get<int>();
      else if (key == "mode") c.mode = parse_mode(value.get<std::string>());
      else if (key == "moment") c.moment = value.get<std::string>();
      else if (key == "a") c.a = value.get<std::vector<double>>();
      else if (key == "x") c.x = value.get<std::vector<double>>();
      else if (key == "lower") c.lower = value.get<std::vector<double>>();
      else if (key == "upper") c.upper = value.get<std::vector<double>>();
      else if (key == "K") c.K_list = value.get<std::vector<double>>();
      else if (key == "s_grid") c.s_grid = value.get<std::vector<double>>();
      else if (key == "pairs") c.pairs = value.get<std::string>();
      else if (key == "t_max") c.t_max = value.get<int>();
      else if (key == "lag_max") c.lag_max = value.get<int>();
      else if (key == "q_max") c.q_max = value.get<int>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int run(const ExperimentConfig& config, std::ostream& log) {
  const auto violations = validate(config);
  bool fatal = false;
  for (const Violation& v : violations) {
    log << (v.warning ? "warning: " : "error: ") << v.field << ": " << v.message << '\n';
    fatal = fatal || !v.warning;
  }
  if (fatal) return kExitValidation;

  const std::string csv_path = config.output_path + ".csv";
  const std::string json_path = config.output_path + ".json";
  std::ofstream csv_file(csv_path, std::ios::binary);
  std::ofstream json_file(json_path, std::ios::binary);
  if (!csv_file || !json_file) {
    log << "error: out: cannot write to '" << config.output_path << ".{csv,json}'\n";
    return kExitValidation;
  }

  Output out;
  try {
    switch (config.command) {
      case Command::count: out = run_count(config); break;
      case Command::dani_check: out = run_dani(config); break;
      case Command::rogers: out = run_rogers(config); break;
      case Command::truncation: out = run_truncation(config); break;
      case Command::tail: out = run_tail(config); break;
      case Command::clt: out = run_clt(config); break;
      case Command::variance: out = run_variance(config); break;
      case Command::independence: out = run_independence(config); break;
    }
  } catch (const ResourceError& e) {
    log << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  json summary = {{"schema_version", kSchemaVersion},
                  {"library_version", kVersion},
                  {"command", to_string(config.command)},
                  {"config", to_json(config)},
                  {"result", out.result}};
  json warnings = json::array();
  for (const Violation& v : violations) warnings.push_back(v.field + ": " + v.message);
  summary["warnings"] = warnings;

  csv_file << out.csv;
  json_file << summary.dump(2) << '\n';
  if (!csv_file || !json_file) {
    log << "error: out: write failed\n";
    return kExitValidation;
  }
  log << "wrote " << csv_path << " and " << json_path << '\n';
  return kExitOk;
}

}  // namespace khl
