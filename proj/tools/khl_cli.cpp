// Command line front end. Usage: khl <command> [flags], see --help.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "khl/errors.hpp"
#include "khl/harness.hpp"
#include "khl/version.hpp"

namespace {

const char* kCommandHelp =
    "count | dani-check | rogers | truncation | tail | clt | variance | independence";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hit statistics of random linear forms against shrinking targets"};
  app.set_version_flag("--version", std::string(khl::kVersion));

  std::string command;
  std::string config_path;
  bool validate_only = false;
  khl::ExperimentConfig flags;
  std::string norm = "sup";
  std::string centering = "exact";
  std::string mode = "U";
  std::int64_t N = 0;
  int j = 0;
  std::uint64_t M = 0;
  std::uint64_t seed = 0;

  app.add_option("command", command, kCommandHelp)->required();
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_flag("--validate-only", validate_only, "Print violations and exit");
  auto* o_d = app.add_option("--d", flags.d, "Number of variables");
  auto* o_r = app.add_option("--r", flags.r, "Number of linear forms");
  auto* o_iota = app.add_option("--iota", flags.iota, "Target shape: 1 box, 2 ball");
  auto* o_c = app.add_option("--c", flags.c, "Target scale c > 0");
  auto* o_norm = app.add_option("--norm", norm, "Norm on Z^d: sup or euclidean");
  auto* o_N = app.add_option("--N", N, "Horizon: count k with 1 <= |k| < N");
  auto* o_j = app.add_option("--j", j, "dani-check: N = 2^j");
  auto* o_M = app.add_option("--M", M, "Number of samples");
  auto* o_seed = app.add_option("--seed", seed, "Master seed (required for stochastic commands)");
  auto* o_workers = app.add_option("--workers", flags.workers, "Worker threads");
  auto* o_out = app.add_option("--out", flags.output_path, "Output prefix for <out>.csv and <out>.json");
  auto* o_centering = app.add_option("--centering", centering, "clt: exact, integral or vhat");
  auto* o_burn = app.add_option("--burn-in", flags.burn_in, "Flow steps of the lattice sampler");
  auto* o_mode = app.add_option("--mode", mode, "clt: U, V or V-fixed-x");
  auto* o_moment = app.add_option("--moment", flags.moment, "rogers: first, second or affine");
  auto* o_a = app.add_option("--a", flags.a, "count: forms matrix, r x d row-major");
  auto* o_x = app.add_option("--x", flags.x, "count / clt V-fixed-x: offset (r entries)");
  auto* o_lower = app.add_option("--lower", flags.lower, "rogers / truncation: box lower corner");
  auto* o_upper = app.add_option("--upper", flags.upper, "rogers / truncation: box upper corner");
  auto* o_K = app.add_option("--K", flags.K_list, "truncation: increasing K levels");
  auto* o_s = app.add_option("--s-grid", flags.s_grid, "tail: thresholds s");
  auto* o_pairs = app.add_option("--pairs", flags.pairs, "independence: \"k:k';k:k'\", k comma separated");
  auto* o_tmax = app.add_option("--t-max", flags.t_max, "variance: dyadic blocks per sample");
  auto* o_lag = app.add_option("--lag-max", flags.lag_max, "variance: Green-Kubo lags");
  auto* o_qmax = app.add_option("--q-max", flags.q_max, "rogers second: coprime sum cutoff (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : khl::kExitValidation;
  }

  khl::ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw khl::ValidationError("cannot read config file '" + config_path + "'");
      nlohmann::json j_cfg;
      try {
        in >> j_cfg;
      } catch (const nlohmann::json::exception& e) {
        throw khl::ValidationError(std::string("config file: ") + e.what());
      }
      config = khl::config_from_json(j_cfg);
    }
    config.command = khl::parse_command(command);
    if (*o_d) config.d = flags.d;
    if (*o_r) config.r = flags.r;
    if (*o_iota) config.iota = flags.iota;
    if (*o_c) config.c = flags.c;
    if (*o_norm) config.norm = khl::parse_norm(norm);
    if (*o_N) config.N = N;
    if (*o_j) config.j = j;
    if (*o_M) config.M = M;
    if (*o_seed) config.seed = seed;
    if (*o_workers) config.workers = flags.workers;
    if (*o_out) config.output_path = flags.output_path;
    if (*o_centering) config.centering = khl::parse_centering(centering);
    if (*o_burn) config.burn_in = flags.burn_in;
    if (*o_mode) config.mode = khl::parse_mode(mode);
    if (*o_moment) config.moment = flags.moment;
    if (*o_a) config.a = flags.a;
    if (*o_x) config.x = flags.x;
    if (*o_lower) config.lower = flags.lower;
    if (*o_upper) config.upper = flags.upper;
    if (*o_K) config.K_list = flags.K_list;
    if (*o_s) config.s_grid = flags.s_grid;
    if (*o_pairs) config.pairs = flags.pairs;
    if (*o_tmax) config.t_max = flags.t_max;
    if (*o_lag) config.lag_max = flags.lag_max;
    if (*o_qmax) config.q_max = flags.q_max;
    if (config.output_path.empty()) config.output_path = "khl_" + command;
  } catch (const khl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return khl::kExitValidation;
  }

  if (validate_only) {
    bool fatal = false;
    for (const auto& v : khl::validate(config)) {
      std::cout << (v.warning ? "warning: " : "error: ") << v.field << ": " << v.message << '\n';
      fatal = fatal || !v.warning;
    }
    return fatal ? khl::kExitValidation : khl::kExitOk;
  }
  return khl::run(config, std::cerr);
}
