#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "khl/errors.hpp"
#include "khl/harness.hpp"
#include "khl/variance.hpp"

using namespace khl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find("\r\n", start);
    if (end == std::string::npos) break;
    out.push_back(text.substr(start, end - start));
    start = end + 2;
  }
  return out;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "khl_harness_test";
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig base(Command command, const std::string& name) {
  ExperimentConfig c;
  c.command = command;
  c.output_path = (scratch_dir() / name).string();
  return c;
}

std::size_t errors(const std::vector<Violation>& v) {
  std::size_t n = 0;
  for (const auto& e : v) n += e.warning ? 0 : 1;
  return n;
}

}  // namespace

TEST_CASE("command names round trip") {
  for (auto c : {Command::count, Command::dani_check, Command::rogers, Command::truncation, Command::tail,
                 Command::clt, Command::variance, Command::independence}) {
    CHECK(parse_command(to_string(c)) == c);
  }
  CHECK(to_string(Command::dani_check) == "dani-check");
  CHECK_THROWS_AS(parse_command("frobnicate"), ValidationError);
}

TEST_CASE("validation examples") {
  auto c = base(Command::clt, "v");
  c.N = 1024;
  c.M = 100;
  const auto missing_seed = validate(c);
  REQUIRE(missing_seed.size() == 1);
  CHECK(missing_seed[0].field == "seed");
  CHECK_FALSE(missing_seed[0].warning);

  c.seed = 1;
  CHECK(validate(c).empty());
  c.c = 0.0;
  const auto bad_c = validate(c);
  REQUIRE(bad_c.size() == 1);
  CHECK(bad_c[0].field == "c");

  c.c = 1.0;
  c.d = 1;
  c.r = 1;
  c.mode = CltMode::U;
  const auto hyp = validate(c);
  REQUIRE(hyp.size() == 1);
  CHECK(hyp[0].warning);
  CHECK(hyp[0].message.find("(1,1)") != std::string::npos);
}

TEST_CASE("validation of other fields") {
  auto c = base(Command::rogers, "r");
  c.M = 1000;
  c.seed = 3;
  c.lower = {-1, -1, -1};
  c.upper = {1, 1, 1};
  CHECK(errors(validate(c)) == 1);
  c.lower = {1, 0};
  c.upper = {2, 1};
  CHECK(errors(validate(c)) == 1);  // needs d + r entries
  c.lower.clear();
  c.upper.clear();
  c.M = 10;
  CHECK(errors(validate(c)) == 1);

  auto v = base(Command::variance, "var");
  v.t_max = 8;
  v.lag_max = 3;
  CHECK(errors(validate(v)) == 1);
  v.d = 1;
  v.r = 1;
  v.t_max = 12;
  CHECK(errors(validate(v)) == 1);

  auto dc = base(Command::dani_check, "dc");
  dc.M = 10;
  dc.seed = 1;
  CHECK(errors(validate(dc)) == 1);  // j missing
  dc.j = 8;
  dc.c = 1.5;
  const auto wide = validate(dc);
  CHECK(errors(wide) == 0);
  CHECK(wide.size() == 1);

  auto ind = base(Command::independence, "ind");
  ind.M = 1000;
  ind.seed = 1;
  ind.pairs = "0:3";
  CHECK(errors(validate(ind)) == 1);
  ind.pairs = "x:3";
  CHECK(errors(validate(ind)) == 1);
}

TEST_CASE("csv quoting and number formatting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-7) == "-1.5e-07");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("config JSON round trip and unknown keys") {
  auto c = base(Command::clt, "j");
  c.N = 4096;
  c.M = 50;
  c.seed = 99;
  c.mode = CltMode::V_fixed_x;
  c.x = {0.1, 0.2};
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.seed == c.seed);
  CHECK(back.mode == CltMode::V_fixed_x);
  auto j = to_json(c);
  j["colour"] = "blue";
  CHECK_THROWS_AS(config_from_json(j), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"d", "two"}}), ValidationError);
}

TEST_CASE("clt run writes a CSV row per sample and a summary") {
  auto c = base(Command::clt, "clt");
  c.mode = CltMode::V_random;
  c.N = 1024;
  c.M = 40;
  c.seed = 7;
  std::ostringstream log;
  REQUIRE(run(c, log) == kExitOk);
  const auto rows = lines(slurp(c.output_path + ".csv"));
  REQUIRE(rows.size() == 41);
  CHECK(rows[0] == "sample_index,count,z_score");
  CHECK(rows[1].rfind("0,", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(c.output_path + ".json"));
  CHECK(summary["schema_version"] == 1);
  CHECK(summary["command"] == "clt");
  CHECK(summary["config"]["seed"] == 7);
  CHECK(summary["result"].contains("ks_stat"));
}

TEST_CASE("dani-check rows all agree") {
  auto c = base(Command::dani_check, "dani");
  c.j = 10;
  c.M = 20;
  c.seed = 1;
  std::ostringstream log;
  REQUIRE(run(c, log) == kExitOk);
  const auto rows = lines(slurp(c.output_path + ".csv"));
  REQUIRE(rows.size() == 21);
  CHECK(rows[0] == "sample_index,lhs,rhs,equal");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "true");
}

TEST_CASE("variance run reports the constants") {
  auto c = base(Command::variance, "variance");
  std::ostringstream log;
  REQUIRE(run(c, log) == kExitOk);
  const auto summary = nlohmann::json::parse(slurp(c.output_path + ".json"));
  const double s1 = summary["result"]["sigma1_sq"];
  const double s2 = summary["result"]["sigma2_sq"];
  CHECK(s1 == doctest::Approx(5.4738).epsilon(1e-4));
  CHECK(s2 == doctest::Approx(3.141592653589793 * s1));
}

TEST_CASE("outputs do not depend on the worker count") {
  for (Command cmd : {Command::clt, Command::rogers, Command::independence}) {
    auto c = base(cmd, "det1");
    c.N = 512;
    c.M = 200;
    c.seed = 11;
    c.mode = CltMode::V_random;
    std::ostringstream log;
    REQUIRE(run(c, log) == kExitOk);
    auto c4 = c;
    c4.workers = 4;
    c4.output_path = (scratch_dir() / "det4").string();
    REQUIRE(run(c4, log) == kExitOk);
    CHECK(slurp(c.output_path + ".csv") == slurp(c4.output_path + ".csv"));
    const auto j1 = nlohmann::json::parse(slurp(c.output_path + ".json"));
    const auto j4 = nlohmann::json::parse(slurp(c4.output_path + ".json"));
    CHECK(j1["result"] == j4["result"]);
    // Rerunning the identical config gives identical bytes.
    REQUIRE(run(c, log) == kExitOk);
    CHECK(slurp(c.output_path + ".json") == j1.dump(2) + "\n");
  }
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  auto missing = base(Command::clt, "x");
  missing.N = 64;
  missing.M = 40;
  CHECK(run(missing, log) == kExitValidation);

  auto unwritable = base(Command::variance, "x");
  unwritable.output_path = "/nonexistent-dir/khl/out";
  CHECK(run(unwritable, log) == kExitValidation);

  auto big = base(Command::count, "big");
  big.d = 3;
  big.r = 1;
  big.N = 1 << 20;
  big.M = 1;
  big.seed = 1;
  CHECK(run(big, log) == kExitResource);
}
