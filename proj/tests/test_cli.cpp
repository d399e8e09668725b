#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "susy/cli.hpp"

using namespace susy;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / "susy_cli_tests";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# comment\n"
      "m = 2\n"
      "h=0.0078125\n"
      "n_paths = 1000   # trailing\n"
      "seed = 42\n"
      "V.name = tanhpoly\n"
      "V.lambda = 0.25\n"
      "F.name = cos, x2\n"
      "eps_list = 0.2,0.1\n");
  CHECK(c.m == 2.0);
  CHECK(c.h == 0.0078125);
  CHECK(c.n_paths == 1000);
  CHECK(c.master_seed == 42);
  CHECK(c.V_name == "tanhpoly");
  CHECK(c.V_lambda == 0.25);
  CHECK(c.F_names == std::vector<std::string>{"cos", "x2"});
  CHECK(c.eps_list == std::vector<double>{0.2, 0.1});

  CHECK_THROWS_AS(parse_config("mass = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("V.name = linear\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("F.name = sin\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m 1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg"), ConfigError);
}

TEST_CASE("csv formatting") {
  ReportRow r{"a.b", "value", 0.1, std::nullopt, 0.0, 1.0};
  const auto csv = to_csv({r});
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(csv.find("a.b,value,0.10000000000000001,,0,1,true") != std::string::npos);
  r.std_err = 0.5;
  r.tolerance = 0.05;
  CHECK(to_csv({r}).find(",0.5,0,0.050000000000000003,false") != std::string::npos);
}

TEST_CASE("bad invocations exit 2 without output") {
  const auto out = scratch_dir() / "never.csv";
  fs::remove(out);
  std::ostringstream o, e;
  CHECK(run_cli({"verify-wick", "--config", "/nonexistent/cfg", "--out", out.string()}, o, e) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(run_cli({"verify-everything"}, o, e) == 2);
  CHECK(run_cli({}, o, e) == 2);

  const auto cfg = scratch_dir() / "bad.cfg";
  std::ofstream(cfg) << "T_support = 0\n";
  CHECK(run_cli({"verify-wick", "--config", cfg.string(), "--out", out.string()}, o, e) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("verify-wick writes a passing, reproducible report") {
  const auto a = scratch_dir() / "wick_a.csv";
  const auto b = scratch_dir() / "wick_b.csv";
  std::ostringstream o, e;
  CHECK(run_cli({"verify-wick", "--out", a.string()}, o, e) == 0);
  CHECK(run_cli({"verify-wick", "--out", b.string()}, o, e) == 0);
  const auto text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(text.find(",false\n") == std::string::npos);
}

TEST_CASE("csv goes to stdout without --out") {
  std::ostringstream o, e;
  CHECK(run_cli({"algebra-selftest"}, o, e) == 0);
  CHECK(o.str().rfind(std::string(kCsvHeader), 0) == 0);
  CHECK(e.str().find("algebra-selftest:") != std::string::npos);
}

TEST_CASE("subcommand list") {
  const auto& s = subcommands();
  CHECK(s.front() == "algebra-selftest");
  CHECK(s.back() == "wong-zakai");
  CHECK(s.size() == 7);
}
