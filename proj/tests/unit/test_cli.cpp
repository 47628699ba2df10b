#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "experiment.hpp"

using namespace calderon;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* b = std::getenv("CALDERONLAB_BIN");
  return b ? b : "calderonlab";
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("calderonlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string err;
};

/// Runs the binary with `args`, config text written to <dir>/config.json when non-empty.
Run run(const fs::path& dir, const std::string& args, const std::string& config = "") {
  std::string cmd = binary() + " " + args + " --out " + dir.string();
  if (!config.empty()) {
    std::ofstream(dir / "config.json") << config;
    cmd += " --config " + (dir / "config.json").string();
  }
  cmd += " > " + (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(dir / "stderr.txt")};
}

Json report(const fs::path& dir, const std::string& sub) { return Json::parse(slurp(dir / (sub + ".json"))); }

}  // namespace

TEST_CASE("config validation in process") {
  CHECK(cli::subcommands().size() == 7);
  CHECK(cli::randomized("solve"));
  CHECK_FALSE(cli::randomized("runge"));
  CHECK_THROWS_AS(cli::make_config("solve", Json(), std::nullopt, std::nullopt, "."), cli::ConfigError);
  CHECK_THROWS_AS(cli::make_config("nope", Json(), 1, std::nullopt, "."), cli::ConfigError);

  try {
    cli::make_config("runge", Json{{"n_lst", {1, 2}}}, std::nullopt, std::nullopt, ".");
    FAIL("unknown key accepted");
  } catch (const cli::ConfigError& e) {
    CHECK(e.field() == "n_lst");
  }

  const auto a = cli::make_config("solve", Json{{"tol", 1e-9}}, 5, std::nullopt, "x");
  const auto b = cli::make_config("solve", Json{{"tol", 1e-9}}, 5, std::nullopt, "y");
  const auto c = cli::make_config("solve", Json{{"tol", 1e-9}}, 6, std::nullopt, "x");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.params.at("domain").at("nodes") == 256);
  // the file seed loses to the command line
  CHECK(*cli::make_config("solve", Json{{"seed", 3}}, 9, std::nullopt, ".").seed == 9);
}

TEST_CASE("solve: report, hash and determinism") {
  const auto d1 = scratch("solve1"), d2 = scratch("solve2");
  const std::string cfg = R"({"domain": {"kind": "ellipse", "semi_a": 1.3, "semi_b": 0.8, "nodes": 256}, "green_pairs": 0})";
  REQUIRE(run(d1, "solve --seed 11", cfg).code == 0);
  REQUIRE(run(d2, "solve --seed 11", cfg).code == 0);
  auto r1 = report(d1, "solve"), r2 = report(d2, "solve");
  CHECK(r1.at("schema_version") == kReportSchemaVersion);
  CHECK(r1.at("seed") == 11);
  CHECK(r1.at("config_hash").get<std::string>().size() == 16);
  CHECK(r1.at("pass") == true);
  CHECK(r1.contains("metadata"));
  r1.erase("metadata");
  r2.erase("metadata");
  CHECK(r1.dump() == r2.dump());
  CHECK(slurp(d1 / "solve_errors.csv") == slurp(d2 / "solve_errors.csv"));
}

TEST_CASE("invalid configurations exit with 2 and name the field") {
  const auto d = scratch("invalid");
  auto r = run(d, "solve");
  CHECK(r.code == 2);
  CHECK(r.err.find("seed") != std::string::npos);

  r = run(d, "cgo-decay", R"({"h_list": [0.15, 0.25, 0.4]})");
  CHECK(r.code == 2);
  CHECK(r.err.find("h_list") != std::string::npos);

  r = run(d, "runge", R"({"target": {"radius": -1}})");
  CHECK(r.code == 2);
  CHECK(r.err.find("target.radius") != std::string::npos);

  r = run(d, "runge", "{ not json");
  CHECK(r.code == 2);

  CHECK(run(d, "runge --resolution-scale 100").code == 2);
  CHECK(run(d, "no-such-command").code == 2);
  CHECK_FALSE(fs::exists(d / "runge.json"));
}

TEST_CASE("reconstruct with a zero phantom") {
  const auto d = scratch("zero");
  const std::string cfg = R"({"phantom": {"kind": "zero"}, "pixels": [8, 8], "radial": 16, "angular": 128,
                              "frequency": {"n1": 8, "n2": 8}, "lambda": 1e-6})";
  REQUIRE(run(d, "reconstruct", cfg).code == 0);
  const auto r = report(d, "reconstruct");
  CHECK(r.at("results").at("max_pixel").get<double>() == 0.0);
  CHECK(fs::exists(d / "reconstruction.csv"));
}

TEST_CASE("runge table") {
  const auto d = scratch("runge");
  REQUIRE(run(d, "runge", R"({"n_list": [50, 100, 200], "identity": false})").code == 0);
  const auto csv = slurp(d / "runge_convergence.csv");
  CHECK(csv.rfind("n_sources,l2_error,relative_error,lambda\n", 0) == 0);
  CHECK(report(d, "runge").at("results").at("convergence").size() == 3);
}

TEST_CASE("watermelon: positive c' and a rejected toy") {
  const auto d = scratch("watermelon");
  REQUIRE(run(d, "watermelon --seed 2", R"({"delta": 0.01, "r": 0.5, "probes": 200})").code == 0);
  const auto r = report(d, "watermelon");
  CHECK(r.at("results").at("c_prime").get<double>() > 0.0);
  CHECK(fs::exists(d / "barrier.csv"));

  // the report is still written when an assertion fails
  const auto e = scratch("watermelon_literal");
  CHECK(run(e, "watermelon --seed 2", R"({"delta": 0.01, "r": 0.5, "probes": 200, "toy": "literal"})").code == 1);
  CHECK(report(e, "watermelon").at("results").at("propagation").contains("rejected"));
}

TEST_CASE("print-config") {
  const auto d = scratch("print");
  REQUIRE(run(d, "bargmann-map --print-config --resolution-scale 2").code == 0);
  const auto j = Json::parse(slurp(d / "stdout.txt"));
  CHECK(j.at("subcommand") == "bargmann-map");
  CHECK(j.at("resolution_scale") == 2.0);
  CHECK_FALSE(fs::exists(d / "bargmann-map.json"));
}
