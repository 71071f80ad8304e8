#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "zklab/commands.hpp"
#include "zklab/config.hpp"
#include "zklab/error.hpp"
#include "zklab/trace.hpp"

using namespace zk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zklab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZKLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.out = out.string();
  return c;
}

}  // namespace

TEST_CASE("config text round-trips bit-exactly") {
  RunConfig c;
  c.seed = 42;
  c.ground_state.tol = 0.1 + 0.2;
  c.profiles.h = 1.0 / 3.0;
  c.profiles.b_sweep = {-0.05, 1e-3, 0.07};
  c.certify.resolutions = {64, 80};
  c.simulate.initial = "soliton";
  c.simulate.dt = 2.5e-3;
  c.out = "some/dir";
  const std::string text = to_text(c);
  const RunConfig back = parse_config(text);
  CHECK(to_text(back) == text);
  CHECK(back.ground_state.tol == c.ground_state.tol);
  CHECK(back.profiles.h == c.profiles.h);
  CHECK(back.profiles.b_sweep == c.profiles.b_sweep);
  CHECK(back.certify.resolutions == c.certify.resolutions);
  CHECK(back.simulate.initial == "soliton");
  CHECK(back.seed == 42);
  CHECK(back.out == "some/dir");
  CHECK(to_text(parse_config("")) == to_text(RunConfig{}));
}

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_config("# comment\n\nseed = 3\nprofiles.h = 0.25 length  # trailing\n"));
  CHECK_THROWS_AS(parse_config("profiles.hh = 0.25 length\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profiles.h = 0.25\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("simulate.dt = 0.01 length\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 3 length\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("simulate.n1 = 12.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("simulate.horizon = abc time\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("simulate.initial = wave\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ground_state.tol = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("weights.B = 50 length\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
}

TEST_CASE("config hash and JSON form") {
  RunConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  CHECK(config_hash(a).find_first_not_of("0123456789abcdef") == std::string::npos);
  b.seed = 1;
  CHECK(config_hash(a) != config_hash(b));
  const auto j = to_json(a);
  CHECK(j.at("profiles.h").at("unit") == "length");
  CHECK(j.at("profiles.h").at("value") == 0.125);
  CHECK(j.at("simulate.dt").at("unit") == "time");
  CHECK(j.at("seed") == 0);
  for (const auto& key : config_schema()) CHECK(to_text(a).find(key.name + " = ") != std::string::npos);
}

TEST_CASE("ground-state reports are deterministic and runs never overwrite") {
  const fs::path out = scratch("determinism");
  const RunConfig c = small_config(out);
  const CommandResult r1 = cmd_ground_state(c);
  const std::string first = slurp(r1.dir / "report.json");
  const CommandResult r2 = cmd_ground_state(c);
  CHECK(r1.dir.filename() == "ground-state");
  CHECK(r2.dir.filename() == "ground-state.2");
  CHECK(slurp(r2.dir / "report.json") == first);
  CHECK(slurp(r1.dir / "report.json") == first);
  CHECK(slurp(r1.dir / "profile.csv") == slurp(r2.dir / "profile.csv"));
  CHECK(r1.report.at("config_sha256") == config_hash(c));
  CHECK(parse_config(slurp(r1.dir / "config.txt")).seed == c.seed);
  CHECK(fs::exists(r1.dir / "timing.json"));
  CHECK(std::abs(r1.report.at("results").at("identities").at("energy").get<double>()) < 1e-6);
  CHECK(latest_run(out, "ground-state") == r2.dir);
  CHECK(load_ground_state(out).q0 == doctest::Approx(2.2062).epsilon(1e-4));
  fs::remove_all(out);
}

TEST_CASE("missing dependencies and exit codes") {
  const fs::path out = scratch("deps");
  const RunConfig c = small_config(out);
  CHECK_THROWS_AS(cmd_theta(c), DependencyError);
  CHECK_THROWS_AS(cmd_diagnose(c), DependencyError);
  CHECK(fs::is_empty(out));
  try {
    cmd_theta(c);
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == 4);
    CHECK(std::string(e.what()).find("ground-state") != std::string::npos);
  }
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(PreconditionError("x")) == 2);
  CHECK(exit_code_for(NumericalError("x")) == 3);
  CHECK_THROWS_AS(run_verb("fly", c), ConfigError);

  CHECK(run_cli("theta --out " + out.string()) == 4);
  const fs::path cfg = out / "bad.cfg";
  std::ofstream(cfg) << "ground_state.tol = 0\n";
  CHECK(run_cli("ground-state --config " + cfg.string() + " --out " + out.string()) == 2);
  CHECK(run_cli("ground-state --out " + out.string()) == 0);
  CHECK(fs::exists(out / "ground-state" / "report.json"));
  fs::remove_all(out);
}

TEST_CASE("simulate a pure soliton, then diagnose") {
  const fs::path out = scratch("simulate");
  RunConfig c = small_config(out);
  c.simulate.initial = "soliton";
  c.simulate.box1 = 64;
  c.simulate.box2 = 32;
  c.simulate.n1 = 384;
  c.simulate.n2 = 192;
  c.simulate.dt = 0.01;
  c.simulate.horizon = 0.5;
  c.simulate.stride = 10;
  cmd_ground_state(c);
  const CommandResult sim = cmd_simulate(c, {std::nullopt, std::nullopt, 2});
  const auto& tr = sim.report.at("results").at("trace");
  CHECK(tr.at("failed_rows") == 0);
  CHECK(tr.at("max_abs_b").get<double>() < 1e-6);
  CHECK(tr.at("max_lambda_deviation").get<double>() < 1e-6);
  for (const char* f : {"initial.bin", "final.bin", "invariants.csv", "trace.csv", "rates.csv"})
    CHECK(fs::exists(sim.dir / f));

  const CommandResult dg = cmd_diagnose(c);
  std::ifstream in(dg.dir / "trace.csv");
  std::string header;
  std::getline(in, header);
  std::string expected;
  for (const auto& col : trace_csv_columns()) expected += (expected.empty() ? "" : ",") + col;
  CHECK(header == expected);
  CHECK(dg.report.at("results").at("source") == "simulate");
  CHECK(dg.report.at("results").at("rows") == 6);
  for (const char* f : {"b_over_lambda.csv", "laws.csv", "plot_diagnostics.py"}) CHECK(fs::exists(dg.dir / f));
  fs::remove_all(out);
}
