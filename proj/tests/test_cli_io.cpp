#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "schjb/config.hpp"
#include "schjb/io.hpp"
#include "schjb/pipeline.hpp"

using namespace schjb;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = "[problem]\nname = \"constant-cost\"\nc = 2\nbeta = 1\n";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("schjb-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SCHJB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(SCHJB_CONFIG_DIR) + "/" + name; }

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config_text(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_config: minimal constant-cost config gets defaults") {
  const RunConfig cfg = parse_config_text(kMinimal);
  CHECK(cfg.problem_name == "constant-cost");
  CHECK(std::get<double>(cfg.problem_params.at("c")) == 2.0);
  CHECK(cfg.h == 0.05);
  CHECK_FALSE(cfg.band.has_value());
  CHECK(cfg.method == "policy");
  CHECK(cfg.tol == 1e-8);
  CHECK(cfg.effective_verify_tol() == doctest::Approx(1e-7));
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.sim.n_paths == 1000);
  CHECK(cfg.checkpoints == std::vector<double>{0.5, 1.0, 2.0, 5.0});
  CHECK(cfg.z == 2.576);
  CHECK(cfg.pass_fraction == 0.99);
  CHECK_FALSE(cfg.out_dir.empty());
}

TEST_CASE("parse_config errors name the key") {
  CHECK(error_of(kMinimal + "[grid]\nh = 0\n") == "grid.h must be positive");
  CHECK(error_of(kMinimal + "[solver]\ntolrance = 1e-9\n").find("solver.tolrance") != std::string::npos);
  CHECK(error_of(kMinimal + "[sim]\ndt = -1\n").find("sim.dt") != std::string::npos);
  CHECK(error_of("[problem]\nname = \"constant-cost\"\nbeta = 0\n").find("problem.beta") != std::string::npos);
  CHECK(error_of("[problem]\nname = \"no-such-problem\"\n").find("problem.name") != std::string::npos);
  CHECK(error_of("[problem]\nc = 1\n").find("problem.name") != std::string::npos);
  CHECK(error_of(kMinimal + "[grdi]\nh = 0.1\n").find("grdi") != std::string::npos);
  CHECK(error_of(kMinimal + "[problem]\nfoo = 1\n") != "");
  CHECK(error_of(kMinimal + "[solver]\nmethod = \"newton\"\n").find("solver.method") != std::string::npos);
  CHECK(error_of(kMinimal + "[sim]\nx0 = [5]\n").find("sim.x0") != std::string::npos);
  CHECK(error_of("[problem]\nname = \"inline\"\n").find("domain") != std::string::npos);
  CHECK(error_of("[problem]\nname = \"deterministic-decay\"\nL = \"wide\"\n").find("problem.L") != std::string::npos);
  CHECK(error_of(kMinimal + "[grid\n") != "");
  CHECK(error_of(kMinimal, {"solver.tol"}) != "");
}

TEST_CASE("overrides and seeds") {
  const RunConfig cfg = parse_config_text(kMinimal, {"grid.h=0.1", "solver.method=value", "sim.seed=18446744073709551615"});
  CHECK(cfg.h == 0.1);
  CHECK(cfg.method == "value");
  CHECK(cfg.sim.seed == 18446744073709551615ull);
  CHECK(error_of(kMinimal, {"sim.seed=-3"}).find("sim.seed") != std::string::npos);
}

TEST_CASE("config hash: stable, sensitive to results, blind to the output directory") {
  const RunConfig a = parse_config_text(kMinimal);
  const RunConfig b = parse_config_text("# comment\n" + kMinimal + "\n[grid]\nh = 0.05\n");
  CHECK(a.hash == b.hash);
  CHECK(a.hash_hex().size() == 16);
  CHECK(parse_config_text(kMinimal, {"grid.h=0.1"}).hash != a.hash);
  CHECK(parse_config_text(kMinimal, {"sim.seed=7"}).hash != a.hash);
  CHECK(parse_config_text(kMinimal, {"output.directory=elsewhere"}).hash == a.hash);
}

TEST_CASE("every catalog config in configs/ parses") {
  for (const auto& entry : fs::directory_iterator(SCHJB_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_config(entry.path().string()));
  }
}

TEST_CASE("write_value_csv: 5 nodes give 5 rows, values round-trip exactly") {
  const fs::path dir = scratch("csv");
  auto g = std::make_shared<const Grid>(build_grid(Domain::box(fixtures::scalar(-1), fixtures::scalar(1)), 0.5, 0.25));
  ValueFunction v = ValueFunction::constant(g, 0.0);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (auto& x : v.values) x = u(rng) / 3.0;
  v[0] = 1.0 / 3.0;
  v[1] = -0.0;
  v[2] = 5e-324;
  Policy pol{g, {0, 1, 0, 2, 1}};
  const Provenance prov{"0123456789abcdef", kToolVersion};
  const std::string path = (dir / "value.csv").string();
  write_value_csv(v, &pol, path, prov);

  const std::string text = slurp(path);
  CHECK(text.rfind("# config_hash=0123456789abcdef tool_version=0.1.0\n", 0) == 0);
  const CsvTable t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"x0", "value", "policy_index", "node_class"});
  CHECK(t.rows.size() == 5);

  const ValueCsv back = read_value_csv(path);
  REQUIRE(back.values.size() == 5);
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(back.values[n] == v[n]);
    CHECK(back.coords[n][0] == g->position(n)[0]);
    CHECK(back.policy[n] == static_cast<long>(pol.control[n]));
  }
  CHECK(back.node_class.front() == "boundary");
  CHECK(back.node_class[2] == "interior");
}

TEST_CASE("reports carry the config hash and a readable summary") {
  const fs::path dir = scratch("report");
  Report r;
  r.title = "solve report";
  r.line("some body text");
  r.set("converged", "true");
  r.set("residual", 1.0 / 3.0);
  const Provenance prov{"feedfacecafebeef", kToolVersion};
  write_report(r, (dir / "r.txt").string(), prov);
  CHECK(slurp(dir / "r.txt").find("config_hash=feedfacecafebeef") != std::string::npos);
  const auto summary = read_report_summary((dir / "r.txt").string());
  REQUIRE(summary.size() == 2);
  CHECK(summary[1].first == "residual");
  CHECK(std::stod(summary[1].second) == 1.0 / 3.0);
}

TEST_CASE("IO failures name the path") {
  const fs::path dir = scratch("ioerr");
  std::ofstream(dir / "file") << "x";
  const std::string bad = (dir / "file" / "value.csv").string();
  try {
    write_csv(CsvTable{{"a"}, {}}, bad, Provenance{"0", kToolVersion});
    FAIL("expected an IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find((dir / "file").string()) != std::string::npos);
  }
  CHECK_THROWS_AS(read_csv((dir / "missing.csv").string()), IoError);
}

TEST_CASE("run: exit codes") {
  const fs::path dir = scratch("exit");
  SUBCASE("all on degenerate-ball exits 0 with the full report set") {
    CHECK(cli("all --config " + config("degenerate_ball.toml") + " --out " + (dir / "ball").string(), dir / "ball.log") ==
          0);
    for (const char* f : {"value.csv", "history.csv", "solve_report.txt", "viability.csv", "viability_report.txt",
                          "feedback.csv", "violations.csv", "verify_report.txt", "estimate.csv", "simulate_report.txt",
                          "ztest.csv", "ztest_report.txt", "sandwich.csv", "sandwich_report.txt", "summary_report.txt"}) {
      CAPTURE(f);
      REQUIRE(fs::exists(dir / "ball" / f));
      CHECK(slurp(dir / "ball" / f).find("config_hash=") != std::string::npos);
    }
  }
  SUBCASE("viability on outward-drift exits 1") {
    CHECK(cli("viability --config " + config("outward_drift.toml") + " --out " + (dir / "out").string(),
              dir / "out.log") == 1);
  }
  SUBCASE("broken configs exit 2") {
    std::ofstream(dir / "broken.toml") << kMinimal << "[grid]\nh = 0\n";
    CHECK(cli("solve --config " + (dir / "broken.toml").string() + " --out " + (dir / "b").string(), dir / "b.log") == 2);
    CHECK(slurp(dir / "b.log").find("grid.h must be positive") != std::string::npos);
    CHECK(cli("solve --config " + (dir / "missing.toml").string(), dir / "m.log") == 2);
    CHECK(cli("frobnicate --config " + config("constant_cost.toml"), dir / "u.log") == 2);
    CHECK(cli("solve", dir / "n.log") == 2);
    CHECK(cli("solve --config " + config("constant_cost.toml") + " --set solver.tolrance=1", dir / "k.log") == 2);
  }
  SUBCASE("library entry point agrees") {
    std::ostringstream log;
    RunConfig cfg = parse_config(config("outward_drift.toml"), {"output.directory=\"" + (dir / "lib").string() + "\""});
    CHECK(run("viability", cfg, log) == kExitCheckFailed);
    CHECK_THROWS_AS(run("frobnicate", cfg, log), ConfigError);
  }
}

TEST_CASE("determinism: identical config and seed give byte-identical CSVs") {
  const fs::path dir = scratch("determinism");
  const std::string fast = " --set grid.h=0.1 --set sim.n_paths=200 --set sim.dt=1e-2 --set sim.per_path=true";
  for (const char* run_name : {"a", "b"}) {
    REQUIRE(cli("all --config " + config("degenerate_ball.toml") + fast + " --seed 77 --out " +
                    (dir / run_name).string(),
                dir / (std::string(run_name) + ".log")) == 0);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (entry.path().extension() != ".csv") continue;
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
    ++compared;
  }
  CHECK(compared >= 8);
  // A different seed changes the Monte Carlo outputs.
  REQUIRE(cli("simulate --config " + config("degenerate_ball.toml") + fast + " --seed 78 --out " + (dir / "c").string(),
              dir / "c.log") == 0);
  CHECK(slurp(dir / "a" / "estimate.csv") != slurp(dir / "c" / "estimate.csv"));
}
