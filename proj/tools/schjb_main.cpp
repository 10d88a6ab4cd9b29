// Command-line front end: schjb <subcommand> --config FILE [--seed N] [--out DIR] [--set section.key=value]...
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "schjb/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"State-constrained HJB solver and verifier"};
  app.set_version_flag("--version", schjb::kToolVersion);
  std::string subcommand;
  std::string config;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("subcommand", subcommand, "solve | simulate | ztest | verify | viability | sandwich | all")
      ->required()
      ->check(CLI::IsMember(schjb::subcommands()));
  app.add_option("--config", config, "configuration file (TOML subset)")->required();
  app.add_option("--seed", seed, "overrides sim.seed");
  app.add_option("--out", out_dir, std::string("output directory (default: $") + schjb::kOutDirEnv +
                                        " or ./schjb-out)");
  app.add_option("--set", overrides, "override one key, e.g. --set solver.tol=1e-10");
  try {
    app.parse(argc, argv);
  } catch (const CLI::Error& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : schjb::kExitUsage;
  }

  if (!seed.empty()) overrides.push_back("sim.seed=" + seed);
  if (!out_dir.empty()) overrides.push_back("output.directory=\"" + out_dir + "\"");
  try {
    const schjb::RunConfig cfg = schjb::parse_config(config, overrides);
    std::cout << "config " << config << " hash " << cfg.hash_hex() << " -> " << cfg.out_dir << "\n";
    return schjb::run(subcommand, cfg, std::cout);
  } catch (const schjb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return schjb::kExitUsage;
  } catch (const schjb::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return schjb::kExitUsage;
  } catch (const schjb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return schjb::kExitCheckFailed;
  }
}
