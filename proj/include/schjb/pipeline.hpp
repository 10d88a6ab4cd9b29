#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schjb/catalog.hpp"
#include "schjb/config.hpp"
#include "schjb/io.hpp"
#include "schjb/solver.hpp"
#include "schjb/viability.hpp"

namespace schjb {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

struct StageResult {
  std::string stage;
  bool passed = false;
  std::string note;
  std::vector<std::string> files;
};

/// The solve -> viability -> verify -> simulate -> ztest -> sandwich chain on
/// one configuration. Stages share the grid, operator and solution, computed
/// on first use. Every stage writes its CSVs and a report into cfg.out_dir.
class Pipeline {
 public:
  Pipeline(RunConfig cfg, std::ostream& log);

  StageResult solve();
  StageResult viability();
  StageResult verify();
  StageResult simulate();
  StageResult ztest();
  StageResult sandwich();

  /// Runs one subcommand (or `all`) and returns the exit code.
  int run(const std::string& subcommand);

  const RunConfig& config() const { return cfg_; }
  const ProblemInstance& instance() const { return instance_; }
  const SolveResult& solution();
  const DiscreteOperator& op();
  Vector start_point() const;

 private:
  std::string out(const std::string& file) const;
  Provenance prov() const { return Provenance::of(cfg_); }
  Report header(const std::string& title) const;
  std::optional<Feedback> psi();

  RunConfig cfg_;
  std::ostream& log_;
  ProblemInstance instance_;
  std::shared_ptr<const Grid> grid_;
  std::optional<DiscreteOperator> op_;
  std::optional<SolveResult> solution_;
  std::optional<std::optional<FeedbackMap>> psi_;  // outer: computed yet; inner: viable
  std::string psi_error_;
};

const std::vector<std::string>& subcommands();

/// Convenience wrapper around Pipeline::run.
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log);

}  // namespace schjb
