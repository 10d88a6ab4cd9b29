#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "schjb/feedback.hpp"
#include "schjb/grid.hpp"
#include "schjb/problem.hpp"

namespace schjb {

enum class ProjectionMode { kProject, kResample };

struct SimParams {
  double dt = 1e-3;
  double horizon = 10.0;  // T
  std::size_t n_paths = 1000;
  std::uint64_t seed = 20240501;
  ProjectionMode projection = ProjectionMode::kProject;

  void validate() const;
};

struct SamplePath {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<bool> in_domain;  // false where the raw Euler proposal left G
  std::size_t projections = 0;
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double bias_bound = 0.0;  // max(|f_lower|, |f_upper|) e^{-beta T} / beta
  std::size_t projected_steps = 0;
  std::size_t total_steps = 0;
  std::vector<double> path_costs;  // in path-index order
};

/// Euler-Maruyama X_{k+1} = X_k + b dt + sigma sqrt(dt) xi_k with xi_k drawn
/// from a counter-based stream keyed by (seed, path_index, k). Proposals that
/// leave G are projected back (or redrawn) and counted.
SamplePath simulate_path(const ControlProblem& problem, const Domain& domain, const Feedback& policy,
                         const Vector& x0, const SimParams& params, std::uint64_t path_index);

/// Discounted cost truncated at T. The running cost is interpolated linearly
/// between steps and integrated against the exact discount factor, so f = c
/// reproduces c (1 - e^{-beta T}) / beta exactly.
MCEstimate estimate_cost(const ControlProblem& problem, const Domain& domain, const Feedback& policy,
                         const Vector& x0, const SimParams& params);

enum class ZDirection { kSuper, kSub };

const char* to_string(ZDirection d);

struct ZCheck {
  std::string policy;
  double time = 0.0;
  double mean = 0.0;       // sample mean of Z_t
  double std_error = 0.0;
  double radius = 0.0;     // z * std_error
  bool holds = false;
};

struct ZProcessReport {
  ZDirection direction = ZDirection::kSuper;
  double w_at_start = 0.0;
  Vector x0;
  double z = 2.576;
  double allowance = 0.0;
  std::size_t n_paths = 0;
  std::vector<ZCheck> checks;
  std::size_t interpolation_fallbacks = 0;
  std::size_t projected_steps = 0;
  std::size_t total_steps = 0;
  bool overall = false;
  std::string tested_family;
};

struct ZTestOptions {
  double z = 2.576;  // 99% two-sided
  /// Extra slack on the right-hand side; rounding slack 1e-12 max(1, |w(x0)|)
  /// is always applied.
  double allowance = 0.0;
};

/// Z_t = int_0^t e^{-beta s} f ds + e^{-beta t} w(X_t) from a deterministic
/// start. super: mean - z SE <= w(x0); sub: mean + z SE >= w(x0).
ZProcessReport test_z_process(const ControlProblem& problem, const ValueFunction& w, const Feedback& policy,
                              const Vector& x0, const std::vector<double>& checkpoints, const SimParams& params,
                              ZDirection direction, const ZTestOptions& options = {});

enum class LatticeMode { kMinSuper, kMaxSub };

/// min-super: tests w1 ^ w2 under the policy of whichever function is smaller
/// at x0 (policy 1 iff w1(x0) < w2(x0)). max-sub: tests u1 v u2 against every
/// supplied policy.
ZProcessReport test_lattice_closure(const ControlProblem& problem, const ValueFunction& w1, const ValueFunction& w2,
                                    const std::vector<Feedback>& policies, const Vector& x0,
                                    const std::vector<double>& checkpoints, const SimParams& params, LatticeMode mode,
                                    const ZTestOptions& options = {});

/// Pointwise min / max of two grid functions on one grid.
ValueFunction pointwise_min(const ValueFunction& a, const ValueFunction& b);
ValueFunction pointwise_max(const ValueFunction& a, const ValueFunction& b);

}  // namespace schjb
