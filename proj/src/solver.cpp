#include "schjb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace schjb {

namespace {

double stopping_threshold(double tol, double gamma) {
  if (gamma <= 0.0) return tol;
  return tol * (1.0 - gamma) / gamma;
}

// min_a T_a u at one node; returns the row position of the first minimizer.
std::pair<double, std::size_t> best_row(const DiscreteOperator& op, std::size_t node, std::span<const double> u) {
  const auto rows = op.rows(node);
  double best = std::numeric_limits<double>::infinity();
  thread_local std::vector<double> vals;
  vals.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    vals[r] = DiscreteOperator::row_apply(rows[r], u);
    best = std::min(best, vals[r]);
  }
  std::size_t pick = 0;
  while (vals[pick] > best + kTieTolerance) ++pick;
  return {best, pick};
}

double fixed_point_residual(const DiscreteOperator& op, std::span<const double> u) {
  double res = 0.0;
  for (std::size_t node = 0; node < u.size(); ++node) res = std::max(res, std::abs(u[node] - best_row(op, node, u).first));
  return res;
}

// Iterations still needed at the observed contraction rate, or +inf.
double projected_iterations(const std::vector<double>& history, double target) {
  const std::size_t n = history.size();
  if (n < 20 || history.back() <= target) return 0.0;
  const double ratio = std::pow(history[n - 1] / history[n - 11], 0.1);
  if (!(ratio < 1.0) || !(ratio > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log(target / history.back()) / std::log(ratio);
}

}  // namespace

SolveResult value_iteration(const DiscreteOperator& op, const SolveOptions& options) {
  const std::size_t n = op.grid().size();
  std::vector<double> u(n, op.lower_constant()), next(n);
  const double target = stopping_threshold(options.tol, op.max_discount_factor());

  SolveResult result;
  result.method = "value";
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    double update = 0.0;
    for (std::size_t node = 0; node < n; ++node) {
      next[node] = best_row(op, node, u).first;
      update = std::max(update, std::abs(next[node] - u[node]));
    }
    u.swap(next);
    result.history.push_back(update);
    result.iterations = it + 1;
    if (update <= target) {
      result.converged = true;
      break;
    }
    if (it % 256 == 255 && projected_iterations(result.history, target) > double(options.max_iter - it)) {
      result.message = "stopped early: observed contraction cannot reach the tolerance within max_iter";
      break;
    }
  }
  if (!result.converged && result.message.empty()) result.message = "max_iter reached";

  result.value.grid = op.grid_ptr();
  result.value.values = std::move(u);
  result.final_residual = fixed_point_residual(op, result.value.values);
  result.policy = extract_policy(result.value, op);
  return result;
}

SolveResult policy_iteration(const DiscreteOperator& op, const SolveOptions& options) {
  const std::size_t n = op.grid().size();
  const double inner_tol = options.tol / 10.0;

  std::vector<double> u(n, op.lower_constant()), next(n);
  // Row position (within the node's admissible rows) of the current policy.
  std::vector<std::size_t> choice(n);
  for (std::size_t node = 0; node < n; ++node) choice[node] = best_row(op, node, u).second;

  SolveResult result;
  result.method = "policy";
  std::size_t inner_total = 0;
  for (std::size_t outer = 0; outer < options.max_iter; ++outer) {
    double gamma = 0.0;
    for (std::size_t node = 0; node < n; ++node) gamma = std::max(gamma, op.rows(node)[choice[node]].discount_factor);
    const double target = stopping_threshold(inner_tol, gamma);

    std::vector<double> inner_history;
    bool evaluated = false;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
      double update = 0.0;
      for (std::size_t node = 0; node < n; ++node) {
        next[node] = DiscreteOperator::row_apply(op.rows(node)[choice[node]], u);
        update = std::max(update, std::abs(next[node] - u[node]));
      }
      u.swap(next);
      ++inner_total;
      inner_history.push_back(update);
      if (update <= target) {
        evaluated = true;
        break;
      }
    }
    result.iterations = outer + 1;
    if (!evaluated) {
      result.message = "policy evaluation did not reach tol/10 within max_iter";
      break;
    }

    std::size_t changed = 0;
    double improvement = 0.0;
    for (std::size_t node = 0; node < n; ++node) {
      const auto rows = op.rows(node);
      const double current = DiscreteOperator::row_apply(rows[choice[node]], u);
      const auto [best, pick] = best_row(op, node, u);
      if (best < current - kTieTolerance) {
        choice[node] = pick;
        ++changed;
        improvement = std::max(improvement, current - best);
      }
    }
    result.history.push_back(improvement);
    if (changed == 0) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged && result.message.empty()) result.message = "max outer iterations reached";
  result.message += (result.message.empty() ? "" : "; ") + std::string("inner sweeps: ") + std::to_string(inner_total);

  result.value.grid = op.grid_ptr();
  result.value.values = std::move(u);
  result.final_residual = fixed_point_residual(op, result.value.values);
  result.policy = extract_policy(result.value, op);
  return result;
}

Policy extract_policy(const ValueFunction& value, const DiscreteOperator& op) {
  require_same_grid(*value.grid, op.grid());
  Policy p;
  p.grid = op.grid_ptr();
  p.control.resize(value.size());
  for (std::size_t node = 0; node < value.size(); ++node) {
    p.control[node] = op.rows(node)[best_row(op, node, value.values).second].control;
  }
  return p;
}

ValueFunction bellman_residual(const ValueFunction& value, const DiscreteOperator& op, ResidualScale scale) {
  require_same_grid(*value.grid, op.grid());
  ValueFunction r;
  r.grid = op.grid_ptr();
  r.values.resize(value.size());
  for (std::size_t node = 0; node < value.size(); ++node) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& row : op.rows(node)) {
      double gap = DiscreteOperator::row_gap(row, node, value.values);
      if (scale == ResidualScale::kGenerator) gap *= op.discount() + row.rate;
      worst = std::max(worst, gap);
    }
    r.values[node] = worst;
  }
  return r;
}

}  // namespace schjb
