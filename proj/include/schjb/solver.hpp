#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "schjb/scheme.hpp"

namespace schjb {

struct SolveOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1'000'000;
};

struct SolveResult {
  ValueFunction value;
  Policy policy;
  std::size_t iterations = 0;
  double final_residual = 0.0;  // sup_x |u - min_a T_a u|
  std::vector<double> history;  // sup-norm update per sweep (value) or per outer step (policy)
  bool converged = false;
  std::string method;
  std::string message;
};

/// Jacobi value iteration u <- min_a T_a u started from f_lower/beta; stops
/// once the sup-norm update is <= tol (1 - gamma_max) / gamma_max.
SolveResult value_iteration(const DiscreteOperator& op, const SolveOptions& options = {});

/// Howard's algorithm; each policy is evaluated by fixed-point iteration to
/// tol / 10 and replaced only where another control is strictly better.
SolveResult policy_iteration(const DiscreteOperator& op, const SolveOptions& options = {});

/// Greedy argmin of T_a u per node, ties broken by control-list order.
Policy extract_policy(const ValueFunction& value, const DiscreteOperator& op);

enum class ResidualScale {
  kValue,      // max_a (u - T_a u), the fixed-point defect
  kGenerator,  // max_a (beta u - f - L_h^a u), the discrete F
};

/// Signed per-node residual with the sign convention of F: positive where u
/// is a strict supersolution of the discrete equation, negative where it is
/// a strict subsolution.
ValueFunction bellman_residual(const ValueFunction& value, const DiscreteOperator& op,
                               ResidualScale scale = ResidualScale::kValue);

}  // namespace schjb
