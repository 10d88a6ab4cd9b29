#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "schjb/scheme.hpp"
#include "schjb/solver.hpp"

namespace schjb {

enum class ViolationClass { kInteriorSub, kEverywhereSuper };

const char* to_string(ViolationClass c);

struct Violation {
  std::size_t node = 0;
  Vector location;
  double residual = 0.0;
  ViolationClass kind = ViolationClass::kInteriorSub;
};

/// Residual-based check of one inequality of the state-constrained problem.
/// Viscosity inequalities are checked through the monotone-scheme residual,
/// not through C^2 test functions.
struct ViolationReport {
  std::string check;  // "subsolution" or "supersolution"
  std::size_t checked = 0;
  std::vector<Violation> violations;
  double tolerance = 0.0;
  double required_fraction = 0.99;
  double worst_residual = 0.0;  // max (sub) or min (super) residual over checked nodes
  std::string function_label;

  double pass_fraction() const {
    return checked == 0 ? 1.0 : 1.0 - static_cast<double>(violations.size()) / static_cast<double>(checked);
  }
  bool all_pass() const { return violations.empty(); }
  bool passed() const { return pass_fraction() >= required_fraction; }
};

/// Residual <= tol on interior nodes; boundary nodes are exempt.
ViolationReport check_subsolution(const ValueFunction& u, const DiscreteOperator& op, double tol,
                                  double required_fraction = 0.99);

/// Residual >= -tol on every in-domain node, boundary included.
ViolationReport check_supersolution(const ValueFunction& u, const DiscreteOperator& op, double tol,
                                    double required_fraction = 0.99);

struct SandwichReport {
  bool passed = false;
  double tolerance = 0.0;
  double worst_lower_gap = 0.0;  // max (u_minus - v) over G
  double worst_upper_gap = 0.0;  // max (v - w_plus) over interior nodes
  std::size_t worst_lower_node = 0;
  std::size_t worst_upper_node = 0;
  std::size_t lower_failures = 0;
  std::size_t upper_failures = 0;
};

/// u_minus <= v + tol on G and v <= w_plus + tol on interior nodes.
SandwichReport check_sandwich(const ValueFunction& u_minus, const ValueFunction& v, const ValueFunction& w_plus,
                              double tol = 1e-9);

struct ComparisonReport {
  bool passed = false;
  double tolerance = 0.0;
  double margin = 0.0;  // min (super - sub) over G
  std::size_t worst_node = 0;
  std::size_t failures = 0;
};

/// sub <= super + tol on every in-domain node.
ComparisonReport check_comparison(const ValueFunction& sub, const ValueFunction& super, double tol = 1e-9);

/// Boundary values replaced by the max over adjacent interior nodes (the
/// discrete limsup from the interior); interior values unchanged.
ValueFunction boundary_limsup_extend(const ValueFunction& w);

}  // namespace schjb
