#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "schjb/feedback.hpp"
#include "schjb/grid.hpp"
#include "schjb/problem.hpp"

namespace schjb {

struct ViabilityOptions {
  double tol_sigma = 1e-8;     // tangency |sigma^T n| threshold
  double tol_b = 0.0;          // inward value must be >= -tol_b
  double delta_strict = 1e-6;  // margin for -n.b_psi > 0 in the strong condition
  double edge_margin = 1e-2;   // box scans stay this far from edges and corners
};

/// Evidence for the smooth-boundary form of viability at one point:
/// sigma^T n = 0 and -n.b + 1/2 Tr(sigma sigma^T D^2 rho) >= 0.
struct ViabilitySample {
  Vector x;
  std::size_t best_control = 0;
  double tangency_residual = 0.0;  // |sigma^T(x, a*) n(x)|
  double inward_value = 0.0;       // -n.b + 1/2 Tr(sigma sigma^T D^2 rho) at a*
  bool pass = false;
};

struct ViabilityReport {
  std::vector<ViabilitySample> samples;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double worst_tangency = 0.0;
  double worst_inward = 0.0;  // minimum inward value over samples
  double pass_fraction() const {
    return samples.empty() ? 0.0 : static_cast<double>(passed) / static_cast<double>(samples.size());
  }
};

/// Among controls with tangency residual <= tol_sigma picks the one with the
/// largest inward value (first in list order on ties). If none is tangent,
/// reports the least non-tangent control and fails.
ViabilitySample check_point_viability(const ControlProblem& problem, const Domain& domain, const Vector& x,
                                      const ViabilityOptions& options = {});

/// sigma_psi(x) = 0 (Frobenius norm <= tol_sigma) and -n.b_psi(x) >= delta_strict.
bool check_strong_condition(const ControlProblem& problem, const Domain& domain, const Feedback& psi,
                            const Vector& x, const ViabilityOptions& options = {});

/// Deterministic quasi-uniform points on the boundary of G.
std::vector<Vector> sample_boundary(const Domain& domain, std::size_t n_samples, double edge_margin = 1e-2);

ViabilityReport scan_boundary(const ControlProblem& problem, const Domain& domain, std::size_t n_samples,
                              const ViabilityOptions& options = {});

/// Fraction of sampled boundary points where psi satisfies the strong condition.
struct StrongScan {
  std::size_t checked = 0;
  std::size_t passed = 0;
  double fraction() const { return checked ? static_cast<double>(passed) / static_cast<double>(checked) : 0.0; }
};
StrongScan scan_strong_condition(const ControlProblem& problem, const Domain& domain, const Feedback& psi,
                                 std::size_t n_samples, const ViabilityOptions& options = {});

/// Grid realization of the feedback map psi.
struct FeedbackMap {
  Policy policy;
  std::vector<std::string> provenance;  // per node
  Feedback as_feedback(const ControlSet& controls) const { return grid_feedback(policy, controls, "psi"); }
};

/// Boundary nodes: the viability-maximizing control. Interior nodes: the
/// control minimizing f(x, a). Throws "domain not viable under control
/// sample" when some boundary node has no passing control.
FeedbackMap construct_feedback(const ControlProblem& problem, std::shared_ptr<const Grid> grid,
                               const ViabilityOptions& options = {});

}  // namespace schjb
