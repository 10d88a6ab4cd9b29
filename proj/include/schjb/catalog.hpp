#pragma once

#include <optional>
#include <string>
#include <vector>

#include "schjb/domain.hpp"
#include "schjb/params.hpp"
#include "schjb/problem.hpp"

namespace schjb {

/// Declarative domain description: kind plus numeric parameters.
struct DomainSpec {
  std::string kind;  // "box", "ball", "ellipse", "superellipse"
  ParamMap params;
};

/// A problem together with the domain it is posed on.
struct ProblemInstance {
  ControlProblem problem;
  Domain domain;
  std::optional<double> preferred_h;  // fixed grid spacing some catalog entries come with
  bool viable = true;                 // false for entries built to violate the viability condition
};

/// Named problems: "constant-cost", "deterministic-decay", "degenerate-ball",
/// "outward-drift", "coarse-mdp", plus "inline" assembled from the function
/// catalogs below.
const std::vector<std::string>& catalog_names();

/// Builds a catalog entry. Every key of `params` must be consumed by the entry;
/// leftovers are reported as "problem.<key>". `domain` overrides the default
/// domain where the entry allows it ("constant-cost" and "inline").
ProblemInstance make_problem(const std::string& name, const ParamMap& params,
                             const std::optional<DomainSpec>& domain = std::nullopt);

/// Errors name the offending key as "domain.<key>".
Domain make_domain(const DomainSpec& spec);

/// Spot-checks f_lower <= f <= f_upper on deterministic samples of G x A.
/// Returns the worst violation (0 if none).
double cost_bound_violation(const ProblemInstance& instance, std::size_t n_samples = 2000);

/// Inline-problem function catalogs.
const std::vector<std::string>& drift_catalog();      // zero, decay, control, decay-control, expand
const std::vector<std::string>& diffusion_catalog();  // zero, constant, vanishing, control-vanishing
const std::vector<std::string>& cost_catalog();       // constant, quadratic

}  // namespace schjb
