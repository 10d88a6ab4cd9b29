#pragma once

#include <functional>
#include <string>

#include "schjb/grid.hpp"

namespace schjb {

/// State-feedback control x -> a used to close the loop dX = b(X, psi(X)) dt + ...
struct Feedback {
  std::string label;
  std::function<Vector(const Vector&)> control;

  Vector operator()(const Vector& x) const { return control(x); }
};

Feedback constant_feedback(const Vector& a, std::string label = {});

/// Piecewise-constant feedback from a grid policy: the control of the nearest
/// in-domain node.
Feedback grid_feedback(const Policy& policy, const ControlSet& controls, std::string label = {});

/// Nearest in-domain node: lattice rounding first, brute force if that node
/// is outside G.
std::size_t locate_node(const Grid& grid, const Vector& x);

}  // namespace schjb
