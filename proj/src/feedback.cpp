#include "schjb/feedback.hpp"

#include <algorithm>
#include <cmath>

namespace schjb {

Feedback constant_feedback(const Vector& a, std::string label) {
  if (label.empty()) {
    label = "constant(";
    for (Eigen::Index i = 0; i < a.size(); ++i) label += (i ? "," : "") + std::to_string(a[i]);
    label += ")";
  }
  return {std::move(label), [a](const Vector&) { return a; }};
}

std::size_t locate_node(const Grid& grid, const Vector& x) {
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (int i = 0; i < grid.dimension(); ++i) {
    const int k = static_cast<int>(std::floor((x[i] - grid.origin()[i]) / grid.spacing() + 0.5));
    flat += stride * static_cast<std::size_t>(std::clamp(k, 0, grid.counts()[i] - 1));
    stride *= static_cast<std::size_t>(grid.counts()[i]);
  }
  if (const auto node = grid.node_of(flat)) return *node;
  return grid.nearest_node(x);
}

Feedback grid_feedback(const Policy& policy, const ControlSet& controls, std::string label) {
  if (policy.control.size() != policy.grid->size()) throw Error("policy size does not match its grid");
  for (auto c : policy.control) {
    if (c >= controls.size()) throw Error("policy references a control outside the control set");
  }
  if (label.empty()) label = "grid-policy";
  return {std::move(label), [policy, controls](const Vector& x) -> Vector {
            return controls[policy.control[locate_node(*policy.grid, x)]];
          }};
}

}  // namespace schjb
