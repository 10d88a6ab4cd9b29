#include "schjb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace schjb {

const char* to_string(ViolationClass c) {
  return c == ViolationClass::kInteriorSub ? "interior-sub" : "everywhere-super";
}

ViolationReport check_subsolution(const ValueFunction& u, const DiscreteOperator& op, double tol,
                                  double required_fraction) {
  const auto r = bellman_residual(u, op);
  const Grid& g = op.grid();
  ViolationReport rep;
  rep.check = "subsolution";
  rep.tolerance = tol;
  rep.required_fraction = required_fraction;
  rep.worst_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.is_boundary(node)) continue;
    ++rep.checked;
    rep.worst_residual = std::max(rep.worst_residual, r[node]);
    if (r[node] > tol) rep.violations.push_back({node, g.position(node), r[node], ViolationClass::kInteriorSub});
  }
  return rep;
}

ViolationReport check_supersolution(const ValueFunction& u, const DiscreteOperator& op, double tol,
                                    double required_fraction) {
  const auto r = bellman_residual(u, op);
  const Grid& g = op.grid();
  ViolationReport rep;
  rep.check = "supersolution";
  rep.tolerance = tol;
  rep.required_fraction = required_fraction;
  rep.worst_residual = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.size(); ++node) {
    ++rep.checked;
    rep.worst_residual = std::min(rep.worst_residual, r[node]);
    if (r[node] < -tol) rep.violations.push_back({node, g.position(node), r[node], ViolationClass::kEverywhereSuper});
  }
  return rep;
}

SandwichReport check_sandwich(const ValueFunction& u_minus, const ValueFunction& v, const ValueFunction& w_plus,
                              double tol) {
  require_same_grid(*u_minus.grid, *v.grid);
  require_same_grid(*w_plus.grid, *v.grid);
  const Grid& g = *v.grid;
  SandwichReport rep;
  rep.tolerance = tol;
  rep.worst_lower_gap = -std::numeric_limits<double>::infinity();
  rep.worst_upper_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double lower = u_minus[node] - v[node];
    if (lower > rep.worst_lower_gap) {
      rep.worst_lower_gap = lower;
      rep.worst_lower_node = node;
    }
    rep.lower_failures += lower > tol;
    if (g.is_boundary(node)) continue;
    const double upper = v[node] - w_plus[node];
    if (upper > rep.worst_upper_gap) {
      rep.worst_upper_gap = upper;
      rep.worst_upper_node = node;
    }
    rep.upper_failures += upper > tol;
  }
  rep.passed = rep.lower_failures == 0 && rep.upper_failures == 0;
  return rep;
}

ComparisonReport check_comparison(const ValueFunction& sub, const ValueFunction& super, double tol) {
  require_same_grid(*sub.grid, *super.grid);
  ComparisonReport rep;
  rep.tolerance = tol;
  rep.margin = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < sub.size(); ++node) {
    const double m = super[node] - sub[node];
    if (m < rep.margin) {
      rep.margin = m;
      rep.worst_node = node;
    }
    rep.failures += m < -tol;
  }
  rep.passed = rep.failures == 0;
  return rep;
}

ValueFunction boundary_limsup_extend(const ValueFunction& w) {
  const Grid& g = *w.grid;
  const int d = g.dimension();
  ValueFunction out = w;
  std::vector<int> offset(d);
  int neighbourhood = 1;
  for (int i = 0; i < d; ++i) neighbourhood *= 3;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.is_boundary(node)) continue;
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (int code = 0; code < neighbourhood; ++code) {
      int c = code;
      bool centre = true;
      for (int i = 0; i < d; ++i) {
        offset[i] = c % 3 - 1;
        c /= 3;
        centre = centre && offset[i] == 0;
      }
      if (centre) continue;
      const auto nb = g.neighbour(node, offset);
      if (!nb || g.is_boundary(*nb)) continue;
      best = std::max(best, w[*nb]);
      found = true;
    }
    if (!found) throw Error("under-resolved: boundary node has no interior neighbour");
    out[node] = best;
  }
  return out;
}

}  // namespace schjb
