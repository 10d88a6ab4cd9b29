#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "schjb/grid.hpp"
#include "schjb/problem.hpp"

namespace schjb {

/// One (node, control) row of the Markov-chain form of beta u - f - L^a u = 0:
///   u(x) = stage_cost + discount_factor * sum_n weight_n u(x_n).
struct StencilRow {
  std::size_t control = 0;     // index into the control set
  double stage_cost = 0.0;     // f / (beta + rate)
  double discount_factor = 0;  // rate / (beta + rate), in (0, 1)
  double rate = 0.0;           // total jump intensity (beta for the zero-dynamics self-loop)
  double running_cost = 0.0;   // f(x, a)
  std::vector<std::size_t> next;
  std::vector<double> weight;  // nonnegative, sums to 1
};

struct SchemeOptions {
  double tol_sigma = 1e-8;  // |sigma^T n| threshold for dropping exiting diffusion terms
};

/// Monotone upwind discretization of the state-constrained Bellman equation.
class DiscreteOperator {
 public:
  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  double discount() const { return beta_; }
  double lower_constant() const { return lower_; }
  double upper_constant() const { return upper_; }
  std::size_t control_count() const { return n_controls_; }
  double max_discount_factor() const { return gamma_max_; }
  bool monotone() const { return monotone_; }

  /// Admissible rows at a node, in control-list order.
  std::span<const StencilRow> rows(std::size_t node) const {
    return {rows_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }

  /// u(x) - T_a u(x) for one row.
  static double row_gap(const StencilRow& row, std::size_t node, std::span<const double> u);
  /// T_a u(x).
  static double row_apply(const StencilRow& row, std::span<const double> u);

  /// Re-checks nonnegative weights, unit row sums, discount factors in
  /// (0,1), and that every row references in-domain nodes only.
  bool verify_certificate(std::string* why = nullptr) const;

  friend DiscreteOperator discretize(const ControlProblem&, std::shared_ptr<const Grid>, const SchemeOptions&);

 private:
  std::shared_ptr<const Grid> grid_;
  double beta_ = 1.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
  std::size_t n_controls_ = 0;
  double gamma_max_ = 0.0;
  bool monotone_ = false;
  std::vector<std::size_t> offsets_;
  std::vector<StencilRow> rows_;
};

/// Interior nodes: drift upwinded per axis, central second differences,
/// cross terms by positive/negative-part splitting (requires diagonal
/// dominance). Nodes whose stencil would leave G keep a control only if
/// its drift stencil stays in G and |sigma^T n| <= tol_sigma, in which case
/// the exiting diffusion directions are dropped. Supported for d in {1, 2}.
DiscreteOperator discretize(const ControlProblem& problem, std::shared_ptr<const Grid> grid,
                            const SchemeOptions& options = {});

}  // namespace schjb
