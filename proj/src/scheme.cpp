#include "schjb/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace schjb {

double DiscreteOperator::row_apply(const StencilRow& row, std::span<const double> u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < row.next.size(); ++k) acc += row.weight[k] * u[row.next[k]];
  return row.stage_cost + row.discount_factor * acc;
}

double DiscreteOperator::row_gap(const StencilRow& row, std::size_t node, std::span<const double> u) {
  return u[node] - row_apply(row, u);
}

bool DiscreteOperator::verify_certificate(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (std::size_t node = 0; node + 1 < offsets_.size(); ++node) {
    const auto r = rows(node);
    if (r.empty()) return fail("node " + std::to_string(node) + " has no admissible control");
    for (const auto& row : r) {
      if (!(row.discount_factor > 0.0 && row.discount_factor < 1.0)) return fail("discount factor outside (0,1)");
      double sum = 0.0;
      for (std::size_t k = 0; k < row.next.size(); ++k) {
        if (row.weight[k] < 0.0) return fail("negative stencil weight at node " + std::to_string(node));
        if (row.next[k] >= grid_->size()) return fail("stencil references a node outside G");
        sum += row.weight[k];
      }
      if (std::abs(sum - 1.0) > 1e-12) return fail("stencil weights do not sum to 1");
    }
  }
  return true;
}

namespace {

std::string where(const Vector& x, std::size_t control) {
  std::ostringstream os;
  os.precision(10);
  os << "node x=(" << x.transpose() << ") control #" << control;
  return os.str();
}

}  // namespace

DiscreteOperator discretize(const ControlProblem& problem, std::shared_ptr<const Grid> grid,
                            const SchemeOptions& options) {
  const Grid& g = *grid;
  const int d = g.dimension();
  if (d != problem.dimension) throw DimensionError("grid and problem dimensions differ");
  if (d > 2) throw Error("the HJB solver supports d in {1, 2}; d=" + std::to_string(d) + " is simulation-only");
  const double h = g.spacing();
  const double beta = problem.discount;
  const Domain& domain = g.domain();

  DiscreteOperator op;
  op.grid_ = grid;
  op.beta_ = beta;
  op.lower_ = problem.lower_constant();
  op.upper_ = problem.upper_constant();
  op.n_controls_ = problem.controls.size();
  op.offsets_.reserve(g.size() + 1);
  op.offsets_.push_back(0);

  std::vector<int> offset(d, 0);
  auto nb = [&](std::size_t node, std::initializer_list<std::pair<int, int>> moves) {
    std::fill(offset.begin(), offset.end(), 0);
    for (auto [axis, step] : moves) offset[axis] += step;
    return g.neighbour(node, offset);
  };

  for (std::size_t node = 0; node < g.size(); ++node) {
    const Vector x = g.position(node);
    const std::size_t first_row = op.rows_.size();

    for (std::size_t ci = 0; ci < problem.controls.size(); ++ci) {
      const Vector& a = problem.controls[ci];
      const Vector b = problem.drift(x, a);
      const Matrix s = problem.diffusion(x, a);
      const Matrix cov = s * s.transpose();
      const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
      const double drift_eps = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());

      std::map<std::size_t, double> rates;
      bool admissible = true;

      // Drift: upwind neighbour must be in-domain.
      for (int i = 0; i < d && admissible; ++i) {
        if (std::abs(b[i]) <= drift_eps) continue;
        const int step = b[i] > 0 ? 1 : -1;
        const auto n = nb(node, {{i, step}});
        if (!n) {
          admissible = false;
          break;
        }
        rates[*n] += std::abs(b[i]) / h;
      }
      if (!admissible) continue;

      // Diffusion: axes with both neighbours, pairs with both diagonal neighbours.
      std::vector<bool> axis_ok(d, true);
      bool exits = false;
      for (int i = 0; i < d; ++i) {
        if (cov(i, i) <= 1e-15 * scale) continue;
        if (!nb(node, {{i, 1}}) || !nb(node, {{i, -1}})) {
          axis_ok[i] = false;
          exits = true;
        }
      }
      std::vector<std::vector<bool>> pair_ok(d, std::vector<bool>(d, false));
      for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
          const double c = cov(i, j);
          if (std::abs(c) <= 1e-15 * scale) continue;
          const int sj = c > 0 ? 1 : -1;
          const bool ok = axis_ok[i] && axis_ok[j] && nb(node, {{i, 1}, {j, sj}}) && nb(node, {{i, -1}, {j, -sj}});
          pair_ok[i][j] = pair_ok[j][i] = ok;
          if (!ok) exits = true;
        }
      }
      if (exits) {
        double tangency;
        try {
          tangency = (s.transpose() * domain.outward_normal(x)).norm();
        } catch (const GeometryError&) {
          tangency = s.norm();  // edges/corners: require the full matrix to vanish
        }
        if (tangency > options.tol_sigma) continue;
      }

      for (int i = 0; i < d; ++i) {
        if (!axis_ok[i] || cov(i, i) <= 1e-15 * scale) continue;
        double diag = 0.5 * cov(i, i);
        int worst = -1;
        for (int j = 0; j < d; ++j) {
          if (j == i || !pair_ok[i][j]) continue;
          diag -= 0.5 * std::abs(cov(i, j));
          if (worst < 0 || std::abs(cov(i, j)) > std::abs(cov(i, worst))) worst = j;
        }
        if (diag < -1e-12 * scale) {
          throw Error("monotonicity violated at " + where(x, ci) + ", axis pair (" + std::to_string(i) + "," +
                      std::to_string(worst) + "): |a_ij| exceeds the diagonal");
        }
        diag = std::max(diag, 0.0) / (h * h);
        if (diag > 0.0) {
          rates[*nb(node, {{i, 1}})] += diag;
          rates[*nb(node, {{i, -1}})] += diag;
        }
      }
      for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
          if (!pair_ok[i][j]) continue;
          const double c = cov(i, j);
          const int sj = c > 0 ? 1 : -1;
          const double w = 0.5 * std::abs(c) / (h * h);
          rates[*nb(node, {{i, 1}, {j, sj}})] += w;
          rates[*nb(node, {{i, -1}, {j, -sj}})] += w;
        }
      }

      StencilRow row;
      row.control = ci;
      row.running_cost = problem.running_cost(x, a);
      double total = 0.0;
      for (auto& [n, r] : rates) total += r;
      if (total <= 0.0) {
        // Zero dynamics: self-loop with pseudo-rate beta keeps u = f/beta.
        row.rate = beta;
        row.next = {node};
        row.weight = {1.0};
      } else {
        row.rate = total;
        for (auto& [n, r] : rates) {
          row.next.push_back(n);
          row.weight.push_back(r / total);
        }
      }
      row.discount_factor = row.rate / (beta + row.rate);
      row.stage_cost = row.running_cost / (beta + row.rate);
      op.gamma_max_ = std::max(op.gamma_max_, row.discount_factor);
      op.rows_.push_back(std::move(row));
    }

    if (op.rows_.size() == first_row) {
      std::ostringstream os;
      os.precision(10);
      os << "boundary node has no admissible control stencil: node x=(" << x.transpose() << ") ("
         << to_string(g.node_class(node)) << ")";
      throw Error(os.str());
    }
    op.offsets_.push_back(op.rows_.size());
  }

  std::string why;
  op.monotone_ = op.verify_certificate(&why);
  if (!op.monotone_) throw Error("monotonicity certificate failed: " + why);
  return op;
}

}  // namespace schjb
