#include "schjb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace schjb {

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::kInterior: return "interior";
    case NodeClass::kBoundary: return "boundary";
    case NodeClass::kOutside: return "outside";
  }
  return "?";
}

std::optional<std::size_t> Grid::node_of(std::size_t flat) const {
  const auto k = node_index_[flat];
  if (k < 0) return std::nullopt;
  return static_cast<std::size_t>(k);
}

std::vector<int> Grid::lattice_coords(std::size_t flat) const {
  std::vector<int> c(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    c[i] = static_cast<int>(flat % counts_[i]);
    flat /= counts_[i];
  }
  return c;
}

std::optional<std::size_t> Grid::flat_index(const std::vector<int>& coords) const {
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (coords[i] < 0 || coords[i] >= counts_[i]) return std::nullopt;
    flat += stride * static_cast<std::size_t>(coords[i]);
    stride *= counts_[i];
  }
  return flat;
}

Vector Grid::lattice_point(const std::vector<int>& coords) const {
  Vector x(dimension());
  for (int i = 0; i < dimension(); ++i) x[i] = origin_[i] + h_ * coords[i];
  return x;
}

std::optional<std::size_t> Grid::neighbour(std::size_t node, const std::vector<int>& offset) const {
  auto c = lattice_coords(in_domain_[node]);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += offset[i];
  const auto flat = flat_index(c);
  if (!flat) return std::nullopt;
  return node_of(*flat);
}

std::size_t Grid::count(NodeClass c) const {
  std::size_t n = 0;
  for (auto k : classes_) n += (k == c);
  return n;
}

std::size_t Grid::nearest_node(const Vector& x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    const double d = (positions_[k] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

bool Grid::same_layout(const Grid& other) const {
  return counts_ == other.counts_ && h_ == other.h_ && origin_ == other.origin_ && classes_ == other.classes_;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (&a != &b && !a.same_layout(b)) throw Error("grid mismatch: functions live on different grids");
}

Grid build_grid(const Domain& domain, double h, std::optional<double> boundary_band) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("grid spacing h must be positive");
  const double band = boundary_band.value_or(h);
  if (!(band >= 0.0)) throw Error("boundary band must be nonnegative");
  const int d = domain.dimension();

  Grid g;
  g.domain_ = std::make_shared<const Domain>(domain);
  g.h_ = h;
  g.band_ = band;
  g.origin_.resize(d);
  g.counts_.resize(d);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    const double range = domain.bbox_upper()[i] - domain.bbox_lower()[i];
    const int n = static_cast<int>(std::floor(range / h + 1e-9)) + 1;
    g.counts_[i] = n;
    g.origin_[i] = domain.bbox_lower()[i] + 0.5 * (range - (n - 1) * h);
    total *= static_cast<std::size_t>(n);
  }

  // Node coordinates within this slack of the boundary count as on it.
  const double snap = 1e-10 * h;
  g.classes_.assign(total, NodeClass::kOutside);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const double rho = domain.signed_distance(g.lattice_point(g.lattice_coords(flat)));
    if (rho >= band - snap && rho > snap) {
      g.classes_[flat] = NodeClass::kInterior;
    } else if (rho >= -snap) {
      g.classes_[flat] = NodeClass::kBoundary;
    }
  }

  // Closure: interior nodes need all 2d axis neighbours in-domain.
  std::vector<NodeClass> closed = g.classes_;
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (g.classes_[flat] != NodeClass::kInterior) continue;
    auto c = g.lattice_coords(flat);
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) {
      for (int s : {-1, 1}) {
        c[i] += s;
        const auto nb = g.flat_index(c);
        c[i] -= s;
        if (!nb || g.classes_[*nb] == NodeClass::kOutside) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) closed[flat] = NodeClass::kBoundary;
  }
  g.classes_ = std::move(closed);

  g.node_index_.assign(total, -1);
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (g.classes_[flat] == NodeClass::kOutside) continue;
    g.node_index_[flat] = static_cast<std::int64_t>(g.in_domain_.size());
    g.in_domain_.push_back(flat);
    g.positions_.push_back(g.lattice_point(g.lattice_coords(flat)));
  }
  if (g.count(NodeClass::kInterior) == 0) throw Error("domain under-resolved: grid has no interior nodes");
  return g;
}

ValueFunction ValueFunction::constant(std::shared_ptr<const Grid> grid, double c) {
  ValueFunction v;
  v.values.assign(grid->size(), c);
  v.grid = std::move(grid);
  return v;
}

double ValueFunction::interpolate(const Vector& x, std::size_t* fallbacks) const {
  const Grid& g = *grid;
  const int d = g.dimension();
  std::vector<int> base(d);
  std::vector<double> frac(d);
  for (int i = 0; i < d; ++i) {
    const double t = (x[i] - g.origin()[i]) / g.spacing();
    int b = static_cast<int>(std::floor(t));
    b = std::clamp(b, 0, std::max(0, g.counts()[i] - 2));
    base[i] = b;
    frac[i] = std::clamp(t - b, 0.0, 1.0);
    if (g.counts()[i] == 1) frac[i] = 0.0;
  }
  double acc = 0.0;
  double wsum = 0.0;
  std::vector<int> c(d);
  for (int mask = 0; mask < (1 << d); ++mask) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      const int bit = (mask >> i) & 1;
      c[i] = base[i] + bit;
      w *= bit ? frac[i] : 1.0 - frac[i];
    }
    if (w == 0.0) continue;
    const auto flat = g.flat_index(c);
    if (!flat) continue;
    const auto node = g.node_of(*flat);
    if (!node) continue;
    acc += w * values[*node];
    wsum += w;
  }
  if (wsum > 1e-12) return acc / wsum;
  if (fallbacks) ++*fallbacks;
  return values[g.nearest_node(x)];
}

}  // namespace schjb
