#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "schjb/domain.hpp"

namespace schjb {

enum class NodeClass : std::uint8_t { kInterior, kBoundary, kOutside };

const char* to_string(NodeClass c);

/// Cartesian lattice over the bounding box of G with every node classified as
/// interior, boundary or outside. In-domain nodes (interior + boundary) get a
/// dense index used by value functions and policies.
class Grid {
 public:
  int dimension() const { return static_cast<int>(counts_.size()); }
  double spacing() const { return h_; }
  double boundary_band() const { return band_; }
  const std::vector<int>& counts() const { return counts_; }
  const Vector& origin() const { return origin_; }
  const Domain& domain() const { return *domain_; }

  std::size_t lattice_size() const { return classes_.size(); }
  std::size_t size() const { return in_domain_.size(); }  // in-domain nodes

  NodeClass lattice_class(std::size_t flat) const { return classes_[flat]; }
  /// Dense in-domain index of a lattice node, or nullopt if outside.
  std::optional<std::size_t> node_of(std::size_t flat) const;
  std::size_t flat_of(std::size_t node) const { return in_domain_[node]; }
  NodeClass node_class(std::size_t node) const { return classes_[in_domain_[node]]; }
  bool is_boundary(std::size_t node) const { return node_class(node) == NodeClass::kBoundary; }

  std::vector<int> lattice_coords(std::size_t flat) const;
  std::optional<std::size_t> flat_index(const std::vector<int>& coords) const;
  Vector lattice_point(const std::vector<int>& coords) const;
  Vector position(std::size_t node) const { return positions_[node]; }

  /// In-domain node reached from `node` by the integer offset, if any.
  std::optional<std::size_t> neighbour(std::size_t node, const std::vector<int>& offset) const;

  std::size_t count(NodeClass c) const;
  /// In-domain node closest to x (brute force).
  std::size_t nearest_node(const Vector& x) const;

  bool same_layout(const Grid& other) const;

  friend Grid build_grid(const Domain& domain, double h, std::optional<double> boundary_band);

 private:
  std::shared_ptr<const Domain> domain_;
  double h_ = 0.0;
  double band_ = 0.0;
  Vector origin_;
  std::vector<int> counts_;
  std::vector<NodeClass> classes_;
  std::vector<std::int64_t> node_index_;  // flat -> dense, -1 if outside
  std::vector<std::size_t> in_domain_;    // dense -> flat
  std::vector<Vector> positions_;
};

/// Lattice with spacing h centered on the bounding box of G. Nodes with
/// rho >= band are interior, 0 <= rho < band boundary, rho < 0 outside;
/// interior nodes with an out-of-domain axis neighbour become boundary.
/// band defaults to h. Throws "domain under-resolved" if no node is interior.
Grid build_grid(const Domain& domain, double h, std::optional<double> boundary_band = std::nullopt);

/// Nodal values on the in-domain nodes of a grid.
struct ValueFunction {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;

  static ValueFunction constant(std::shared_ptr<const Grid> grid, double c);

  double operator[](std::size_t node) const { return values[node]; }
  double& operator[](std::size_t node) { return values[node]; }
  std::size_t size() const { return values.size(); }

  /// Multilinear interpolation. Cell corners outside G are dropped and the
  /// remaining weights renormalized; with no usable corner the nearest
  /// in-domain node is used and `fallbacks` (if given) is incremented.
  double interpolate(const Vector& x, std::size_t* fallbacks = nullptr) const;
};

/// Per-node control index into the problem's control set.
struct Policy {
  std::shared_ptr<const Grid> grid;
  std::vector<std::size_t> control;
};

/// Throws `Error` if the two grids do not share a layout.
void require_same_grid(const Grid& a, const Grid& b);

}  // namespace schjb
