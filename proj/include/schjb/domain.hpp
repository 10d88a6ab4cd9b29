#pragma once

#include <functional>
#include <string>

#include "schjb/problem.hpp"

namespace schjb {

/// Raised when a geometric quantity is undefined at the query point
/// (box edges and corners, the center of a ball, degenerate level sets).
class GeometryError : public Error {
 public:
  using Error::Error;
};

enum class DomainKind { kBox, kBall, kSmooth };

enum class PointClass { kInterior, kBoundary, kOutside };

/// Level set g with G = {g <= 0}, plus its gradient and Hessian.
struct LevelSet {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  Vector bbox_lower;
  Vector bbox_upper;
};

/// Closed constraint set G.
///
/// Box and ball use exact distance formulas. Smooth domains are described by a
/// level set g and use rho ~ -g/|grad g|, which is first-order accurate and
/// exact on the boundary itself.
class Domain {
 public:
  static Domain box(Vector lower, Vector upper);
  static Domain ball(Vector center, double radius);
  static Domain smooth(LevelSet level_set);

  /// Axis-aligned ellipse/ellipsoid sum (x_i/s_i)^2 <= 1.
  static Domain ellipse(Vector semi_axes);
  /// Superellipse sum |x_i/s_i|^p <= 1, p >= 2.
  static Domain superellipse(Vector semi_axes, double exponent);

  DomainKind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(lower_.size()); }
  /// Bounding box of G.
  const Vector& bbox_lower() const { return lower_; }
  const Vector& bbox_upper() const { return upper_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  std::string describe() const;

  /// rho(x) for x in G, minus the exterior distance outside.
  double signed_distance(const Vector& x) const;
  /// Boundary if |rho| <= band, interior if rho > band, outside otherwise.
  PointClass contains(const Vector& x, double band) const;
  bool in_closure(const Vector& x, double slack = 0.0) const { return signed_distance(x) >= -slack; }
  /// Unit outer normal n(x) = -D rho(x).
  Vector outward_normal(const Vector& x) const;
  /// D^2 rho(x). Smooth domains use the level-set Hessian projected on the
  /// tangent space, exact on the boundary.
  Matrix hessian_distance(const Vector& x) const;
  /// Closest point of G (identity inside G).
  Vector project(const Vector& x) const;
  /// True if 0 lies in the interior; the library only warns when it does not.
  bool origin_in_interior() const;

  static constexpr double kMinGradient = 1e-8;
  static constexpr double kEdgeTolerance = 1e-12;

 private:
  DomainKind kind_ = DomainKind::kBox;
  Vector lower_;
  Vector upper_;
  Vector center_;
  double radius_ = 0.0;
  LevelSet level_set_;
};

}  // namespace schjb
