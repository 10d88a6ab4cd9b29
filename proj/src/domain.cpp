#include "schjb/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace schjb {

Domain Domain::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) throw DimensionError("box bounds must share a positive dimension");
  if (!((upper - lower).array() > 0.0).all()) throw Error("box must have nonempty interior (lower < upper on every axis)");
  Domain d;
  d.kind_ = DomainKind::kBox;
  d.center_ = 0.5 * (lower + upper);
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

Domain Domain::ball(Vector center, double radius) {
  if (center.size() == 0) throw DimensionError("ball needs a positive dimension");
  if (!(radius > 0.0)) throw Error("ball radius must be positive");
  Domain d;
  d.kind_ = DomainKind::kBall;
  d.lower_ = center.array() - radius;
  d.upper_ = center.array() + radius;
  d.center_ = std::move(center);
  d.radius_ = radius;
  return d;
}

Domain Domain::smooth(LevelSet level_set) {
  if (!level_set.value || !level_set.gradient || !level_set.hessian) throw Error("level set callbacks are not set");
  if (level_set.bbox_lower.size() == 0 || level_set.bbox_lower.size() != level_set.bbox_upper.size()) {
    throw DimensionError("level set needs a bounding box");
  }
  Domain d;
  d.kind_ = DomainKind::kSmooth;
  d.lower_ = level_set.bbox_lower;
  d.upper_ = level_set.bbox_upper;
  d.center_ = 0.5 * (d.lower_ + d.upper_);
  if (!(level_set.value(d.center_) < 0.0)) throw Error("level set must be negative at the bounding-box center");
  d.level_set_ = std::move(level_set);
  return d;
}

Domain Domain::ellipse(Vector semi_axes) {
  if (!(semi_axes.array() > 0.0).all()) throw Error("ellipse semi-axes must be positive");
  const Vector inv2 = semi_axes.array().square().inverse();
  LevelSet ls;
  ls.name = "ellipse";
  ls.value = [inv2](const Vector& x) { return (x.array().square() * inv2.array()).sum() - 1.0; };
  ls.gradient = [inv2](const Vector& x) -> Vector { return 2.0 * x.array() * inv2.array(); };
  ls.hessian = [inv2](const Vector&) -> Matrix { return (2.0 * inv2).asDiagonal(); };
  ls.bbox_lower = -semi_axes;
  ls.bbox_upper = semi_axes;
  return smooth(std::move(ls));
}

Domain Domain::superellipse(Vector semi_axes, double exponent) {
  if (!(semi_axes.array() > 0.0).all()) throw Error("superellipse semi-axes must be positive");
  if (!(exponent >= 2.0)) throw Error("superellipse exponent must be >= 2 for a C2 boundary");
  const double p = exponent;
  LevelSet ls;
  ls.name = "superellipse";
  ls.value = [semi_axes, p](const Vector& x) {
    return (x.array() / semi_axes.array()).abs().pow(p).sum() - 1.0;
  };
  ls.gradient = [semi_axes, p](const Vector& x) -> Vector {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = x[i] / semi_axes[i];
      g[i] = p * std::pow(std::abs(t), p - 1.0) * (t < 0 ? -1.0 : 1.0) / semi_axes[i];
    }
    return g;
  };
  ls.hessian = [semi_axes, p](const Vector& x) -> Matrix {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = std::abs(x[i] / semi_axes[i]);
      h(i, i) = p * (p - 1.0) * std::pow(t, p - 2.0) / (semi_axes[i] * semi_axes[i]);
    }
    return h;
  };
  ls.bbox_lower = -semi_axes;
  ls.bbox_upper = semi_axes;
  ls.name = "superellipse";
  return smooth(std::move(ls));
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case DomainKind::kBox:
      os << "box lower=[" << lower_.transpose() << "] upper=[" << upper_.transpose() << "]";
      break;
    case DomainKind::kBall:
      os << "ball center=[" << center_.transpose() << "] radius=" << radius_;
      break;
    case DomainKind::kSmooth:
      os << "smooth(" << level_set_.name << ") bbox=[" << lower_.transpose() << "]..[" << upper_.transpose() << "]";
      break;
  }
  return os.str();
}

namespace {

void require_dim(const Domain& d, const Vector& x) {
  if (x.size() != d.dimension()) throw DimensionError("point dimension does not match the domain");
}

}  // namespace

double Domain::signed_distance(const Vector& x) const {
  require_dim(*this, x);
  switch (kind_) {
    case DomainKind::kBox: {
      const Vector below = (lower_ - x).cwiseMax(0.0);
      const Vector above = (x - upper_).cwiseMax(0.0);
      const double outside = (below + above).norm();
      if (outside > 0.0) return -outside;
      return std::min((x - lower_).minCoeff(), (upper_ - x).minCoeff());
    }
    case DomainKind::kBall:
      return radius_ - (x - center_).norm();
    case DomainKind::kSmooth: {
      const double gn = level_set_.gradient(x).norm();
      const double gv = level_set_.value(x);
      if (gn < kMinGradient) {
        // Critical points deep inside G only need the sign.
        if (gv < -kMinGradient) return -gv / kMinGradient;
        throw GeometryError("degenerate level set");
      }
      return -gv / gn;
    }
  }
  return 0.0;
}

PointClass Domain::contains(const Vector& x, double band) const {
  const double rho = signed_distance(x);
  if (std::abs(rho) <= band) return PointClass::kBoundary;
  return rho > 0.0 ? PointClass::kInterior : PointClass::kOutside;
}

Vector Domain::outward_normal(const Vector& x) const {
  require_dim(*this, x);
  switch (kind_) {
    case DomainKind::kBox: {
      const int d = dimension();
      Vector n = Vector::Zero(d);
      // Outside: exactly one violated axis defines a face.
      int violated = 0;
      for (int i = 0; i < d; ++i) {
        if (x[i] < lower_[i]) { n[i] = -1.0; ++violated; }
        if (x[i] > upper_[i]) { n[i] = 1.0; ++violated; }
      }
      if (violated > 1) throw GeometryError("normal undefined: point faces a box edge or corner");
      if (violated == 1) return n;
      double best = std::numeric_limits<double>::infinity();
      int axis = -1;
      double sign = 0.0;
      int ties = 0;
      for (int i = 0; i < d; ++i) {
        for (double s : {-1.0, 1.0}) {
          const double dist = s < 0 ? x[i] - lower_[i] : upper_[i] - x[i];
          if (dist < best - kEdgeTolerance) {
            best = dist;
            axis = i;
            sign = s;
            ties = 0;
          } else if (std::abs(dist - best) <= kEdgeTolerance) {
            ++ties;
          }
        }
      }
      if (ties > 0) throw GeometryError("normal undefined: point is equidistant from several box faces");
      n[axis] = sign;
      return n;
    }
    case DomainKind::kBall: {
      const Vector r = x - center_;
      const double len = r.norm();
      if (len <= kEdgeTolerance * std::max(1.0, radius_)) throw GeometryError("normal undefined at the ball center");
      return r / len;
    }
    case DomainKind::kSmooth: {
      const Vector g = level_set_.gradient(x);
      const double gn = g.norm();
      if (gn < kMinGradient) throw GeometryError("degenerate level set");
      return g / gn;
    }
  }
  return Vector();
}

Matrix Domain::hessian_distance(const Vector& x) const {
  const int d = dimension();
  switch (kind_) {
    case DomainKind::kBox:
      (void)outward_normal(x);
      return Matrix::Zero(d, d);
    case DomainKind::kBall: {
      const Vector n = outward_normal(x);
      const double len = (x - center_).norm();
      return -(Matrix::Identity(d, d) - n * n.transpose()) / len;
    }
    case DomainKind::kSmooth: {
      // Exact on the boundary: D^2 rho = -P D^2 g P / |grad g| with P the
      // tangential projector. Off the boundary this is the curvature of the
      // nearby level set, accurate to first order in rho.
      const Vector n = outward_normal(x);
      const double gn = level_set_.gradient(x).norm();
      const Matrix P = Matrix::Identity(d, d) - n * n.transpose();
      return -P * level_set_.hessian(x) * P / gn;
    }
  }
  return Matrix();
}

Vector Domain::project(const Vector& x) const {
  require_dim(*this, x);
  switch (kind_) {
    case DomainKind::kBox:
      return x.cwiseMax(lower_).cwiseMin(upper_);
    case DomainKind::kBall: {
      const Vector r = x - center_;
      const double len = r.norm();
      if (len <= radius_) return x;
      return center_ + r * (radius_ / len);
    }
    case DomainKind::kSmooth: {
      if (signed_distance(x) >= 0.0) return x;
      Vector y = x;
      for (int it = 0; it < 20; ++it) {
        const double rho = signed_distance(y);
        if (rho >= 0.0) return y;
        y += rho * outward_normal(y) * (1.0 + 1e-12);
      }
      // Newton stalled: bisect along the segment toward the bounding-box center.
      Vector in = center_, out = y;
      for (int it = 0; it < 80; ++it) {
        const Vector mid = 0.5 * (in + out);
        if (signed_distance(mid) >= 0.0) in = mid; else out = mid;
      }
      return in;
    }
  }
  return x;
}

bool Domain::origin_in_interior() const {
  return signed_distance(Vector::Zero(dimension())) > 0.0;
}

}  // namespace schjb
