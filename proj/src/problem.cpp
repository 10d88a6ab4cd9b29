#include "schjb/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace schjb {

ControlSet::ControlSet(std::vector<Vector> points, bool contains_zero)
    : points_(std::move(points)), contains_zero_(contains_zero) {
  if (points_.empty()) throw Error("control set must be non-empty");
  const auto k = points_.front().size();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != k) throw DimensionError("control points have mixed dimensions");
    if (!points_[i].allFinite()) throw Error("control point is not finite");
    for (std::size_t j = 0; j < i; ++j) {
      if (points_[i] == points_[j]) throw Error("control points must be pairwise distinct");
    }
  }
  if (contains_zero_) {
    bool found = false;
    for (const auto& p : points_) found = found || p.isZero(0.0);
    if (!found) throw Error("control set asserts 0 in A but the zero vector is missing");
  }
}

ControlSet ControlSet::scalar(const std::vector<double>& values) {
  std::vector<Vector> pts;
  pts.reserve(values.size());
  bool zero = false;
  for (double v : values) {
    pts.push_back(Vector::Constant(1, v));
    zero = zero || v == 0.0;
  }
  return ControlSet(std::move(pts), zero);
}

void ControlProblem::validate(const Vector& probe) const {
  if (!(discount > 0.0)) throw Error("discount must be strictly positive");
  if (!(cost_bounds.lower <= cost_bounds.upper)) throw Error("cost bounds must satisfy lower <= upper");
  if (controls.empty()) throw Error("control set must be non-empty");
  if (!drift || !diffusion || !running_cost) throw Error("problem coefficients are not set");
  if (dimension < 1 || dimension > kMaxDim || noise_dimension < 1 || noise_dimension > kMaxDim) {
    throw DimensionError("state and noise dimensions must lie in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (probe.size() != dimension) throw DimensionError("probe point has wrong dimension");
  for (const auto& a : controls.points()) {
    const Matrix s = diffusion(probe, a);
    if (s.rows() != dimension || s.cols() != noise_dimension) {
      throw DimensionError("diffusion must return a d x m matrix");
    }
    if (drift(probe, a).size() != dimension) throw DimensionError("drift must return a d-vector");
  }
}

namespace {

void check_dims(const ControlProblem& problem, const Vector& x, const Vector& p, const Matrix& Y) {
  const auto d = problem.dimension;
  if (x.size() != d || p.size() != d || Y.rows() != d || Y.cols() != d) {
    throw DimensionError("dimension mismatch: problem has d=" + std::to_string(d) + ", got x=" +
                         std::to_string(x.size()) + ", p=" + std::to_string(p.size()) + ", Y=" +
                         std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()));
  }
}

double generator_unchecked(const ControlProblem& problem, const Vector& a, const Vector& x,
                           const Vector& p, const Matrix& Ysym) {
  const Vector b = problem.drift(x, a);
  const Matrix s = problem.diffusion(x, a);
  const Matrix cov = s * s.transpose();
  return b.dot(p) + 0.5 * (cov.cwiseProduct(Ysym)).sum();
}

}  // namespace

double generator_apply(const ControlProblem& problem, const Vector& a, const Vector& x,
                       const Vector& p, const Matrix& Y) {
  check_dims(problem, x, p, Y);
  const Matrix Ysym = 0.5 * (Y + Y.transpose());
  return generator_unchecked(problem, a, x, p, Ysym);
}

double bellman_value(const ControlProblem& problem, const Vector& x, double r, const Vector& p,
                     const Matrix& Y) {
  return bellman_argmax(problem, x, r, p, Y).value;
}

ArgmaxResult bellman_argmax(const ControlProblem& problem, const Vector& x, double r,
                            const Vector& p, const Matrix& Y) {
  if (problem.controls.empty()) throw Error("empty control set");
  check_dims(problem, x, p, Y);
  const Matrix Ysym = 0.5 * (Y + Y.transpose());
  std::vector<double> values(problem.controls.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < problem.controls.size(); ++i) {
    const Vector& a = problem.controls[i];
    values[i] = problem.discount * r - problem.running_cost(x, a) -
                generator_unchecked(problem, a, x, p, Ysym);
    best = std::max(best, values[i]);
  }
  std::size_t pick = 0;
  while (values[pick] < best - kTieTolerance) ++pick;
  return {pick, best};
}

}  // namespace schjb
