#pragma once

#include <cmath>
#include <vector>

#include "schjb/catalog.hpp"
#include "schjb/problem.hpp"

namespace fixtures {

using schjb::ControlProblem;
using schjb::ControlSet;
using schjb::Matrix;
using schjb::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vector scalar(double x) { return vec({x}); }

inline Matrix mat(int rows, int cols, std::initializer_list<double> v) {
  Matrix out(rows, cols);
  auto it = v.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = *it++;
  return out;
}

/// d-dimensional problem with constant drift, constant sigma and constant cost.
inline ControlProblem constant_problem(int d, double c, double beta = 1.0, double drift = 0.0, double sigma = 0.0) {
  ControlProblem p;
  p.name = "fixture";
  p.dimension = d;
  p.noise_dimension = d;
  p.drift = [d, drift](const Vector&, const Vector&) -> Vector { return Vector::Constant(d, drift); };
  p.diffusion = [d, sigma](const Vector&, const Vector&) -> Matrix { return sigma * Matrix::Identity(d, d); };
  p.running_cost = [c](const Vector&, const Vector&) { return c; };
  p.discount = beta;
  p.controls = ControlSet::scalar({0.0});
  p.cost_bounds = {c, c};
  return p;
}

/// d=1, b(x,a)=a, sigma=0, f=0 with A={0,1}.
inline ControlProblem control_drift_problem() {
  ControlProblem p = constant_problem(1, 0.0);
  p.drift = [](const Vector&, const Vector& a) -> Vector { return a; };
  p.controls = ControlSet::scalar({0.0, 1.0});
  return p;
}

/// d=2, b=0, constant 2x2 diffusion sigma (sigma sigma^T = cov when sigma = chol(cov)).
inline ControlProblem covariance_problem(const Matrix& cov) {
  ControlProblem p = constant_problem(2, 1.0);
  const Matrix s = Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(cov)).matrixL().toDenseMatrix();
  p.diffusion = [s](const Vector&, const Vector&) -> Matrix { return s; };
  return p;
}

inline schjb::ProblemInstance catalog(const std::string& name, schjb::ParamMap params = {}) {
  return schjb::make_problem(name, params);
}

/// Viable catalog entries used by "every catalog problem" properties.
inline std::vector<std::string> viable_catalog() {
  return {"constant-cost", "deterministic-decay", "degenerate-ball", "coarse-mdp"};
}

}  // namespace fixtures
