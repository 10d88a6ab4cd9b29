#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace schjb {

/// Largest supported state, noise and control dimension. Small vectors live on
/// the stack, which keeps the Monte Carlo inner loop free of allocations.
inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for dimension mismatches and malformed inputs to the core math.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Finite sample of the compact control set A.
class ControlSet {
 public:
  ControlSet() = default;
  /// Throws if `points` is empty, has mixed dimensions, contains duplicates,
  /// or if `contains_zero` is asserted without the zero vector present.
  ControlSet(std::vector<Vector> points, bool contains_zero);

  /// Convenience for scalar controls.
  static ControlSet scalar(const std::vector<double>& values);

  const std::vector<Vector>& points() const { return points_; }
  const Vector& operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool contains_zero() const { return contains_zero_; }
  int control_dim() const { return points_.empty() ? 0 : static_cast<int>(points_.front().size()); }

 private:
  std::vector<Vector> points_;
  bool contains_zero_ = false;
};

struct CostBounds {
  double lower = 0.0;  // f_lower = inf f over G x A
  double upper = 0.0;  // f_upper = sup f over G x A
};

using DriftFn = std::function<Vector(const Vector& x, const Vector& a)>;
using DiffusionFn = std::function<Matrix(const Vector& x, const Vector& a)>;
using CostFn = std::function<double(const Vector& x, const Vector& a)>;

/// Coefficients of the controlled diffusion dX = b dt + sigma dW together
/// with the discounted running cost. Immutable once built.
struct ControlProblem {
  std::string name;
  int dimension = 1;        // d
  int noise_dimension = 1;  // m
  DriftFn drift;
  DiffusionFn diffusion;
  CostFn running_cost;
  double discount = 1.0;  // beta, strictly positive
  ControlSet controls;
  std::optional<double> lipschitz_bound;  // K; documentation only
  CostBounds cost_bounds;

  /// Checks discount > 0, ordered cost bounds, non-empty controls and the
  /// diffusion shape at `probe`. Throws `Error` on failure.
  void validate(const Vector& probe) const;

  double lower_constant() const { return cost_bounds.lower / discount; }
  double upper_constant() const { return cost_bounds.upper / discount; }
};

/// L^a at (x, p, Y): b(x,a).p + 1/2 Tr(sigma sigma^T Y), Y symmetrized first.
double generator_apply(const ControlProblem& problem, const Vector& a, const Vector& x,
                       const Vector& p, const Matrix& Y);

/// F(x, r, p, Y) = max over the control sample of beta r - f - L^a.
double bellman_value(const ControlProblem& problem, const Vector& x, double r, const Vector& p,
                     const Matrix& Y);

struct ArgmaxResult {
  std::size_t control_index = 0;
  double value = 0.0;
};

inline constexpr double kTieTolerance = 1e-12;

/// First control in list order attaining the max of F within kTieTolerance.
ArgmaxResult bellman_argmax(const ControlProblem& problem, const Vector& x, double r,
                            const Vector& p, const Matrix& Y);

}  // namespace schjb
