#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "schjb/problem.hpp"

using namespace schjb;
using fixtures::mat;
using fixtures::scalar;
using fixtures::vec;

TEST_CASE("generator_apply examples") {
  SUBCASE("degenerate dynamics give zero") {
    const auto p = fixtures::constant_problem(2, 1.0);
    CHECK(generator_apply(p, scalar(0), vec({0.3, -0.2}), vec({5, -7}), mat(2, 2, {1, 2, 2, 3})) == 0.0);
  }
  SUBCASE("linear term only") {
    const auto p = fixtures::control_drift_problem();
    CHECK(generator_apply(p, scalar(2), scalar(0.1), scalar(3), mat(1, 1, {0})) == doctest::Approx(6.0));
  }
  SUBCASE("second-order term: 1/2 s^2 y") {
    const auto p = fixtures::constant_problem(1, 0.0, 1.0, 0.0, 2.0);
    CHECK(generator_apply(p, scalar(0), scalar(0.0), scalar(0), mat(1, 1, {3})) == doctest::Approx(6.0));
  }
  SUBCASE("asymmetric Y is symmetrized") {
    const auto p = fixtures::covariance_problem(mat(2, 2, {1.0, 0.5, 0.5, 1.0}));
    const Matrix Y = mat(2, 2, {0.0, 2.0, 0.0, 0.0});
    const Matrix Ys = mat(2, 2, {0.0, 1.0, 1.0, 0.0});
    CHECK(generator_apply(p, scalar(0), vec({0, 0}), vec({0, 0}), Y) ==
          doctest::Approx(generator_apply(p, scalar(0), vec({0, 0}), vec({0, 0}), Ys)));
  }
}

TEST_CASE("generator_apply rejects dimension mismatches") {
  const auto p = fixtures::constant_problem(2, 1.0);
  CHECK_THROWS_AS(generator_apply(p, scalar(0), scalar(0), vec({0, 0}), Matrix::Zero(2, 2)), DimensionError);
  CHECK_THROWS_AS(generator_apply(p, scalar(0), vec({0, 0}), scalar(0), Matrix::Zero(2, 2)), DimensionError);
  CHECK_THROWS_AS(generator_apply(p, scalar(0), vec({0, 0}), vec({0, 0}), Matrix::Zero(1, 1)), DimensionError);
}

TEST_CASE("bellman_value examples") {
  SUBCASE("F = beta r - c") {
    const auto p = fixtures::constant_problem(1, 2.0);
    CHECK(bellman_value(p, scalar(0), 2.0, scalar(0), mat(1, 1, {0})) == doctest::Approx(0.0));
  }
  SUBCASE("enumeration over A = {0, 1}") {
    const auto p = fixtures::control_drift_problem();
    CHECK(bellman_value(p, scalar(0), 0.0, scalar(-1), mat(1, 1, {0})) == doctest::Approx(1.0));
  }
  SUBCASE("empty control set is an error") {
    auto p = fixtures::constant_problem(1, 2.0);
    p.controls = ControlSet{};
    CHECK_THROWS_AS(bellman_value(p, scalar(0), 0.0, scalar(0), mat(1, 1, {0})), Error);
  }
}

TEST_CASE("bellman_argmax examples") {
  SUBCASE("ties go to the first control") {
    auto p = fixtures::constant_problem(1, 1.0);
    p.controls = ControlSet::scalar({0.5, -0.5, 0.25});
    CHECK(bellman_argmax(p, scalar(0), 1.0, scalar(2), mat(1, 1, {1})).control_index == 0);
  }
  SUBCASE("A = {0, 1} picks control 1 with value 1") {
    const auto p = fixtures::control_drift_problem();
    const auto r = bellman_argmax(p, scalar(0), 0.0, scalar(-1), mat(1, 1, {0}));
    CHECK(r.control_index == 1);
    CHECK(r.value == doctest::Approx(1.0));
  }
  SUBCASE("single control") {
    const auto p = fixtures::constant_problem(1, 3.0);
    CHECK(bellman_argmax(p, scalar(0.2), 0.7, scalar(1), mat(1, 1, {2})).control_index == 0);
  }
}

namespace {

// A 2-d problem whose coefficients depend on x and a, for randomized properties.
ControlProblem rich_problem() {
  ControlProblem p;
  p.name = "rich";
  p.dimension = 2;
  p.noise_dimension = 2;
  p.drift = [](const Vector& x, const Vector& a) -> Vector { return vec({-x[0] + a[0], 0.5 * x[1] - a[0] * x[0]}); };
  p.diffusion = [](const Vector& x, const Vector& a) -> Matrix {
    return mat(2, 2, {a[0] * (1 - x[0] * x[0]), 0.1, 0.0, 0.3 + a[0] * x[1]});
  };
  p.running_cost = [](const Vector& x, const Vector& a) { return x.squaredNorm() + 0.2 * a[0] * a[0] - 0.1 * a[0]; };
  p.discount = 0.7;
  p.controls = ControlSet::scalar({-1.0, 0.0, 0.5, 1.0});
  p.cost_bounds = {-1.0, 10.0};
  return p;
}

struct Sample {
  Vector x, p;
  Matrix Y;
  double r;
};

Sample draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sample s{vec({u(rng), u(rng)}), vec({u(rng), u(rng)}), Matrix(2, 2), u(rng)};
  const double off = u(rng);
  s.Y << u(rng), off, off, u(rng);
  return s;
}

}  // namespace

TEST_CASE("property: bellman_value shifts affinely in r") {
  const auto prob = rich_problem();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    const Sample s = draw(rng);
    const double delta = 0.01 + std::abs(s.r);
    const double lhs = bellman_value(prob, s.x, s.r + delta, s.p, s.Y) - bellman_value(prob, s.x, s.r, s.p, s.Y);
    CHECK(lhs == doctest::Approx(prob.discount * delta).epsilon(1e-12));
  }
}

TEST_CASE("property: sup dominates every sampled control") {
  const auto prob = rich_problem();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Sample s = draw(rng);
    const double F = bellman_value(prob, s.x, s.r, s.p, s.Y);
    for (const auto& a : prob.controls.points()) {
      const double member = prob.discount * s.r - prob.running_cost(s.x, a) - generator_apply(prob, a, s.x, s.p, s.Y);
      CHECK(F >= member);
    }
  }
}

TEST_CASE("property: generator_apply is linear in p and Y") {
  const auto prob = rich_problem();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Sample s1 = draw(rng), s2 = draw(rng);
    const double alpha = u(rng), gamma = u(rng);
    const Vector& a = prob.controls[k % prob.controls.size()];
    const Matrix Ymix = alpha * s1.Y + gamma * s2.Y;
    const Vector pmix = alpha * s1.p + gamma * s2.p;
    const double lhs = generator_apply(prob, a, s1.x, pmix, Ymix);
    const double rhs = alpha * generator_apply(prob, a, s1.x, s1.p, s1.Y) + gamma * generator_apply(prob, a, s1.x, s2.p, s2.Y);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("property: bellman_value is monotone in r and in Y (Loewner order)") {
  const auto prob = rich_problem();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Sample s = draw(rng);
    CHECK(bellman_value(prob, s.x, s.r + u(rng), s.p, s.Y) >= bellman_value(prob, s.x, s.r, s.p, s.Y));
    const Vector v = vec({u(rng) - 0.5, u(rng) - 0.5});
    const Matrix bigger = s.Y + v * v.transpose();
    CHECK(bellman_value(prob, s.x, s.r, s.p, bigger) <= bellman_value(prob, s.x, s.r, s.p, s.Y) + 1e-12);
  }
}

TEST_CASE("property: bellman_argmax is deterministic and agrees with bellman_value") {
  const auto prob = rich_problem();
  std::mt19937_64 rng(19);
  for (int k = 0; k < 100; ++k) {
    const Sample s = draw(rng);
    const auto a1 = bellman_argmax(prob, s.x, s.r, s.p, s.Y);
    const auto a2 = bellman_argmax(prob, s.x, s.r, s.p, s.Y);
    CHECK(a1.control_index == a2.control_index);
    CHECK(a1.value == a2.value);
    CHECK(a1.value == doctest::Approx(bellman_value(prob, s.x, s.r, s.p, s.Y)).epsilon(1e-12));
  }
}

TEST_CASE("ControlSet validation") {
  CHECK_THROWS_AS(ControlSet({}, false), Error);
  CHECK_THROWS_AS(ControlSet::scalar({0.0, 1.0, 0.0}), Error);
  CHECK_THROWS_AS(ControlSet({scalar(1.0), vec({0.0, 1.0})}, false), DimensionError);
  CHECK_THROWS_AS(ControlSet({scalar(1.0)}, true), Error);
  const ControlSet ok({scalar(1.0), scalar(0.0)}, true);
  CHECK(ok.contains_zero());
  CHECK(ok.size() == 2);
}

TEST_CASE("ControlProblem validation") {
  auto p = fixtures::constant_problem(2, 1.0);
  CHECK_NOTHROW(p.validate(vec({0, 0})));
  SUBCASE("discount must be positive") {
    p.discount = 0.0;
    CHECK_THROWS_AS(p.validate(vec({0, 0})), Error);
  }
  SUBCASE("cost bounds ordered") {
    p.cost_bounds = {2.0, 1.0};
    CHECK_THROWS_AS(p.validate(vec({0, 0})), Error);
  }
  SUBCASE("diffusion shape") {
    p.diffusion = [](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(2, 3); };
    CHECK_THROWS_AS(p.validate(vec({0, 0})), DimensionError);
  }
}

TEST_CASE("catalog cost bounds hold on samples") {
  for (const auto& name : fixtures::viable_catalog()) {
    CAPTURE(name);
    CHECK(cost_bound_violation(fixtures::catalog(name)) <= 1e-12);
  }
  CHECK(cost_bound_violation(fixtures::catalog("outward-drift")) <= 1e-12);
}
