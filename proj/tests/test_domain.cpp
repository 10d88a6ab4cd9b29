#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "schjb/domain.hpp"
#include "schjb/grid.hpp"
#include "schjb/viability.hpp"

using namespace schjb;
using fixtures::scalar;
using fixtures::vec;

namespace {

Domain unit_ball(int d) { return Domain::ball(Vector::Zero(d), 1.0); }
Domain square() { return Domain::box(vec({-1, -1}), vec({1, 1})); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("contains examples") {
  CHECK(unit_ball(2).contains(vec({0, 0}), 1e-9) == PointClass::kInterior);
  CHECK(unit_ball(2).contains(vec({0.6, 0.8}), 1e-9) == PointClass::kBoundary);
  CHECK(square().contains(vec({2, 0}), 1e-9) == PointClass::kOutside);
}

TEST_CASE("signed_distance examples") {
  CHECK(unit_ball(2).signed_distance(vec({0.3, 0.0})) == doctest::Approx(0.7));
  CHECK(unit_ball(3).signed_distance(vec({0.0, 0.0, 0.3})) == doctest::Approx(0.7));
  CHECK(Domain::box(scalar(-1), scalar(1)).signed_distance(scalar(0.4)) == doctest::Approx(0.6));
  CHECK(unit_ball(2).signed_distance(vec({0.0, -1.0})) == 0.0);
  CHECK(square().signed_distance(vec({2, 0})) == doctest::Approx(-1.0));
}

TEST_CASE("smooth domains: exact on the boundary, degenerate level sets rejected") {
  const Domain e = Domain::ellipse(vec({2.0, 1.0}));
  CHECK(std::abs(e.signed_distance(vec({2.0, 0.0}))) <= 1e-12);
  CHECK(std::abs(e.signed_distance(vec({0.0, -1.0}))) <= 1e-12);
  CHECK(e.signed_distance(vec({0.0, 0.0})) > 0.0);
  CHECK(e.signed_distance(vec({3.0, 0.0})) < 0.0);
  CHECK(e.origin_in_interior());

  LevelSet flat;
  flat.name = "flat-top";
  flat.value = [](const Vector& x) { return std::pow(x.squaredNorm(), 2) - 1.0; };
  flat.gradient = [](const Vector& x) -> Vector { return 4.0 * x.squaredNorm() * x; };
  flat.hessian = [](const Vector& x) -> Matrix {
    return 4.0 * x.squaredNorm() * Matrix::Identity(2, 2) + 8.0 * x * x.transpose();
  };
  flat.bbox_lower = vec({-1, -1});
  flat.bbox_upper = vec({1, 1});
  const Domain quartic = Domain::smooth(flat);
  // |grad g| vanishes at 0, where g = -1: deep inside, only the sign is needed.
  CHECK(quartic.signed_distance(vec({0, 0})) > 0.0);
  CHECK_THROWS_WITH_AS(quartic.outward_normal(vec({0, 0})), "degenerate level set", GeometryError);
}

TEST_CASE("outward_normal examples") {
  const Vector n1 = unit_ball(2).outward_normal(vec({1, 0}));
  CHECK(n1[0] == doctest::Approx(1.0));
  CHECK(n1[1] == doctest::Approx(0.0));
  const Vector n2 = unit_ball(2).outward_normal(vec({0, -1}));
  CHECK(n2[1] == doctest::Approx(-1.0));
  const Vector n3 = square().outward_normal(vec({0.99, 0.1}));
  CHECK(n3[0] == 1.0);
  CHECK(n3[1] == 0.0);
  CHECK(unit_ball(3).outward_normal(vec({0.3, -0.4, 0.5})).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("outward_normal errors") {
  CHECK_THROWS_AS(square().outward_normal(vec({1, 1})), GeometryError);
  CHECK_THROWS_AS(square().outward_normal(vec({0, 0})), GeometryError);
  CHECK_THROWS_AS(unit_ball(2).outward_normal(vec({0, 0})), GeometryError);
  CHECK_THROWS_AS(unit_ball(2).outward_normal(scalar(0.5)), DimensionError);
}

TEST_CASE("hessian_distance examples") {
  const Matrix hb = unit_ball(2).hessian_distance(vec({1, 0}));
  CHECK(hb(0, 0) == doctest::Approx(0.0));
  CHECK(hb(0, 1) == doctest::Approx(0.0));
  CHECK(hb(1, 1) == doctest::Approx(-1.0));
  CHECK(max_abs(square().hessian_distance(vec({1.0, 0.2}))) == 0.0);
  CHECK(max_abs(unit_ball(1).hessian_distance(scalar(0.7))) == 0.0);
  CHECK(max_abs(unit_ball(1).hessian_distance(scalar(-1.0))) == 0.0);
}

TEST_CASE("hessian_distance: ball formula -(I - x^ x^T)/|x| and smooth finite differences") {
  const Vector x = vec({0.3, -0.5, 0.6});
  const Vector xh = x / x.norm();
  const Matrix expect = -(Matrix::Identity(3, 3) - xh * xh.transpose()) / x.norm();
  CHECK(max_abs(unit_ball(3).hessian_distance(x) - expect) <= 1e-12);

  // A circle written as a level set matches the ball formula on the boundary.
  const Domain circle = Domain::ellipse(vec({1.0, 1.0}));
  const Vector y = vec({0.6, 0.8});
  CHECK(max_abs(circle.hessian_distance(y) - unit_ball(2).hessian_distance(y)) <= 1e-12);

  // Ellipse (x/a)^2 + (y/b)^2 <= 1 at (a, 0): curvature a/b^2 along the tangent.
  const Domain e = Domain::ellipse(vec({2.0, 1.0}));
  const Matrix he = e.hessian_distance(vec({2.0, 0.0}));
  CHECK(he(0, 0) == doctest::Approx(0.0));
  CHECK(he(1, 1) == doctest::Approx(-2.0));

  // Cross-check against central differences of the exact distance to a ball
  // written as a superellipse with p = 2.
  const Domain sq = Domain::superellipse(vec({1.0, 1.0}), 2.0);
  const Vector z = vec({std::cos(0.3), std::sin(0.3)});
  CHECK(max_abs(sq.hessian_distance(z) - unit_ball(2).hessian_distance(z)) <= 1e-9);
}

TEST_CASE("property: -D rho matches the outward normal (central differences)") {
  const double h_fd = 1e-4;
  const std::vector<Domain> domains{unit_ball(2), unit_ball(3), square(), Domain::ellipse(vec({1.5, 0.7})),
                                    Domain::superellipse(vec({1.0, 1.0}), 4.0)};
  for (const auto& dom : domains) {
    CAPTURE(dom.describe());
    const auto pts = sample_boundary(dom, 60, 0.05);
    for (const auto& b : pts) {
      // Step slightly inside so the central difference stays in the band.
      const Vector x = b - 0.01 * dom.outward_normal(b);
      Vector grad(x.size());
      for (int i = 0; i < x.size(); ++i) {
        Vector e = Vector::Zero(x.size());
        e[i] = h_fd;
        grad[i] = (dom.signed_distance(x + e) - dom.signed_distance(x - e)) / (2 * h_fd);
      }
      const Vector n = dom.outward_normal(x);
      if (dom.kind() == DomainKind::kSmooth) {
        // rho ~ -g/|grad g| is only first-order away from the boundary; check on it.
        Vector gb(b.size());
        for (int i = 0; i < b.size(); ++i) {
          Vector e = Vector::Zero(b.size());
          e[i] = h_fd;
          gb[i] = (dom.signed_distance(b + e) - dom.signed_distance(b - e)) / (2 * h_fd);
        }
        CHECK((gb + dom.outward_normal(b)).norm() <= 1e-4);
      } else {
        CHECK((grad + n).norm() <= 1e-4);
      }
    }
  }
}

TEST_CASE("property: rho is 1-Lipschitz along random segments (ball, box)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const std::vector<Domain> domains{unit_ball(2), square(), Domain::box(vec({-1, 0, 2}), vec({1, 3, 2.5}))};
  for (const auto& dom : domains) {
    const int d = dom.dimension();
    for (int k = 0; k < 500; ++k) {
      Vector x(d), y(d);
      for (int i = 0; i < d; ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
      }
      CHECK(std::abs(dom.signed_distance(x) - dom.signed_distance(y)) <= (x - y).norm() + 1e-9);
    }
  }
}

TEST_CASE("build_grid example: box [-1,1], h=0.5, band 0.25") {
  const Grid g = build_grid(Domain::box(scalar(-1), scalar(1)), 0.5, 0.25);
  REQUIRE(g.size() == 5);
  const double xs[] = {-1, -0.5, 0, 0.5, 1};
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(g.position(n)[0] == doctest::Approx(xs[n]));
    CHECK(g.is_boundary(n) == (n == 0 || n == 4));
  }
  CHECK(g.count(NodeClass::kInterior) == 3);
  CHECK(g.count(NodeClass::kBoundary) == 2);
}

TEST_CASE("build_grid errors") {
  CHECK_THROWS_WITH_AS(build_grid(unit_ball(2), 2.0), doctest::Contains("domain under-resolved"), Error);
  CHECK_THROWS_AS(build_grid(unit_ball(2), 0.0), Error);
  CHECK_THROWS_AS(build_grid(unit_ball(2), -0.1), Error);
}

TEST_CASE("grid invariants") {
  const std::vector<std::pair<Domain, double>> cases{{unit_ball(2), 0.1},
                                                     {unit_ball(2), 0.05},
                                                     {square(), 0.2},
                                                     {Domain::ellipse(vec({1.5, 0.7})), 0.1},
                                                     {Domain::box(scalar(-1), scalar(1)), 0.01},
                                                     {Domain::superellipse(vec({1.0, 0.5}), 4.0), 0.05}};
  for (const auto& [dom, h] : cases) {
    CAPTURE(dom.describe());
    CAPTURE(h);
    const Grid g = build_grid(dom, h);
    const int d = g.dimension();
    {  // partition of the lattice
      CHECK(g.count(NodeClass::kInterior) + g.count(NodeClass::kBoundary) + g.count(NodeClass::kOutside) ==
            g.lattice_size());
      CHECK(g.count(NodeClass::kInterior) + g.count(NodeClass::kBoundary) == g.size());
    }
    {  // closure rule: interior nodes have all axis neighbours in-domain
      for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.node_class(n) != NodeClass::kInterior) continue;
        for (int i = 0; i < d; ++i) {
          for (int s : {-1, 1}) {
            std::vector<int> off(d, 0);
            off[i] = s;
            CHECK(g.neighbour(n, off).has_value());
          }
        }
      }
    }
    {  // classification against rho
      for (std::size_t n = 0; n < g.size(); ++n) {
        const double rho = dom.signed_distance(g.position(n));
        CHECK(rho >= -1e-12);
        if (g.node_class(n) == NodeClass::kInterior) CHECK(rho >= h / 2);
        // Boundary nodes sit within h of the boundary; smooth domains get
        // the first-order rho approximation some room.
        if (g.is_boundary(n)) CHECK(rho <= h * (dom.kind() == DomainKind::kSmooth ? 1.5 : 1.0) + 1e-12);
      }
    }
  }
}

TEST_CASE("boundary layer shrinks with h") {
  for (double h : {0.1, 0.05, 0.025}) {
    const Grid g = build_grid(unit_ball(2), h);
    double worst = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (g.is_boundary(n)) worst = std::max(worst, unit_ball(2).signed_distance(g.position(n)));
    }
    CHECK(worst <= h + 1e-12);
  }
}

TEST_CASE("ValueFunction interpolation") {
  auto g = std::make_shared<const Grid>(build_grid(square(), 0.25));
  ValueFunction v = ValueFunction::constant(g, 0.0);
  for (std::size_t n = 0; n < g->size(); ++n) {
    const Vector x = g->position(n);
    v[n] = 1.0 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[0] * x[1];
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vector x = vec({u(rng), u(rng)});
    // Multilinear interpolation reproduces bilinear functions exactly.
    CHECK(v.interpolate(x) == doctest::Approx(1.0 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[0] * x[1]));
  }
  std::size_t fallbacks = 0;
  const auto ball = std::make_shared<const Grid>(build_grid(unit_ball(2), 0.25));
  const ValueFunction c = ValueFunction::constant(ball, 4.0);
  CHECK(c.interpolate(vec({0.99, 0.0}), &fallbacks) == doctest::Approx(4.0));
  CHECK(c.interpolate(vec({0.3, 0.3}), &fallbacks) == doctest::Approx(4.0));
}

TEST_CASE("grid mismatch is reported") {
  const Grid a = build_grid(square(), 0.25);
  const Grid b = build_grid(square(), 0.5);
  CHECK_THROWS_WITH_AS(require_same_grid(a, b), doctest::Contains("grid mismatch"), Error);
  CHECK_NOTHROW(require_same_grid(a, build_grid(square(), 0.25)));
}
