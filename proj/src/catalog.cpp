#include "schjb/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "schjb/viability.hpp"

namespace schjb {

namespace {

int dimension(ParamReader& p, const std::string& key, int fallback) {
  return static_cast<int>(p.integer(key, fallback, kMaxDim));
}

Vector to_vector(const std::vector<double>& v) {
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw DimensionError("vectors must have between 1 and " + std::to_string(kMaxDim) + " entries");
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ControlSet scalar_controls(const std::vector<double>& values, const std::string& key) {
  if (values.empty()) throw ConfigError(key + " must list at least one control");
  const bool has_zero = std::find(values.begin(), values.end(), 0.0) != values.end();
  std::vector<Vector> points;
  for (double a : values) points.push_back(Vector::Constant(1, a));
  return ControlSet(std::move(points), has_zero);
}

double max_abs(const ControlSet& a) {
  double m = 0.0;
  for (const auto& p : a.points()) m = std::max(m, p.squaredNorm());
  return m;
}

double min_abs(const ControlSet& a) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : a.points()) m = std::min(m, p.squaredNorm());
  return m;
}

Domain unit_ball(int d) { return Domain::ball(Vector::Zero(d), 1.0); }

ProblemInstance constant_cost(ParamReader& p, const std::optional<DomainSpec>& domain) {
  const double c = p.number("c", 1.0);
  const double beta = p.positive("beta", 1.0);
  const int d = dimension(p, "dimension", 1);
  ProblemInstance inst{ControlProblem{}, domain ? make_domain(*domain) : Domain::box(-Vector::Ones(d), Vector::Ones(d)),
                       std::nullopt, true};
  const int dim = inst.domain.dimension();
  if (domain && p.has("dimension") && d != dim) throw ConfigError(p.path("dimension") + " disagrees with the domain");
  ControlProblem& pr = inst.problem;
  pr.name = "constant-cost";
  pr.dimension = dim;
  pr.noise_dimension = 1;
  pr.drift = [dim](const Vector&, const Vector&) -> Vector { return Vector::Zero(dim); };
  pr.diffusion = [dim](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(dim, 1); };
  pr.running_cost = [c](const Vector&, const Vector&) { return c; };
  pr.discount = beta;
  pr.controls = ControlSet::scalar({0.0});
  pr.lipschitz_bound = 0.0;
  pr.cost_bounds = {c, c};
  return inst;
}

ProblemInstance deterministic_decay(ParamReader& p) {
  const double L = p.positive("L", 1.0);
  const double beta = p.positive("beta", 1.0);
  ProblemInstance inst{ControlProblem{}, Domain::box(Vector::Constant(1, -L), Vector::Constant(1, L)), std::nullopt,
                       true};
  ControlProblem& pr = inst.problem;
  pr.name = "deterministic-decay";
  pr.dimension = 1;
  pr.noise_dimension = 1;
  pr.drift = [](const Vector& x, const Vector&) -> Vector { return -x; };
  pr.diffusion = [](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
  pr.running_cost = [](const Vector& x, const Vector&) { return x[0] * x[0]; };
  pr.discount = beta;
  pr.controls = ControlSet::scalar({0.0});
  pr.lipschitz_bound = 1.0;
  pr.cost_bounds = {0.0, L * L};
  return inst;
}

ProblemInstance degenerate_ball(ParamReader& p) {
  const int d = dimension(p, "dimension", 2);
  const double lambda = p.number("lambda", 0.1);
  if (lambda < 0.0) throw ConfigError(p.path("lambda") + " must be nonnegative");
  const double beta = p.positive("beta", 1.0);
  const auto controls = p.list("controls", {0.0, 0.5, 1.0});
  for (double a : controls) {
    if (a < 0.0 || a > 1.0) throw ConfigError(p.path("controls") + " must lie in [0, 1]");
  }
  ProblemInstance inst{ControlProblem{}, unit_ball(d), std::nullopt, true};
  ControlProblem& pr = inst.problem;
  pr.name = "degenerate-ball";
  pr.dimension = d;
  pr.noise_dimension = d;
  pr.drift = [](const Vector& x, const Vector&) -> Vector { return -x; };
  pr.diffusion = [d](const Vector& x, const Vector& a) -> Matrix {
    return Matrix::Identity(d, d) * (a[0] * (1.0 - x.squaredNorm()));
  };
  pr.running_cost = [lambda](const Vector& x, const Vector& a) { return x.squaredNorm() + lambda * a.squaredNorm(); };
  pr.discount = beta;
  pr.controls = scalar_controls(controls, p.path("controls"));
  pr.lipschitz_bound = 3.0;
  pr.cost_bounds = {lambda * min_abs(pr.controls), 1.0 + lambda * max_abs(pr.controls)};
  return inst;
}

ProblemInstance outward_drift(ParamReader& p) {
  const int d = dimension(p, "dimension", 2);
  const double beta = p.positive("beta", 1.0);
  const auto controls = p.list("controls", {0.0, 1.0});
  for (double a : controls) {
    if (a < 0.0) throw ConfigError(p.path("controls") + " must be nonnegative");
  }
  ProblemInstance inst{ControlProblem{}, unit_ball(d), std::nullopt, false};
  ControlProblem& pr = inst.problem;
  pr.name = "outward-drift";
  pr.dimension = d;
  pr.noise_dimension = 1;
  pr.drift = [](const Vector& x, const Vector& a) -> Vector { return (1.0 + a[0]) * x; };
  pr.diffusion = [d](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(d, 1); };
  pr.running_cost = [](const Vector& x, const Vector&) { return x.squaredNorm(); };
  pr.discount = beta;
  pr.controls = scalar_controls(controls, p.path("controls"));
  double amax = 0.0;
  for (double a : controls) amax = std::max(amax, a);
  pr.lipschitz_bound = 1.0 + amax;
  pr.cost_bounds = {0.0, 1.0};
  return inst;
}

ProblemInstance coarse_mdp(ParamReader& p) {
  const double beta = p.positive("beta", 1.0);
  ProblemInstance inst{ControlProblem{}, Domain::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)), 0.1, true};
  ControlProblem& pr = inst.problem;
  pr.name = "coarse-mdp";
  pr.dimension = 1;
  pr.noise_dimension = 1;
  pr.drift = [](const Vector&, const Vector& a) -> Vector { return a; };
  pr.diffusion = [](const Vector& x, const Vector&) -> Matrix {
    return Matrix::Constant(1, 1, 0.3 * (1.0 - x[0] * x[0]));
  };
  pr.running_cost = [](const Vector& x, const Vector& a) {
    const double e = x[0] - 0.3;
    return e * e + 0.1 * a[0] * a[0];
  };
  pr.discount = beta;
  pr.controls = ControlSet::scalar({-1.0, 0.0, 1.0});
  pr.lipschitz_bound = 1.0;
  pr.cost_bounds = {0.0, 1.3 * 1.3 + 0.1};
  return inst;
}

// Farthest point of G from c (exact for box and ball, bounding box otherwise).
double max_distance(const Domain& g, const Vector& c) {
  if (g.kind() == DomainKind::kBall) return (g.center() - c).norm() + g.radius();
  const Vector far = (g.bbox_lower() - c).cwiseAbs().cwiseMax((g.bbox_upper() - c).cwiseAbs());
  return far.norm();
}

// Distance from c to G; a valid lower bound (0) for smooth domains.
double min_distance(const Domain& g, const Vector& c) {
  if (g.kind() == DomainKind::kSmooth) return 0.0;
  return std::max(0.0, -g.signed_distance(c));
}

ProblemInstance inline_problem(ParamReader& p, const std::optional<DomainSpec>& domain) {
  if (!domain) throw ConfigError("inline problems need a [domain] section");
  ProblemInstance inst{ControlProblem{}, make_domain(*domain), std::nullopt, true};
  const int d = inst.domain.dimension();
  ControlProblem& pr = inst.problem;
  pr.name = "inline";
  pr.dimension = d;
  pr.discount = p.positive("beta", 1.0);

  const int k = dimension(p, "control_dim", 1);
  const auto flat = p.list("controls", {0.0});
  if (flat.empty() || flat.size() % k != 0) throw ConfigError(p.path("controls") + " length must be a multiple of control_dim");
  std::vector<Vector> pts;
  bool has_zero = false;
  for (std::size_t i = 0; i < flat.size(); i += k) {
    pts.push_back(Eigen::Map<const Vector>(flat.data() + i, k));  // k <= kMaxDim, checked above
    has_zero = has_zero || pts.back().isZero(0.0);
  }
  pr.controls = ControlSet(std::move(pts), has_zero);

  const std::string drift = p.text("drift", "zero");
  const double rate = p.number("drift_rate", 1.0);
  auto control_as_drift = [d, k](const Vector& a) -> Vector {
    return k == d ? a : Vector::Constant(d, a[0]);
  };
  if ((drift == "control" || drift == "decay-control") && k != 1 && k != d) {
    throw ConfigError(p.path("control_dim") + " must be 1 or the state dimension for drift \"" + drift + "\"");
  }
  if (drift == "zero") {
    pr.drift = [d](const Vector&, const Vector&) -> Vector { return Vector::Zero(d); };
  } else if (drift == "decay") {
    pr.drift = [rate](const Vector& x, const Vector&) -> Vector { return -rate * x; };
  } else if (drift == "control") {
    pr.drift = [control_as_drift](const Vector&, const Vector& a) -> Vector { return control_as_drift(a); };
  } else if (drift == "decay-control") {
    pr.drift = [rate, control_as_drift](const Vector& x, const Vector& a) -> Vector {
      return -rate * x + control_as_drift(a);
    };
  } else if (drift == "expand") {
    pr.drift = [rate](const Vector& x, const Vector& a) -> Vector { return rate * (1.0 + a[0]) * x; };
  } else {
    throw ConfigError(p.path("drift") + ": unknown drift \"" + drift + "\"");
  }

  const std::string diffusion = p.text("diffusion", "zero");
  const double s = p.number("diffusion_scale", 1.0);
  pr.noise_dimension = diffusion == "zero" ? 1 : d;
  if (diffusion == "zero") {
    pr.diffusion = [d](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(d, 1); };
  } else if (diffusion == "constant") {
    pr.diffusion = [d, s](const Vector&, const Vector&) -> Matrix { return s * Matrix::Identity(d, d); };
  } else if (diffusion == "vanishing") {
    pr.diffusion = [d, s](const Vector& x, const Vector&) -> Matrix {
      return Matrix::Identity(d, d) * (s * (1.0 - x.squaredNorm()));
    };
  } else if (diffusion == "control-vanishing") {
    pr.diffusion = [d, s](const Vector& x, const Vector& a) -> Matrix {
      return Matrix::Identity(d, d) * (s * a[0] * (1.0 - x.squaredNorm()));
    };
  } else {
    throw ConfigError(p.path("diffusion") + ": unknown diffusion \"" + diffusion + "\"");
  }

  const std::string cost = p.text("cost", "quadratic");
  if (cost == "constant") {
    const double c = p.number("cost_value", 1.0);
    pr.running_cost = [c](const Vector&, const Vector&) { return c; };
    pr.cost_bounds = {c, c};
  } else if (cost == "quadratic") {
    const Vector centre = Vector::Constant(d, p.number("cost_center", 0.0));
    const double lambda = p.number("cost_weight", 0.0);
    if (lambda < 0.0) throw ConfigError(p.path("cost_weight") + " must be nonnegative");
    pr.running_cost = [centre, lambda](const Vector& x, const Vector& a) {
      return (x - centre).squaredNorm() + lambda * a.squaredNorm();
    };
    const double lo = min_distance(inst.domain, centre);
    const double hi = max_distance(inst.domain, centre);
    pr.cost_bounds = {lo * lo + lambda * min_abs(pr.controls), hi * hi + lambda * max_abs(pr.controls)};
  } else {
    throw ConfigError(p.path("cost") + ": unknown cost \"" + cost + "\"");
  }
  return inst;
}

double radical_inverse(std::size_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"constant-cost", "deterministic-decay", "degenerate-ball",
                                              "outward-drift", "coarse-mdp", "inline"};
  return names;
}

const std::vector<std::string>& drift_catalog() {
  static const std::vector<std::string> names{"zero", "decay", "control", "decay-control", "expand"};
  return names;
}

const std::vector<std::string>& diffusion_catalog() {
  static const std::vector<std::string> names{"zero", "constant", "vanishing", "control-vanishing"};
  return names;
}

const std::vector<std::string>& cost_catalog() {
  static const std::vector<std::string> names{"constant", "quadratic"};
  return names;
}

Domain make_domain(const DomainSpec& spec) {
  ParamReader p(spec.params, "domain");
  Domain out = [&] {
    if (spec.kind == "box") {
      const Vector lo = to_vector(p.list("lower", {-1.0}));
      const Vector hi = to_vector(p.list("upper", {1.0}));
      if (lo.size() != hi.size()) throw ConfigError("domain.lower and domain.upper must have the same length");
      if (!((hi - lo).array() > 0.0).all()) throw ConfigError("domain.upper must exceed domain.lower on every axis");
      return Domain::box(lo, hi);
    }
    if (spec.kind == "ball") {
      const int d = dimension(p, "dimension", 2);
      const Vector c = p.has("center") ? to_vector(p.list("center", {})) : Vector::Zero(d);
      return Domain::ball(c, p.positive("radius", 1.0));
    }
    if (spec.kind == "ellipse") {
      const Vector s = to_vector(p.list("semi_axes", {1.0, 0.5}));
      if (!(s.array() > 0.0).all()) throw ConfigError("domain.semi_axes must be positive");
      return Domain::ellipse(s);
    }
    if (spec.kind == "superellipse") {
      const Vector s = to_vector(p.list("semi_axes", {1.0, 1.0}));
      if (!(s.array() > 0.0).all()) throw ConfigError("domain.semi_axes must be positive");
      const double e = p.number("exponent", 4.0);
      if (!(e >= 2.0)) throw ConfigError("domain.exponent must be >= 2");
      return Domain::superellipse(s, e);
    }
    throw ConfigError("domain.kind: unknown domain kind \"" + spec.kind + "\"");
  }();
  p.finish();
  return out;
}

ProblemInstance make_problem(const std::string& name, const ParamMap& params, const std::optional<DomainSpec>& domain) {
  ParamReader p(params, "problem");
  const bool domain_allowed = name == "constant-cost" || name == "inline";
  if (domain && !domain_allowed) throw ConfigError("problem \"" + name + "\" has a fixed domain; remove the [domain] section");
  ProblemInstance inst = [&] {
    if (name == "constant-cost") return constant_cost(p, domain);
    if (name == "deterministic-decay") return deterministic_decay(p);
    if (name == "degenerate-ball") return degenerate_ball(p);
    if (name == "outward-drift") return outward_drift(p);
    if (name == "coarse-mdp") return coarse_mdp(p);
    if (name == "inline") return inline_problem(p, domain);
    throw ConfigError("problem.name: unknown catalog problem \"" + name + "\"");
  }();
  p.finish();
  inst.problem.validate(inst.domain.center());
  return inst;
}

double cost_bound_violation(const ProblemInstance& instance, std::size_t n_samples) {
  const ControlProblem& pr = instance.problem;
  const Domain& g = instance.domain;
  const int d = g.dimension();
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  std::vector<Vector> points = sample_boundary(g, std::max<std::size_t>(1, n_samples / 4));
  for (std::size_t i = 1; points.size() < n_samples && i < 20 * n_samples; ++i) {
    Vector x(d);
    for (int j = 0; j < d; ++j) {
      const double u = radical_inverse(i, kPrimes[j % 12]);
      x[j] = g.bbox_lower()[j] + u * (g.bbox_upper()[j] - g.bbox_lower()[j]);
    }
    if (g.in_closure(x)) points.push_back(std::move(x));
  }
  double worst = 0.0;
  for (const auto& x : points) {
    for (const auto& a : pr.controls.points()) {
      const double f = pr.running_cost(x, a);
      worst = std::max({worst, pr.cost_bounds.lower - f, f - pr.cost_bounds.upper});
    }
  }
  return worst;
}

}  // namespace schjb
