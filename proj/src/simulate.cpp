#include "schjb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "schjb/rng.hpp"

namespace schjb {

void SimParams::validate() const {
  if (!(dt > 0.0)) throw Error("sim.dt must be positive");
  if (!(horizon > 0.0)) throw Error("sim.horizon must be positive");
  if (n_paths < 1) throw Error("sim.n_paths must be >= 1");
}

const char* to_string(ZDirection d) { return d == ZDirection::kSuper ? "super" : "sub"; }

namespace {

constexpr int kMaxResample = 64;

// k dt for k = 0.. up to T, merged with any extra event times.
std::vector<double> time_grid(double dt, double horizon, const std::vector<double>& extra) {
  std::vector<double> t;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  t.reserve(n + 1 + extra.size());
  for (std::size_t k = 0; k < n; ++k) t.push_back(static_cast<double>(k) * dt);
  t.push_back(horizon);
  for (double e : extra) t.push_back(e);
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t) {
    if (v > horizon + 1e-12) continue;
    if (out.empty() || v - out.back() > 1e-12 * std::max(1.0, horizon)) out.push_back(v);
  }
  return out;
}

// Exact weights of int_0^h e^{-beta s} [(1 - s/h) f0 + (s/h) f1] ds.
std::pair<double, double> discount_weights(double beta, double h) {
  const double x = beta * h;
  const double q = std::exp(-x);
  const double i0 = -std::expm1(-x) / beta;
  double i1;
  if (x < 1e-4) {
    // Series of (1 - q - x q) / x to avoid cancellation.
    i1 = h * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
  } else {
    i1 = (-std::expm1(-x) - x * q) / (beta * x);
  }
  return {i0 - i1, i1};
}

// discount_weights memoized on the last step size (steps are uniform except
// next to checkpoints and T).
class WeightCache {
 public:
  explicit WeightCache(double beta) : beta_(beta) {}
  std::pair<double, double> operator()(double h) {
    if (std::abs(h - h_) > 1e-9 * h_) {
      h_ = h;
      w_ = discount_weights(beta_, h);
    }
    return w_;
  }

 private:
  double beta_;
  double h_ = -1.0;
  std::pair<double, double> w_{0.0, 0.0};
};

class PathEngine {
 public:
  PathEngine(const ControlProblem& problem, const Domain& domain, const Feedback& policy, const SimParams& params)
      : problem_(problem), domain_(domain), policy_(policy), params_(params), noise_(problem.noise_dimension) {}

  struct StepResult {
    Vector next;
    bool left_domain = false;
  };

  StepResult step(const NormalStream& rng, const Vector& x, const Vector& a, double h, std::uint32_t k) {
    const Vector b = problem_.drift(x, a);
    const Matrix s = problem_.diffusion(x, a);
    const double root = std::sqrt(h);
    StepResult r;
    for (int attempt = 0;; ++attempt) {
      rng.fill(noise_, problem_.noise_dimension, k, static_cast<std::uint32_t>(attempt));
      r.next = x + b * h + s * noise_ * root;
      if (domain_.in_closure(r.next)) return r;
      r.left_domain = true;
      if (params_.projection == ProjectionMode::kProject || attempt + 1 >= kMaxResample) break;
    }
    r.next = domain_.project(r.next);
    return r;
  }

  const ControlProblem& problem() const { return problem_; }
  const Feedback& policy() const { return policy_; }

 private:
  const ControlProblem& problem_;
  const Domain& domain_;
  const Feedback& policy_;
  const SimParams& params_;
  Vector noise_;
};

void require_start(const Domain& domain, const Vector& x0, int dim) {
  if (x0.size() != dim) throw DimensionError("x0 has the wrong dimension");
  if (!domain.in_closure(x0, 1e-12)) throw Error("x0 is not in G");
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) {
    m.mean = *lo;
    return m;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  m.se = std::sqrt(var / static_cast<double>(v.size()));
  return m;
}

}  // namespace

SamplePath simulate_path(const ControlProblem& problem, const Domain& domain, const Feedback& policy,
                         const Vector& x0, const SimParams& params, std::uint64_t path_index) {
  params.validate();
  require_start(domain, x0, problem.dimension);
  PathEngine engine(problem, domain, policy, params);
  const NormalStream rng(params.seed, path_index);
  const auto times = time_grid(params.dt, params.horizon, {});

  SamplePath path;
  path.times = times;
  path.states.reserve(times.size());
  path.states.push_back(x0);
  path.in_domain.push_back(true);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const Vector a = policy(path.states.back());
    path.controls.push_back(a);
    auto r = engine.step(rng, path.states.back(), a, times[k + 1] - times[k], static_cast<std::uint32_t>(k));
    path.projections += r.left_domain ? 1 : 0;
    path.in_domain.push_back(!r.left_domain);
    path.states.push_back(std::move(r.next));
  }
  path.controls.push_back(policy(path.states.back()));
  return path;
}

MCEstimate estimate_cost(const ControlProblem& problem, const Domain& domain, const Feedback& policy,
                         const Vector& x0, const SimParams& params) {
  params.validate();
  require_start(domain, x0, problem.dimension);
  PathEngine engine(problem, domain, policy, params);
  const auto times = time_grid(params.dt, params.horizon, {});
  const double beta = problem.discount;

  MCEstimate est;
  est.n_paths = params.n_paths;
  std::vector<double> totals(params.n_paths);
  for (std::size_t p = 0; p < params.n_paths; ++p) {
    const NormalStream rng(params.seed, p);
    Vector x = x0;
    Vector a = policy(x);
    double f = problem.running_cost(x, a);
    double acc = 0.0;
    WeightCache weights(beta);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
      const double h = times[k + 1] - times[k];
      auto r = engine.step(rng, x, a, h, static_cast<std::uint32_t>(k));
      est.projected_steps += r.left_domain ? 1 : 0;
      ++est.total_steps;
      x = std::move(r.next);
      a = policy(x);
      const double f_next = problem.running_cost(x, a);
      const auto [w0, w1] = weights(h);
      acc += std::exp(-beta * times[k]) * (w0 * f + w1 * f_next);
      f = f_next;
    }
    totals[p] = acc;
  }
  const auto m = moments(totals);
  est.path_costs = std::move(totals);
  est.mean = m.mean;
  est.std_error = m.se;
  est.bias_bound = std::max(std::abs(problem.cost_bounds.lower), std::abs(problem.cost_bounds.upper)) *
                   std::exp(-beta * params.horizon) / beta;
  return est;
}

namespace {

// Runs one policy and fills one ZCheck per checkpoint.
void run_z(const ControlProblem& problem, const ValueFunction& w, const Feedback& policy, const Vector& x0,
           const std::vector<double>& checkpoints, const SimParams& params, ZDirection direction,
           const ZTestOptions& options, double w0, ZProcessReport& report) {
  const Domain& domain = w.grid->domain();
  PathEngine engine(problem, domain, policy, params);
  const double t_end = *std::max_element(checkpoints.begin(), checkpoints.end());
  const auto times = time_grid(params.dt, t_end, checkpoints);
  const double beta = problem.discount;

  std::vector<std::size_t> slot(times.size(), SIZE_MAX);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (std::abs(times[k] - checkpoints[c]) <= 1e-12 * std::max(1.0, t_end)) slot[k] = c;
    }
  }
  std::vector<std::vector<double>> z(checkpoints.size(), std::vector<double>(params.n_paths));

  for (std::size_t p = 0; p < params.n_paths; ++p) {
    const NormalStream rng(params.seed, p);
    Vector x = x0;
    Vector a = policy(x);
    double f = problem.running_cost(x, a);
    double acc = 0.0;
    WeightCache weights(beta);
    if (slot[0] != SIZE_MAX) z[slot[0]][p] = w.interpolate(x, &report.interpolation_fallbacks);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
      const double h = times[k + 1] - times[k];
      auto r = engine.step(rng, x, a, h, static_cast<std::uint32_t>(k));
      report.projected_steps += r.left_domain ? 1 : 0;
      ++report.total_steps;
      x = std::move(r.next);
      a = policy(x);
      const double f_next = problem.running_cost(x, a);
      const auto [c0, c1] = weights(h);
      acc += std::exp(-beta * times[k]) * (c0 * f + c1 * f_next);
      f = f_next;
      if (slot[k + 1] != SIZE_MAX) {
        z[slot[k + 1]][p] = acc + std::exp(-beta * times[k + 1]) * w.interpolate(x, &report.interpolation_fallbacks);
      }
    }
  }

  const double slack = 1e-12 * std::max(1.0, std::abs(w0)) + options.allowance;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const auto m = moments(z[c]);
    ZCheck check;
    check.policy = policy.label;
    check.time = checkpoints[c];
    check.mean = m.mean;
    check.std_error = m.se;
    check.radius = options.z * m.se;
    check.holds = direction == ZDirection::kSuper ? (m.mean - check.radius <= w0 + slack)
                                                  : (m.mean + check.radius >= w0 - slack);
    report.checks.push_back(check);
  }
}

std::string family(const std::vector<double>& checkpoints, const std::vector<const Feedback*>& policies,
                   const Vector& x0) {
  std::ostringstream os;
  os.precision(10);
  os << "deterministic start x0=(";
  for (Eigen::Index i = 0; i < x0.size(); ++i) os << (i ? ", " : "") << x0[i];
  os << "), deterministic checkpoints {";
  for (std::size_t i = 0; i < checkpoints.size(); ++i) os << (i ? ", " : "") << checkpoints[i];
  os << "}, policies {";
  for (std::size_t i = 0; i < policies.size(); ++i) os << (i ? ", " : "") << policies[i]->label;
  os << "}";
  return os.str();
}

void check_checkpoints(const std::vector<double>& checkpoints, const SimParams& params) {
  if (checkpoints.empty()) throw Error("at least one checkpoint time is required");
  for (double t : checkpoints) {
    if (!(t >= 0.0)) throw Error("checkpoint times must be nonnegative");
    if (t > params.horizon + 1e-12) throw Error("checkpoint " + std::to_string(t) + " lies beyond the horizon T");
  }
}

}  // namespace

ZProcessReport test_z_process(const ControlProblem& problem, const ValueFunction& w, const Feedback& policy,
                              const Vector& x0, const std::vector<double>& checkpoints, const SimParams& params,
                              ZDirection direction, const ZTestOptions& options) {
  params.validate();
  check_checkpoints(checkpoints, params);
  require_start(w.grid->domain(), x0, problem.dimension);
  ZProcessReport report;
  report.direction = direction;
  report.x0 = x0;
  report.z = options.z;
  report.allowance = options.allowance;
  report.n_paths = params.n_paths;
  report.w_at_start = w.interpolate(x0, &report.interpolation_fallbacks);
  run_z(problem, w, policy, x0, checkpoints, params, direction, options, report.w_at_start, report);
  report.overall = std::all_of(report.checks.begin(), report.checks.end(), [](const ZCheck& c) { return c.holds; });
  report.tested_family = family(checkpoints, {&policy}, x0);
  return report;
}

ValueFunction pointwise_min(const ValueFunction& a, const ValueFunction& b) {
  require_same_grid(*a.grid, *b.grid);
  ValueFunction out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = std::min(a.values[i], b.values[i]);
  return out;
}

ValueFunction pointwise_max(const ValueFunction& a, const ValueFunction& b) {
  require_same_grid(*a.grid, *b.grid);
  ValueFunction out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = std::max(a.values[i], b.values[i]);
  return out;
}

ZProcessReport test_lattice_closure(const ControlProblem& problem, const ValueFunction& w1, const ValueFunction& w2,
                                    const std::vector<Feedback>& policies, const Vector& x0,
                                    const std::vector<double>& checkpoints, const SimParams& params, LatticeMode mode,
                                    const ZTestOptions& options) {
  if (mode == LatticeMode::kMinSuper) {
    if (policies.size() != 2) throw Error("min-super mode needs exactly one suitable policy per function");
    const ValueFunction w = pointwise_min(w1, w2);
    const bool first = w1.interpolate(x0) < w2.interpolate(x0);
    auto report = test_z_process(problem, w, policies[first ? 0 : 1], x0, checkpoints, params, ZDirection::kSuper,
                                 options);
    report.tested_family = "min(w1, w2) with the policy of w" + std::string(first ? "1" : "2") + "; " +
                           report.tested_family;
    return report;
  }
  if (policies.empty()) throw Error("max-sub mode needs at least one admissible policy");
  const ValueFunction u = pointwise_max(w1, w2);
  params.validate();
  check_checkpoints(checkpoints, params);
  require_start(u.grid->domain(), x0, problem.dimension);
  ZProcessReport report;
  report.direction = ZDirection::kSub;
  report.x0 = x0;
  report.z = options.z;
  report.allowance = options.allowance;
  report.n_paths = params.n_paths;
  report.w_at_start = u.interpolate(x0, &report.interpolation_fallbacks);
  std::vector<const Feedback*> ptrs;
  for (const auto& p : policies) {
    run_z(problem, u, p, x0, checkpoints, params, ZDirection::kSub, options, report.w_at_start, report);
    ptrs.push_back(&p);
  }
  report.overall = std::all_of(report.checks.begin(), report.checks.end(), [](const ZCheck& c) { return c.holds; });
  report.tested_family = "max(u1, u2); " + family(checkpoints, ptrs, x0);
  return report;
}

}  // namespace schjb
