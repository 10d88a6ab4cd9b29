#include "schjb/viability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace schjb {

namespace {

struct Geometry {
  std::vector<Vector> normals;  // several only at box edges/corners
  Matrix hessian;
};

// Outward normals active at x. Box edges and corners contribute every face at
// minimal distance; other geometry errors propagate.
Geometry boundary_geometry(const Domain& domain, const Vector& x) {
  Geometry geo;
  try {
    geo.normals.push_back(domain.outward_normal(x));
    geo.hessian = domain.hessian_distance(x);
    return geo;
  } catch (const GeometryError&) {
    if (domain.kind() != DomainKind::kBox) throw;
  }
  const int d = domain.dimension();
  const Vector lo = x - domain.bbox_lower();
  const Vector hi = domain.bbox_upper() - x;
  const double best = std::min(lo.minCoeff(), hi.minCoeff());
  for (int i = 0; i < d; ++i) {
    if (std::abs(lo[i] - best) <= Domain::kEdgeTolerance) geo.normals.push_back(-Vector::Unit(d, i));
    if (std::abs(hi[i] - best) <= Domain::kEdgeTolerance) geo.normals.push_back(Vector::Unit(d, i));
  }
  geo.hessian = Matrix::Zero(d, d);
  return geo;
}

ViabilitySample evaluate(const ControlProblem& problem, const Geometry& geo, const Vector& x,
                         const ViabilityOptions& options) {
  ViabilitySample best;
  best.x = x;
  bool have_tangent = false;
  double least_tangency = std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < problem.controls.size(); ++ci) {
    const Vector& a = problem.controls[ci];
    const Vector b = problem.drift(x, a);
    const Matrix s = problem.diffusion(x, a);
    const double curvature = 0.5 * ((s * s.transpose()).cwiseProduct(geo.hessian)).sum();
    double tangency = 0.0;
    double inward = std::numeric_limits<double>::infinity();
    for (const auto& n : geo.normals) {
      tangency = std::max(tangency, (s.transpose() * n).norm());
      inward = std::min(inward, -n.dot(b) + curvature);
    }
    if (tangency <= options.tol_sigma) {
      if (!have_tangent || inward > best.inward_value + kTieTolerance) {
        best.best_control = ci;
        best.tangency_residual = tangency;
        best.inward_value = inward;
        have_tangent = true;
      }
    } else if (!have_tangent && tangency < least_tangency) {
      least_tangency = tangency;
      best.best_control = ci;
      best.tangency_residual = tangency;
      best.inward_value = inward;
    }
  }
  best.pass = best.tangency_residual <= options.tol_sigma && best.inward_value >= -options.tol_b;
  return best;
}

// Low-discrepancy radical inverse in the given base.
double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

std::vector<Vector> sphere_directions(int d, std::size_t n) {
  std::vector<Vector> dirs;
  dirs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector v(d);
    if (d == 1) {
      v[0] = (k % 2 == 0) ? 1.0 : -1.0;
    } else if (d == 2) {
      const double th = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
      v << std::cos(th), std::sin(th);
    } else if (d == 3) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = static_cast<double>(k) * std::numbers::pi * (3.0 - std::sqrt(5.0));
      v << r * std::cos(phi), r * std::sin(phi), z;
    } else {
      // Box-Muller on Halton coordinates, then normalize.
      for (int i = 0; i < d; i += 2) {
        const double u1 = std::max(halton(k + 1, kPrimes[i % 12]), 1e-12);
        const double u2 = halton(k + 1, kPrimes[(i + 1) % 12]);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        v[i] = rad * std::cos(2.0 * std::numbers::pi * u2);
        if (i + 1 < d) v[i + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
      }
      v.normalize();
    }
    dirs.push_back(v);
  }
  return dirs;
}

}  // namespace

ViabilitySample check_point_viability(const ControlProblem& problem, const Domain& domain, const Vector& x,
                                      const ViabilityOptions& options) {
  Geometry geo;
  geo.normals.push_back(domain.outward_normal(x));
  geo.hessian = domain.hessian_distance(x);
  return evaluate(problem, geo, x, options);
}

bool check_strong_condition(const ControlProblem& problem, const Domain& domain, const Feedback& psi,
                            const Vector& x, const ViabilityOptions& options) {
  const Vector n = domain.outward_normal(x);
  const Vector a = psi(x);
  const Matrix s = problem.diffusion(x, a);
  const Vector b = problem.drift(x, a);
  return s.norm() <= options.tol_sigma && -n.dot(b) >= options.delta_strict;
}

std::vector<Vector> sample_boundary(const Domain& domain, std::size_t n_samples, double edge_margin) {
  const int d = domain.dimension();
  std::vector<Vector> pts;
  pts.reserve(n_samples);
  switch (domain.kind()) {
    case DomainKind::kBall:
      for (const auto& v : sphere_directions(d, n_samples)) pts.push_back(domain.center() + domain.radius() * v);
      break;
    case DomainKind::kBox: {
      const std::size_t faces = 2 * static_cast<std::size_t>(d);
      for (std::size_t k = 0; k < n_samples; ++k) {
        const std::size_t face = k % faces;
        const std::size_t j = k / faces;
        const std::size_t on_face = n_samples / faces + (face < n_samples % faces ? 1 : 0);
        const int axis = static_cast<int>(face / 2);
        Vector x(d);
        int q = 0;
        for (int i = 0; i < d; ++i) {
          if (i == axis) {
            x[i] = (face % 2 == 0) ? domain.bbox_lower()[i] : domain.bbox_upper()[i];
            continue;
          }
          const double t = (d == 2) ? (static_cast<double>(j) + 0.5) / static_cast<double>(on_face)
                                    : halton(j + 1, kPrimes[q % 12]);
          ++q;
          const double lo = domain.bbox_lower()[i], hi = domain.bbox_upper()[i];
          const double m = std::min(edge_margin, 0.25 * (hi - lo));
          x[i] = lo + m + t * (hi - lo - 2.0 * m);
        }
        pts.push_back(x);
      }
      break;
    }
    case DomainKind::kSmooth: {
      const Vector c = domain.center();
      const double reach = (domain.bbox_upper() - domain.bbox_lower()).norm();
      for (const auto& v : sphere_directions(d, n_samples)) {
        double in = 0.0, out = reach;
        for (int it = 0; it < 200 && out - in > 1e-15 * reach; ++it) {
          const double mid = 0.5 * (in + out);
          if (domain.signed_distance(c + mid * v) >= 0.0) in = mid; else out = mid;
        }
        pts.push_back(c + 0.5 * (in + out) * v);
      }
      break;
    }
  }
  return pts;
}

ViabilityReport scan_boundary(const ControlProblem& problem, const Domain& domain, std::size_t n_samples,
                              const ViabilityOptions& options) {
  if (n_samples == 0) throw Error("scan_boundary needs n_samples >= 1");
  ViabilityReport report;
  report.worst_inward = std::numeric_limits<double>::infinity();
  for (const auto& x : sample_boundary(domain, n_samples, options.edge_margin)) {
    auto s = check_point_viability(problem, domain, x, options);
    (s.pass ? report.passed : report.failed)++;
    report.worst_tangency = std::max(report.worst_tangency, s.tangency_residual);
    report.worst_inward = std::min(report.worst_inward, s.inward_value);
    report.samples.push_back(std::move(s));
  }
  return report;
}

StrongScan scan_strong_condition(const ControlProblem& problem, const Domain& domain, const Feedback& psi,
                                 std::size_t n_samples, const ViabilityOptions& options) {
  StrongScan scan;
  for (const auto& x : sample_boundary(domain, n_samples, options.edge_margin)) {
    ++scan.checked;
    scan.passed += check_strong_condition(problem, domain, psi, x, options) ? 1 : 0;
  }
  return scan;
}

FeedbackMap construct_feedback(const ControlProblem& problem, std::shared_ptr<const Grid> grid,
                               const ViabilityOptions& options) {
  const Grid& g = *grid;
  FeedbackMap map;
  map.policy.grid = grid;
  map.policy.control.resize(g.size());
  map.provenance.resize(g.size());
  std::vector<ViabilitySample> failures;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const Vector x = g.position(node);
    if (g.is_boundary(node)) {
      const auto s = evaluate(problem, boundary_geometry(g.domain(), x), x, options);
      map.policy.control[node] = s.best_control;
      map.provenance[node] = s.pass ? "boundary:tangent+inward" : "boundary:FAILED";
      if (!s.pass) failures.push_back(s);
    } else {
      std::size_t best = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::size_t ci = 0; ci < problem.controls.size(); ++ci) {
        const double f = problem.running_cost(x, problem.controls[ci]);
        if (f < best_cost - kTieTolerance) {
          best_cost = f;
          best = ci;
        }
      }
      map.policy.control[node] = best;
      map.provenance[node] = "interior:min-cost";
    }
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) {
      return a.inward_value - a.tangency_residual < b.inward_value - b.tangency_residual;
    });
    std::ostringstream os;
    os.precision(6);
    os << "domain not viable under control sample: " << failures.size() << " boundary node(s) fail; worst:";
    for (std::size_t k = 0; k < std::min<std::size_t>(5, failures.size()); ++k) {
      os << " x=(" << failures[k].x.transpose() << ") tangency=" << failures[k].tangency_residual
         << " inward=" << failures[k].inward_value << ";";
    }
    throw Error(os.str());
  }
  return map;
}

}  // namespace schjb
