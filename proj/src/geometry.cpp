#include "mrof/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "mrof/errors.hpp"

namespace mrof {

namespace {

/// 1/2 sum w_i dist^2(p_i, q)
double karcher_value(const Manifold& m, const WeightedPoints& wp, const Point& q) {
  double v = 0;
  for (std::size_t i = 0; i < wp.points.size(); ++i) {
    const double d = m.dist(wp.points[i], q);
    v += 0.5 * wp.weights[i] * d * d;
  }
  return v;
}

}  // namespace

Point barycenter(const Manifold& m, const WeightedPoints& wp, double tol, int max_iter) {
  if (wp.points.empty()) throw RangeViolation("barycenter of an empty point set");
  if (wp.points.size() != wp.weights.size())
    throw DomainError("barycenter: points/weights size mismatch");
  if (!(tol > 0)) throw DomainError("barycenter: tol must be positive");
  double wsum = 0;
  for (double w : wp.weights) {
    if (w < 0) throw DomainError("barycenter: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw DomainError("barycenter: weights must sum to 1");

  // Necessary condition for a common ball of radius < convexity_radius:
  // the diameter stays below twice that radius.
  const double r_conv = m.convexity_radius();
  if (std::isfinite(r_conv)) {
    for (const Point& p : wp.points)
      if (m.dist(wp.points.front(), p) >= 2.0 * r_conv)
        throw RangeViolation("barycenter inputs are not inside a common convex ball");
  }

  Point q = wp.points.front();
  if (wp.points.size() == 1) return q;
  double value = karcher_value(m, wp, q);
  for (int iter = 0; iter < max_iter; ++iter) {
    Vec step = Vec::zero(m.ambient_dim());
    for (std::size_t i = 0; i < wp.points.size(); ++i)
      step.axpy(wp.weights[i], m.log(q, wp.points[i]).v);
    Tangent dir{q, step};
    if (m.norm(q, dir) <= tol) return q;

    double t = 1.0;
    for (int halving = 0; halving < 40; ++halving) {
      const Point trial = m.exp(q, Tangent{q, t * step});
      const double trial_value = karcher_value(m, wp, trial);
      if (trial_value <= value) {
        q = trial;
        value = trial_value;
        break;
      }
      t *= 0.5;
    }
  }
  // Accept a late converger: the residual may have landed under tol on the
  // final update.
  Vec step = Vec::zero(m.ambient_dim());
  for (std::size_t i = 0; i < wp.points.size(); ++i)
    step.axpy(wp.weights[i], m.log(q, wp.points[i]).v);
  if (m.norm(q, Tangent{q, step}) <= tol) return q;
  throw NoConvergence("barycenter did not reach tolerance");
}

Kernel kernel_from_name(std::string_view name) {
  if (name == "bump") return Kernel::bump;
  if (name == "tent") return Kernel::tent;
  throw ParseError("unknown mollifier kernel '" + std::string(name) + "'");
}

double kernel_value(Kernel k, double s) {
  if (s >= 1.0) return 0.0;
  switch (k) {
    case Kernel::bump:
      return std::exp(1.0 - 1.0 / (1.0 - s * s));
    case Kernel::tent:
      return 1.0 - s;
  }
  return 0.0;
}

Field mollify(const Manifold& m, const Grid& grid, const Field& f, double delta, Kernel kernel) {
  require_same_shape(m, grid, f);
  if (delta < 0) throw DomainError("mollify: delta must be nonnegative");
  if (delta < grid.spacing()) return f;  // singleton neighborhoods

  const int n = grid.num_nodes();
  Field out;
  out.values.resize(static_cast<std::size_t>(n));
  WeightedPoints wp;
  for (int x = 0; x < n; ++x) {
    wp.points.clear();
    wp.weights.clear();
    double wsum = 0;
    for (int y = 0; y < n; ++y) {
      const double d = grid.node_distance(x, y);
      if (d > delta) continue;
      const double w = kernel_value(kernel, d / delta);
      if (w <= 0) continue;
      wp.points.push_back(f[y]);
      wp.weights.push_back(w);
      wsum += w;
    }
    for (double& w : wp.weights) w /= wsum;
    out[x] = barycenter(m, wp);
  }
  return out;
}

Point retract_into_ball(const Manifold& m, const Point& center, double R, const Point& q) {
  if (!(R > 0) || R >= m.convexity_radius())
    throw DomainError("retract_into_ball requires 0 < R < convexity_radius");
  const double r = m.dist(center, q);
  if (r < R) return q;
  if (r >= 2.0 * R) return center;
  Tangent v = m.log(center, q);
  v.v *= (2.0 * R - r) / r;
  return m.exp(center, v);
}

Field geodesic_homotopy(const Manifold& m, const Field& u, const Field& v, double t) {
  if (u.size() != v.size()) throw GridMismatch("homotopy endpoints live on different grids");
  if (t == 0.0) return u;
  Field out;
  out.values.resize(u.values.size());
  for (int i = 0; i < u.size(); ++i) {
    Tangent dir = m.log(u[i], v[i]);
    dir.v *= t;
    out[i] = m.exp(u[i], dir);
  }
  return out;
}

}  // namespace mrof
