#include "mrof/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrof/errors.hpp"
#include "mrof/geometry.hpp"

namespace mrof {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Knot {
  double x, y;
};

/// Interval node weights matching the module quadrature.
std::vector<double> interval_weights(std::size_t n, double dx) {
  std::vector<double> w(n, dx);
  w.front() *= 0.5;
  if (n > 1) w.back() *= 0.5;
  return w;
}

/// Shortest path from `start` to `end` through vertical gates
/// (x_k, [lo_k, hi_k]), greedy wedge algorithm with restart at each bend.
std::vector<Knot> taut_path(const std::vector<double>& gx, const std::vector<double>& lo,
                            const std::vector<double>& hi, Knot start, Knot end) {
  std::vector<Knot> path{start};
  Knot apex = start;
  const int ng = static_cast<int>(gx.size());
  int k = 0;
  double su = std::numeric_limits<double>::infinity();
  double sl = -su;
  int iu = -1, il = -1;
  while (k < ng) {
    const double span = gx[static_cast<std::size_t>(k)] - apex.x;
    const double shi = (hi[static_cast<std::size_t>(k)] - apex.y) / span;
    const double slo = (lo[static_cast<std::size_t>(k)] - apex.y) / span;
    if (slo > su) {  // forced to touch the tightest upper gate
      apex = {gx[static_cast<std::size_t>(iu)], hi[static_cast<std::size_t>(iu)]};
      path.push_back(apex);
      k = iu + 1;
      su = std::numeric_limits<double>::infinity();
      sl = -su;
      iu = il = -1;
      continue;
    }
    if (shi < sl) {  // forced to touch the tightest lower gate
      apex = {gx[static_cast<std::size_t>(il)], lo[static_cast<std::size_t>(il)]};
      path.push_back(apex);
      k = il + 1;
      su = std::numeric_limits<double>::infinity();
      sl = -su;
      iu = il = -1;
      continue;
    }
    if (shi < su) {
      su = shi;
      iu = k;
    }
    if (slo > sl) {
      sl = slo;
      il = k;
    }
    ++k;
  }
  path.push_back(end);
  return path;
}

double oracle_energy(std::span<const double> f, std::span<const double> u,
                     std::span<const double> w, std::span<const double> gamma, double lambda) {
  double e = 0;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) e += gamma[k] * std::abs(u[k + 1] - u[k]);
  for (std::size_t i = 0; i < u.size(); ++i)
    e += 0.5 * lambda * w[i] * (u[i] - f[i]) * (u[i] - f[i]);
  return e;
}

}  // namespace

TautStringResult taut_string_1d(std::span<const double> f, double lambda, double dx) {
  if (f.empty()) throw DomainError("taut_string_1d: empty signal");
  if (!(lambda > 0) || !(dx > 0)) throw DomainError("taut_string_1d: lambda, dx must be positive");
  const std::size_t n = f.size();
  TautStringResult out;
  if (n == 1) {
    out.values = {f[0]};
    out.objective = 0;
    out.kkt_residual = 0;
    return out;
  }

  const std::vector<double> w = interval_weights(n, dx);
  std::vector<double> gamma(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) gamma[k] = w[k] / dx;

  // Gates at cumulative weights; radii gamma_k / lambda around cumulative
  // weighted sums of f; the last gate pins the total mass.
  std::vector<double> gx(n), lo(n), hi(n);
  double t = 0, F = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t += w[i];
    F += w[i] * f[i];
    gx[i] = t;
    if (i + 1 < n) {
      lo[i] = F - gamma[i] / lambda;
      hi[i] = F + gamma[i] / lambda;
    } else {
      lo[i] = hi[i] = F;
    }
  }
  const std::vector<Knot> path = taut_path(gx, lo, hi, Knot{0.0, 0.0}, Knot{gx[n - 1], F});

  // Slopes of the path pieces are the minimizer values.
  out.values.resize(n);
  std::size_t piece = 0;
  double x_left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mid = x_left + 0.5 * w[i];
    while (piece + 2 < path.size() && path[piece + 1].x <= mid) ++piece;
    const Knot& a = path[piece];
    const Knot& b = path[piece + 1];
    out.values[i] = (b.y - a.y) / (b.x - a.x);
    x_left += w[i];
  }

  out.objective = oracle_energy(f, out.values, w, gamma, lambda);
  out.kkt_residual = taut_string_kkt_residual(f, out.values, lambda, dx);
  return out;
}

double taut_string_kkt_residual(std::span<const double> f, std::span<const double> u,
                                double lambda, double dx) {
  const std::size_t n = f.size();
  if (n != u.size()) throw DomainError("kkt residual: size mismatch");
  if (n == 1) return 0;
  const std::vector<double> w = interval_weights(n, dx);
  double scale = 1e-9;
  for (double v : f) scale = std::max(scale, std::abs(v));

  double res = 0;
  double s = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    s += lambda * w[k] * (u[k] - f[k]);
    const double gamma = w[k] / dx;
    res = std::max(res, std::abs(s) - gamma);  // |S_k| <= gamma_k
    const double jump = u[k + 1] - u[k];
    if (std::abs(jump) > 1e-9 * scale)  // active edge: S_k = gamma_k sign(jump)
      res = std::max(res, std::abs(s - gamma * (jump > 0 ? 1.0 : -1.0)));
  }
  s += lambda * w[n - 1] * (u[n - 1] - f[n - 1]);
  res = std::max(res, std::abs(s));  // S_{n-1} = 0
  return std::max(res, 0.0);
}

BruteForceResult brute_force_small(const Manifold& m, const Grid& grid, const Field& f,
                                   const EnergyParams& params, int quantization) {
  require_same_shape(m, grid, f);
  const int nodes = grid.num_nodes();
  if (nodes > 4) throw BudgetExceeded("brute_force_small is limited to grids of <= 4 nodes");
  if (quantization < 1) throw DomainError("quantization must be >= 1");
  if (m.dim() > 3) throw DomainError("brute_force_small supports targets of dimension <= 3");

  // Ball from f: equal-weight barycenter and covering radius.
  WeightedPoints wp;
  wp.points = f.values;
  wp.weights.assign(f.values.size(), 1.0 / static_cast<double>(nodes));
  const Point center = barycenter(m, wp, 1e-12, 200);
  const double R = max_dist_from(m, center, f);

  // Polar net: q radial steps x uniform directions (2 / q / q^2 of them for
  // dim 1 / 2 / 3), plus the center.
  std::vector<Point> net{center};
  double resolution = 0;
  if (R > 0) {
    std::vector<Vec> dirs;
    const int q = quantization;
    if (m.dim() == 1) {
      Rng rng(1);
      const Tangent e = m.random_unit_tangent(center, rng);
      dirs.push_back(e.v);
      dirs.push_back((-1.0) * e.v);
      resolution = R / q;
    } else if (m.dim() == 2) {
      Rng rng(1);
      const Tangent e1 = m.random_unit_tangent(center, rng);
      Tangent e2 = m.project_tangent(center, m.random_unit_tangent(center, rng).v);
      e2.v.axpy(-m.inner(center, e2, e1), e1.v);  // Gram-Schmidt
      e2.v *= 1.0 / m.norm(center, e2);
      for (int k = 0; k < q; ++k) {
        const double phi = 2.0 * kPi * k / q;
        dirs.push_back(std::cos(phi) * e1.v + std::sin(phi) * e2.v);
      }
      resolution = std::max(R / q, R * kPi / q);
    } else {
      Rng rng(1);
      Tangent e[3];
      for (int a = 0; a < 3; ++a) {
        e[a] = m.random_unit_tangent(center, rng);
        for (int b = 0; b < a; ++b) e[a].v.axpy(-m.inner(center, e[a], e[b]), e[b].v);
        e[a].v *= 1.0 / m.norm(center, e[a]);
      }
      for (int i = 0; i < q; ++i) {
        const double theta = kPi * (i + 0.5) / q;
        for (int j = 0; j < q; ++j) {
          const double phi = 2.0 * kPi * j / q;
          Vec d = (std::sin(theta) * std::cos(phi)) * e[0].v;
          d.axpy(std::sin(theta) * std::sin(phi), e[1].v);
          d.axpy(std::cos(theta), e[2].v);
          dirs.push_back(d);
        }
      }
      resolution = std::max(R / q, 2.0 * R * kPi / q);
    }
    for (int j = 1; j <= q; ++j)
      for (const Vec& d : dirs) net.push_back(m.exp(center, Tangent{center, (R * j / q) * d}));
  }

  const double assignments = std::pow(static_cast<double>(net.size()), nodes);
  if (assignments > 1e8) throw BudgetExceeded("brute_force_small: net^nodes exceeds 1e8");

  BruteForceResult best;
  best.resolution = resolution;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(nodes), 0);
  Field u;
  u.values.resize(static_cast<std::size_t>(nodes));
  const int net_size = static_cast<int>(net.size());
  while (true) {
    for (int i = 0; i < nodes; ++i) u[i] = net[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    const double e = energy(m, grid, u, f, params).total;
    if (e < best.objective) {  // strict: first (lexicographically smallest) wins
      best.objective = e;
      best.values = u;
    }
    int carry = nodes - 1;
    while (carry >= 0 && ++idx[static_cast<std::size_t>(carry)] == net_size) {
      idx[static_cast<std::size_t>(carry)] = 0;
      --carry;
    }
    if (carry < 0) break;
  }
  return best;
}

}  // namespace mrof
