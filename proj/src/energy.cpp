#include "mrof/energy.hpp"

#include <algorithm>
#include <cmath>

#include "mrof/errors.hpp"

namespace mrof {

namespace {

void require_inputs(const Manifold& m, const Grid& grid, const Field& u, const Field& f) {
  require_same_shape(m, grid, u);
  require_same_shape(m, grid, f);
}

/// Per-node squared gradient |du|^2_n and per-edge geodesic differences.
struct GradientDensity {
  std::vector<double> edge_dist;
  std::vector<double> q;
};

GradientDensity gradient_density(const Manifold& m, const Grid& grid, const Field& u) {
  GradientDensity gd;
  const auto& edges = grid.edges();
  gd.edge_dist.resize(edges.size());
  gd.q.assign(static_cast<std::size_t>(grid.num_nodes()), 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const double d = m.dist(u[edge.a], u[edge.b]);
    gd.edge_dist[e] = d;
    const double slope = d / edge.length;
    gd.q[static_cast<std::size_t>(edge.a)] += slope * slope;
  }
  return gd;
}

}  // namespace

EnergyBreakdown energy(const Manifold& m, const Grid& grid, const Field& u, const Field& f,
                       const EnergyParams& params) {
  require_inputs(m, grid, u, f);
  const GradientDensity gd = gradient_density(m, grid, u);
  const auto& w = grid.area_weights();
  EnergyBreakdown out;
  const bool check_anchor = params.lambda > 0 && std::isfinite(m.inj());
  for (int n = 0; n < grid.num_nodes(); ++n) {
    const double d = params.lambda > 0 ? m.dist(u[n], f[n]) : 0.0;
    if (check_anchor && d >= m.inj() * (1.0 - 1e-12))
      throw CutLocusReached("energy: dist(u, f) reached the injectivity radius");
    const double q = gd.q[static_cast<std::size_t>(n)];
    out.tv += w[static_cast<std::size_t>(n)] * std::sqrt(q + params.eps * params.eps);
    out.fidelity += 0.5 * params.lambda * w[static_cast<std::size_t>(n)] * d * d;
    out.dirichlet += 0.5 * params.sigma * w[static_cast<std::size_t>(n)] * q;
  }
  out.total = out.tv + out.fidelity + out.dirichlet;
  return out;
}

std::vector<Tangent> riemannian_gradient(const Manifold& m, const Grid& grid, const Field& u,
                                         const Field& f, const EnergyParams& params) {
  if (!(params.eps > 0))
    throw RequiresPositiveEps("riemannian_gradient needs eps > 0 (subgradient regime)");
  require_inputs(m, grid, u, f);
  const GradientDensity gd = gradient_density(m, grid, u);
  const auto& w = grid.area_weights();
  const int nn = grid.num_nodes();

  // c_n = w_n (1/sqrt(q_n + eps^2) + sigma): the derivative of
  // w_n [sqrt(q + eps^2) + (sigma/2) q] with respect to q_n, times two.
  std::vector<double> c(static_cast<std::size_t>(nn));
  for (int n = 0; n < nn; ++n)
    c[static_cast<std::size_t>(n)] =
        w[static_cast<std::size_t>(n)] *
        (1.0 / std::sqrt(gd.q[static_cast<std::size_t>(n)] + params.eps * params.eps) +
         params.sigma);

  std::vector<Tangent> grad(static_cast<std::size_t>(nn));
  for (int n = 0; n < nn; ++n) grad[static_cast<std::size_t>(n)] = Tangent{u[n], Vec::zero(m.ambient_dim())};

  const auto& edges = grid.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const double coef = c[static_cast<std::size_t>(edge.a)] / (edge.length * edge.length);
    if (gd.edge_dist[e] == 0.0) continue;  // log is zero on coincident values
    grad[static_cast<std::size_t>(edge.a)].v.axpy(-coef, m.log(u[edge.a], u[edge.b]).v);
    grad[static_cast<std::size_t>(edge.b)].v.axpy(-coef, m.log(u[edge.b], u[edge.a]).v);
  }
  for (int n = 0; n < nn; ++n)
    grad[static_cast<std::size_t>(n)].v.axpy(-params.lambda * w[static_cast<std::size_t>(n)],
                                             m.log(u[n], f[n]).v);
  return grad;
}

ElResidual el_residual(const Manifold& m, const Grid& grid, const Field& u, const Field& f,
                       const EnergyParams& params) {
  ElResidual out;
  out.residual = riemannian_gradient(m, grid, u, f, params);
  const auto& w = grid.area_weights();
  for (int n = 0; n < grid.num_nodes(); ++n) {
    Tangent& r = out.residual[static_cast<std::size_t>(n)];
    r.v *= -1.0 / w[static_cast<std::size_t>(n)];
    out.norm = std::max(out.norm, m.norm(u[n], r));
  }
  return out;
}

Coefficients coefficients(double rho, std::span<const double> xi, double eps, double sigma) {
  if (!(rho > 0)) throw DomainError("coefficients: rho must be positive");
  if (!(eps > 0)) throw DomainError("coefficients: eps must be positive");
  double xi2 = 0;
  for (double v : xi) xi2 += v * v;
  Coefficients out;
  out.b = rho / std::sqrt(xi2 + eps * eps * rho * rho);
  out.a.resize(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out.a[i] = (out.b + sigma) * xi[i];
  return out;
}

double ConformalFactor::operator()(double x, double y) const {
  if (name == "flat") return 1.0;
  return 2.0 / (1.0 + x * x + y * y);  // sphere_patch
}

ConformalFactor conformal_preset(std::string_view name) {
  if (name == "flat") return ConformalFactor{"flat", 1.0, 1.0, 0.0};
  if (name == "sphere_patch") {
    // On [0,1]^2: max at the origin, min at (1,1); |grad rho| = 4t/(1+t^2)^2
    // peaks at t = 1/sqrt(3).
    return ConformalFactor{"sphere_patch", 2.0 / 3.0, 2.0, 9.0 / (4.0 * std::sqrt(3.0))};
  }
  throw ParseError("unknown conformal preset '" + std::string(name) + "'");
}

namespace {

double norm_of(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

HypothesisReport check_hypotheses(const ConformalFactor& rho,
                                  std::span<const HypothesisSample> samples, double eps,
                                  double sigma) {
  HypothesisReport report;
  report.margins.reserve(samples.size());
  bool first = true;
  for (const HypothesisSample& s : samples) {
    const double rx = rho(s.x[0], s.x[1]);
    const double ry = rho(s.y[0], s.y[1]);
    const Coefficients ax = coefficients(rx, s.xi, eps, sigma);
    const Coefficients ax_eta = coefficients(rx, s.eta, eps, sigma);
    const Coefficients ay = coefficients(ry, s.xi, eps, sigma);

    HypothesisMargins mg;
    const double xi_norm = norm_of(s.xi);
    const double eta_norm = norm_of(s.eta);

    // H1: |a(x,xi)| <= (C/eps + sigma)|xi| with C = max rho.
    mg.h1 = (rho.max_value / eps + sigma) * xi_norm - norm_of(ax.a);

    // H2: the quadratic form of Da(x,xi) applied to eta,
    //   (b + sigma)|eta|^2 - b (xi.eta)^2 / (|xi|^2 + eps^2 rho^2),
    // stays above sigma |eta|^2.
    double xi_eta = 0, xi2 = 0;
    for (std::size_t i = 0; i < s.xi.size(); ++i) {
      xi_eta += s.xi[i] * s.eta[i];
      xi2 += s.xi[i] * s.xi[i];
    }
    const double form = (ax.b + sigma) * eta_norm * eta_norm -
                        ax.b * xi_eta * xi_eta / (xi2 + eps * eps * rx * rx);
    mg.h2 = form - sigma * eta_norm * eta_norm;

    // H3: monotonicity <a(x,xi) - a(x,eta), xi - eta> >= sigma |xi - eta|^2.
    double mono = 0;
    for (std::size_t i = 0; i < s.xi.size(); ++i)
      mono += (ax.a[i] - ax_eta.a[i]) * (s.xi[i] - s.eta[i]);
    const double dn = diff_norm(s.xi, s.eta);
    mg.h3 = mono - sigma * dn * dn;

    // H4: coercivity <a(x,xi), xi> >= sigma |xi|^2.
    double coer = 0;
    for (std::size_t i = 0; i < s.xi.size(); ++i) coer += ax.a[i] * s.xi[i];
    mg.h4 = coer - sigma * xi_norm * xi_norm;

    // H5: |a(x,xi) - a(y,xi)| <= Lip(rho) |x - y|.
    const double dxy = std::hypot(s.x[0] - s.y[0], s.x[1] - s.y[1]);
    mg.h5 = rho.lipschitz * dxy - diff_norm(ax.a, ay.a);

    // H6: |a(x,xi) - a(x,eta)| <= (1/eps + sigma)|xi - eta|.
    mg.h6 = (1.0 / eps + sigma) * dn - diff_norm(ax.a, ax_eta.a);

    for (double v : {mg.h1, mg.h2, mg.h3, mg.h4, mg.h5, mg.h6})
      if (v < -1e-12) ++report.violations;
    if (first) {
      report.min_margins = mg;
      first = false;
    } else {
      report.min_margins.h1 = std::min(report.min_margins.h1, mg.h1);
      report.min_margins.h2 = std::min(report.min_margins.h2, mg.h2);
      report.min_margins.h3 = std::min(report.min_margins.h3, mg.h3);
      report.min_margins.h4 = std::min(report.min_margins.h4, mg.h4);
      report.min_margins.h5 = std::min(report.min_margins.h5, mg.h5);
      report.min_margins.h6 = std::min(report.min_margins.h6, mg.h6);
    }
    report.margins.push_back(mg);
  }
  return report;
}

}  // namespace mrof
