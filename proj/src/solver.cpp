#include "mrof/solver.hpp"

#include <algorithm>
#include <cmath>

#include "mrof/errors.hpp"
#include "mrof/geometry.hpp"

namespace mrof {

namespace {

Point equal_weight_barycenter(const Manifold& m, const Field& f) {
  WeightedPoints wp;
  wp.points = f.values;
  wp.weights.assign(f.values.size(), 1.0 / static_cast<double>(f.values.size()));
  return barycenter(m, wp, 1e-9, 500);
}

double max_gradient_norm(const Manifold& m, const Field& u, const std::vector<Tangent>& g) {
  double gn = 0;
  for (int i = 0; i < u.size(); ++i)
    gn = std::max(gn, m.norm(u[i], g[static_cast<std::size_t>(i)]));
  return gn;
}

double gradient_norm2(const Manifold& m, const Field& u, const std::vector<Tangent>& g) {
  double s = 0;
  for (int i = 0; i < u.size(); ++i) {
    const Tangent& t = g[static_cast<std::size_t>(i)];
    s += m.inner(u[i], t, t);
  }
  return s;
}

/// Local neighborhood of a node: the stencil nodes whose |du|^2 involve it,
/// and the union of their stencil edges.
struct NodeNeighborhood {
  std::vector<int> stencil_nodes;
  std::vector<int> edges;
};

std::vector<NodeNeighborhood> build_neighborhoods(const Grid& grid) {
  const int n = grid.num_nodes();
  std::vector<NodeNeighborhood> nb(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nb[static_cast<std::size_t>(i)].stencil_nodes.push_back(i);
  const auto& edges = grid.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    nb[static_cast<std::size_t>(edges[e].b)].stencil_nodes.push_back(edges[e].a);
  for (int i = 0; i < n; ++i) {
    auto& entry = nb[static_cast<std::size_t>(i)];
    std::sort(entry.stencil_nodes.begin(), entry.stencil_nodes.end());
    entry.stencil_nodes.erase(std::unique(entry.stencil_nodes.begin(), entry.stencil_nodes.end()),
                              entry.stencil_nodes.end());
    for (int a : entry.stencil_nodes)
      for (int e : grid.stencil(a)) entry.edges.push_back(e);
  }
  return nb;
}

/// Shared solve state: per-edge geodesic differences and per-node |du|^2,
/// kept current across global steps and local polish moves.
struct SolveState {
  const Manifold& m;
  const Grid& grid;
  const Field& f;
  const EnergyParams& params;
  Field u;
  std::vector<double> edge_dist;
  std::vector<double> q;

  SolveState(const Manifold& m_, const Grid& grid_, const Field& f_, const EnergyParams& p_,
             Field u0)
      : m(m_), grid(grid_), f(f_), params(p_), u(std::move(u0)) {
    edge_dist.resize(grid.edges().size());
    q.resize(static_cast<std::size_t>(grid.num_nodes()));
    refresh();
  }

  void refresh() {
    const auto& edges = grid.edges();
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = edges[e];
      const double d = m.dist(u[edge.a], u[edge.b]);
      edge_dist[e] = d;
      const double slope = d / edge.length;
      q[static_cast<std::size_t>(edge.a)] += slope * slope;
    }
  }

  EnergyBreakdown total_energy() const {
    EnergyBreakdown out;
    const auto& w = grid.area_weights();
    for (int n = 0; n < grid.num_nodes(); ++n) {
      const double d = params.lambda > 0 ? m.dist(u[n], f[n]) : 0.0;
      out.tv += w[static_cast<std::size_t>(n)] *
                std::sqrt(q[static_cast<std::size_t>(n)] + params.eps * params.eps);
      out.fidelity += 0.5 * params.lambda * w[static_cast<std::size_t>(n)] * d * d;
      out.dirichlet += 0.5 * params.sigma * w[static_cast<std::size_t>(n)] * q[static_cast<std::size_t>(n)];
    }
    out.total = out.tv + out.fidelity + out.dirichlet;
    return out;
  }

  std::vector<Tangent> gradient() const {
    const auto& w = grid.area_weights();
    const auto& edges = grid.edges();
    const int nn = grid.num_nodes();
    std::vector<Tangent> grad(static_cast<std::size_t>(nn));
    for (int n = 0; n < nn; ++n)
      grad[static_cast<std::size_t>(n)] = Tangent{u[n], Vec::zero(m.ambient_dim())};
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = edges[e];
      if (edge_dist[e] == 0.0) continue;
      const double c = w[static_cast<std::size_t>(edge.a)] *
                       (1.0 / std::sqrt(q[static_cast<std::size_t>(edge.a)] +
                                        params.eps * params.eps) +
                        params.sigma);
      const double coef = c / (edge.length * edge.length);
      grad[static_cast<std::size_t>(edge.a)].v.axpy(-coef, m.log(u[edge.a], u[edge.b]).v);
      grad[static_cast<std::size_t>(edge.b)].v.axpy(-coef, m.log(u[edge.b], u[edge.a]).v);
    }
    for (int n = 0; n < nn; ++n)
      grad[static_cast<std::size_t>(n)].v.axpy(-params.lambda * w[static_cast<std::size_t>(n)],
                                               m.log(u[n], f[n]).v);
    return grad;
  }

  /// Local tv + dirichlet + fidelity over the neighborhood of one node, with
  /// q recomputed from scratch for the affected stencil nodes. `candidate`
  /// substitutes for u[node].
  EnergyBreakdown local_energy(const NodeNeighborhood& nb, int node,
                               const Point& candidate) const {
    const auto& w = grid.area_weights();
    const auto& edges = grid.edges();
    EnergyBreakdown out;
    std::size_t edge_cursor = 0;
    for (int a : nb.stencil_nodes) {
      double qa = 0;
      for (; edge_cursor < nb.edges.size(); ++edge_cursor) {
        const Edge& edge = edges[static_cast<std::size_t>(nb.edges[edge_cursor])];
        if (edge.a != a) break;
        const Point& pa = (edge.a == node) ? candidate : u[edge.a];
        const Point& pb = (edge.b == node) ? candidate : u[edge.b];
        const double slope = m.dist(pa, pb) / edge.length;
        qa += slope * slope;
      }
      out.tv += w[static_cast<std::size_t>(a)] * std::sqrt(qa + params.eps * params.eps);
      out.dirichlet += 0.5 * params.sigma * w[static_cast<std::size_t>(a)] * qa;
    }
    const double d = params.lambda > 0 ? m.dist(candidate, f[node]) : 0.0;
    out.fidelity = 0.5 * params.lambda * w[static_cast<std::size_t>(node)] * d * d;
    out.total = out.tv + out.fidelity + out.dirichlet;
    return out;
  }

  /// Gradient at a single node from the current state, plus a diagonal
  /// curvature estimate for the first trial step.
  std::pair<Tangent, double> local_gradient(const NodeNeighborhood& nb, int node) const {
    const auto& w = grid.area_weights();
    const auto& edges = grid.edges();
    Tangent g{u[node], Vec::zero(m.ambient_dim())};
    double curv = params.lambda * w[static_cast<std::size_t>(node)];
    for (int e : nb.edges) {
      const Edge& edge = edges[static_cast<std::size_t>(e)];
      if (edge.a != node && edge.b != node) continue;
      const double c = w[static_cast<std::size_t>(edge.a)] *
                       (1.0 / std::sqrt(q[static_cast<std::size_t>(edge.a)] +
                                        params.eps * params.eps) +
                        params.sigma);
      const double coef = c / (edge.length * edge.length);
      curv += coef;
      if (edge_dist[static_cast<std::size_t>(e)] == 0.0) continue;
      const int other = (edge.a == node) ? edge.b : edge.a;
      g.v.axpy(-coef, m.log(u[node], u[other]).v);
    }
    g.v.axpy(-params.lambda * w[static_cast<std::size_t>(node)], m.log(u[node], f[node]).v);
    return {g, curv};
  }

  /// Commits a new value at `node`, updating the cached edge distances and
  /// stencil densities.
  void set_node(const NodeNeighborhood& nb, int node, const Point& value) {
    const auto& edges = grid.edges();
    u[node] = value;
    for (int e : nb.edges) {
      const Edge& edge = edges[static_cast<std::size_t>(e)];
      if (edge.a != node && edge.b != node) continue;
      const double old_slope = edge_dist[static_cast<std::size_t>(e)] / edge.length;
      const double d = m.dist(u[edge.a], u[edge.b]);
      edge_dist[static_cast<std::size_t>(e)] = d;
      const double slope = d / edge.length;
      q[static_cast<std::size_t>(edge.a)] += slope * slope - old_slope * old_slope;
      q[static_cast<std::size_t>(edge.a)] = std::max(0.0, q[static_cast<std::size_t>(edge.a)]);
    }
  }
};

}  // namespace

std::pair<Field, SolveReport> minimize(const Manifold& m, const Grid& grid, const Field& f,
                                       const EnergyParams& params, const SolveConfig& cfg,
                                       const Field* u0) {
  if (!(params.eps > 0)) throw RequiresPositiveEps("minimize needs eps > 0");
  if (!(cfg.armijo_c > 0 && cfg.armijo_c < 1)) throw DomainError("armijo_c must be in (0,1)");
  if (!(cfg.step_shrink > 0 && cfg.step_shrink < 1))
    throw DomainError("step_shrink must be in (0,1)");
  if (!(cfg.grad_tol > 0)) throw DomainError("grad_tol must be positive");
  require_same_shape(m, grid, f);
  if (u0) require_same_shape(m, grid, *u0);

  SolveReport report;
  const Point center = equal_weight_barycenter(m, f);
  report.range_radius = max_dist_from(m, center, f);
  if (report.range_radius >= m.convexity_radius())
    throw RangeViolation("minimize: f does not fit in a ball below the convexity radius");
  report.flags.range_warning = report.range_radius >= m.strong_radius();

  SolveState state(m, grid, f, params, u0 ? *u0 : f);
  report.range_max_dist = max_dist_from(m, center, state.u);

  EnergyBreakdown eb = state.total_energy();
  report.energy_trace.push_back(eb);

  std::vector<Tangent> grad = state.gradient();
  double gn2 = gradient_norm2(m, state.u, grad);
  double gmax = max_gradient_norm(m, state.u, grad);
  const double anchor_limit = 0.9 * m.inj();

  double trial_step = cfg.step_init;
  Field u_new;
  u_new.values.resize(state.u.values.size());

  int iter = 0;
  bool stalled = false;
  // Phase 1: full-field descent with Barzilai-Borwein trial steps and Armijo
  // backtracking.
  for (; iter < cfg.max_iter && !stalled; ++iter) {
    if (gmax <= cfg.grad_tol) break;

    double t = trial_step;
    bool accepted = false;
    EnergyBreakdown eb_new{};
    while (t >= 1e-18) {
      bool guard_hit = false;
      for (int i = 0; i < state.u.size(); ++i) {
        Tangent dir = grad[static_cast<std::size_t>(i)];
        dir.v *= -t;
        u_new[i] = m.exp(state.u[i], dir);
        if (std::isfinite(anchor_limit) && m.dist(u_new[i], f[i]) > anchor_limit) {
          guard_hit = true;
          break;
        }
      }
      if (guard_hit) {
        report.flags.cut_locus_guard_triggered = true;
        t *= cfg.step_shrink;
        continue;
      }
      eb_new = energy(m, grid, u_new, f, params);
      if (eb_new.total <= eb.total - cfg.armijo_c * t * gn2) {
        accepted = true;
        break;
      }
      t *= cfg.step_shrink;
    }
    if (!accepted) {
      stalled = true;  // decrease is below the global summation noise floor
      break;
    }

    std::swap(state.u.values, u_new.values);
    state.refresh();
    eb = eb_new;
    report.energy_trace.push_back(eb);
    report.range_max_dist = std::max(report.range_max_dist, max_dist_from(m, center, state.u));

    std::vector<Tangent> grad_new = state.gradient();

    // Barzilai-Borwein trial step for the next iteration, with tangent
    // coordinates read as ambient vectors (Armijo safeguards the heuristic).
    double ss = 0, sy = 0;
    for (int i = 0; i < state.u.size(); ++i) {
      const Vec& go = grad[static_cast<std::size_t>(i)].v;
      const Vec& gn = grad_new[static_cast<std::size_t>(i)].v;
      for (int k = 0; k < go.size(); ++k) {
        const double s = -t * go[k];
        ss += s * s;
        sy += s * (gn[k] - go[k]);
      }
    }
    trial_step = (sy > 0 && std::isfinite(sy)) ? std::clamp(ss / sy, 1e-14, 1e6) : 2.0 * t;

    grad = std::move(grad_new);
    gn2 = gradient_norm2(m, state.u, grad);
    gmax = max_gradient_norm(m, state.u, grad);
  }

  // Phase 2: Gauss-Seidel polish. Local energy deltas see only a handful of
  // terms, so single stiff nodes can still make progress when the full-field
  // decrease has dropped below the noise of the global sum.
  if (stalled && gmax > cfg.grad_tol) {
    const std::vector<NodeNeighborhood> neighborhoods = build_neighborhoods(grid);
    EnergyBreakdown running = eb;
    for (; iter < cfg.max_iter; ++iter) {
      if (gmax <= cfg.grad_tol) break;
      bool any_move = false;
      for (int node = 0; node < grid.num_nodes(); ++node) {
        const NodeNeighborhood& nb = neighborhoods[static_cast<std::size_t>(node)];
        const Tangent g = state.local_gradient(nb, node);
        const double gn_local2 = m.inner(state.u[node], g, g);
        if (gn_local2 == 0.0) continue;
        const EnergyBreakdown before = state.local_energy(nb, node, state.u[node]);
        double t = 1.0 / (1.0 / params.eps + params.sigma + params.lambda + 1.0);
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
          Tangent dir = g;
          dir.v *= -t;
          const Point candidate = m.exp(state.u[node], dir);
          if (std::isfinite(anchor_limit) && m.dist(candidate, f[node]) > anchor_limit) {
            report.flags.cut_locus_guard_triggered = true;
            t *= cfg.step_shrink;
            continue;
          }
          const EnergyBreakdown after = state.local_energy(nb, node, candidate);
          if (after.total <= before.total - cfg.armijo_c * t * gn_local2) {
            state.set_node(nb, node, candidate);
            running.tv += after.tv - before.tv;
            running.fidelity += after.fidelity - before.fidelity;
            running.dirichlet += after.dirichlet - before.dirichlet;
            running.total = running.tv + running.fidelity + running.dirichlet;
            any_move = true;
            break;
          }
          t *= cfg.step_shrink;
        }
      }
      if (!any_move) break;
      if (running.total < report.energy_trace.back().total)
        report.energy_trace.push_back(running);
      report.range_max_dist = std::max(report.range_max_dist, max_dist_from(m, center, state.u));
      grad = state.gradient();
      gmax = max_gradient_norm(m, state.u, grad);
    }
  }

  report.iterations = iter;
  report.flags.converged = gmax <= cfg.grad_tol;
  report.flags.max_iter = !report.flags.converged;
  report.final_grad_norm = gmax;
  report.final_residual_norm = el_residual(m, grid, state.u, f, params).norm;
  report.lipschitz_of_u = lipschitz_constant(m, grid, state.u);
  return {std::move(state.u), std::move(report)};
}

ContinuationResult continuation(const Manifold& m, const Grid& grid, const Field& f,
                                double lambda, const std::vector<ContinuationStage>& schedule,
                                const SolveConfig& cfg) {
  if (schedule.empty()) throw DomainError("continuation: empty schedule");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k].eps > 0)) throw DomainError("continuation: eps must stay positive");
    if (schedule[k].sigma < 0 || schedule[k].delta < 0)
      throw DomainError("continuation: negative schedule entry");
    if (k > 0 && (schedule[k].eps > schedule[k - 1].eps ||
                  schedule[k].sigma > schedule[k - 1].sigma ||
                  schedule[k].delta > schedule[k - 1].delta))
      throw DomainError("continuation: schedule must be nonincreasing in every component");
  }

  ContinuationResult out;
  Field u = f;
  for (const ContinuationStage& stage : schedule) {
    EnergyParams params{lambda, stage.sigma, stage.eps, stage.delta};
    const Field f_stage = stage.delta > 0 ? mollify(m, grid, f, stage.delta) : f;
    auto [u_next, report] = minimize(m, grid, f_stage, params, cfg, &u);
    u = std::move(u_next);
    out.stages.push_back(std::move(report));
  }
  out.u = std::move(u);

  out.max_lipschitz = 0;
  for (const SolveReport& r : out.stages)
    out.max_lipschitz = std::max(out.max_lipschitz, r.lipschitz_of_u);
  out.lipschitz_bound = 1.05 * out.stages.front().lipschitz_of_u + 1e-12;
  out.lipschitz_bounded = m.kappa_hi() > 0 || out.max_lipschitz <= out.lipschitz_bound;
  return out;
}

std::vector<ContinuationStage> default_schedule(const Grid& grid, bool tie_sigma,
                                                bool mollify_first) {
  std::vector<ContinuationStage> stages;
  double eps = 1e-1;
  for (int k = 0; k < 6; ++k) {
    ContinuationStage s;
    s.eps = eps;
    s.sigma = tie_sigma ? eps : 0.0;
    s.delta = (k == 0 && mollify_first) ? 2.0 * grid.spacing() : 0.0;
    stages.push_back(s);
    eps *= 0.25;
  }
  return stages;
}

}  // namespace mrof
