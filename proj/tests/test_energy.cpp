#include <doctest.h>

#include <cmath>
#include <vector>

#include "mrof/energy.hpp"
#include "test_util.hpp"

using namespace mrof;
using test::point;
using test::vec;

namespace {

/// Test-side re-implementation of the discrete energy, written from the
/// stated quadrature directly (no shared code with energy()).
double brute_energy(const Manifold& m, const Grid& g, const Field& u, const Field& f,
                    const EnergyParams& p) {
  double total = 0;
  for (int n = 0; n < g.num_nodes(); ++n) {
    double q = 0;
    for (int e : g.stencil(n)) {
      const Edge& edge = g.edges()[static_cast<std::size_t>(e)];
      const double slope = m.dist(u[edge.a], u[edge.b]) / edge.length;
      q += slope * slope;
    }
    const double w = g.area_weights()[static_cast<std::size_t>(n)];
    const double d = m.dist(u[n], f[n]);
    total += w * (std::sqrt(q + p.eps * p.eps) + 0.5 * p.lambda * d * d + 0.5 * p.sigma * q);
  }
  return total;
}

Field random_field(const Manifold& m, const Grid& g, double radius, Rng& rng) {
  Field f;
  for (int i = 0; i < g.num_nodes(); ++i)
    f.values.push_back(m.random_in_ball(m.reference_point(), radius, rng));
  return f;
}

/// Directional finite differences of the energy along a tangent at one node.
double directional_fd(const Manifold& m, const Grid& g, const Field& u, const Field& f,
                      const EnergyParams& p, int node, const Tangent& dir, double h) {
  Field up = u, um = u;
  Tangent step = dir;
  step.v *= h;
  up[node] = m.exp(u[node], step);
  step.v *= -1.0;
  um[node] = m.exp(u[node], step);
  return (energy(m, g, up, f, p).total - energy(m, g, um, f, p).total) / (2 * h);
}

}  // namespace

TEST_CASE("energy on a constant field") {
  for (const Manifold& m : test::all_models()) {
    for (const char* spec : {"interval:8", "circle:8", "rect2d:4x4:rho=sphere_patch"}) {
      const Grid g = Grid::parse(spec);
      const Field f = Field::constant(g, m.reference_point());
      const EnergyParams p{2.0, 0.5, 0.3, 0};
      const EnergyBreakdown eb = energy(m, g, f, f, p);
      INFO(m.spec(), " on ", spec);
      CHECK(eb.tv == doctest::Approx(p.eps * g.total_area()).epsilon(1e-14));
      CHECK(eb.fidelity == 0.0);
      CHECK(eb.dirichlet == 0.0);
      CHECK(eb.total == doctest::Approx(eb.tv + eb.fidelity + eb.dirichlet).epsilon(1e-14));
    }
  }
}

TEST_CASE("two-node interval hand value, frozen from the stated quadrature") {
  // interval:2, u = (0,1), f = (0,0), lambda = 2, sigma = eps = 0, dx = 1:
  // node 0 (weight 1/2) sees slope 1 -> tv = 1/2; node 1 pays the fidelity
  // (2/2) * (1/2) * 1^2 = 1/2.
  const Manifold m = Manifold::euclidean(1);
  const Grid g = Grid::interval(2);
  Field u, f;
  u.values = {point({0.0}), point({1.0})};
  f.values = {point({0.0}), point({0.0})};
  const EnergyParams p{2.0, 0, 0, 0};
  const EnergyBreakdown eb = energy(m, g, u, f, p);
  CHECK(eb.tv == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eb.fidelity == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eb.total == doctest::Approx(brute_energy(m, g, u, f, p)).epsilon(1e-15));
}

TEST_CASE("tv approximates the arc length of a unit-speed great circle") {
  const Manifold m = Manifold::sphere(2);
  const Grid g = Grid::interval(64);
  const double length = 1.3;
  Field u;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double t = length * g.coords(i)[0];
    u.values.push_back(point({std::cos(t), std::sin(t), 0}));
  }
  const EnergyParams p{0, 0, 0, 0};
  const EnergyBreakdown eb = energy(m, g, u, u, p);
  CHECK(std::abs(eb.tv - length) / length <= 0.02);
}

TEST_CASE("energy matches the independent re-evaluation on random fields") {
  Rng rng(77);
  for (const Manifold& m : test::all_models()) {
    for (const char* spec : {"interval:6", "circle:5", "rect2d:3x3:rho=sphere_patch"}) {
      const Grid g = Grid::parse(spec);
      const Field u = random_field(m, g, 0.6, rng);
      const Field f = random_field(m, g, 0.6, rng);
      const EnergyParams p{1.5, 0.3, 0.2, 0};
      CHECK(energy(m, g, u, f, p).total ==
            doctest::Approx(brute_energy(m, g, u, f, p)).epsilon(1e-13));
    }
  }
}

TEST_CASE("gradient: zero at the global minimizer, restoring on perturbations") {
  const Manifold m = Manifold::euclidean(1);
  const Grid g = Grid::interval(9);
  const Field f = Field::constant(g, point({0.7}));
  const EnergyParams p{3.0, 0, 0.1, 0};
  const auto at_min = riemannian_gradient(m, g, f, f, p);
  for (const Tangent& t : at_min) CHECK(t.v.norm() <= 1e-14);

  Field u = f;
  u[4] = point({0.9});  // interior node pushed above the data
  const auto grad = riemannian_gradient(m, g, u, f, p);
  CHECK(grad[4].v[0] > 0);  // descent direction points back toward 0.7
}

TEST_CASE("gradient matches directional finite differences") {
  Rng rng(99);
  const double h = 1e-6;
  for (const Manifold& m : test::all_models()) {
    for (const char* spec : {"interval:5", "circle:5", "rect2d:3x3:rho=sphere_patch"}) {
      const Grid g = Grid::parse(spec);
      const Field u = random_field(m, g, 0.5, rng);
      const Field f = random_field(m, g, 0.5, rng);
      const EnergyParams p{1.2, 0.4, 0.15, 0};
      const auto grad = riemannian_gradient(m, g, u, f, p);
      for (int node = 0; node < g.num_nodes(); node += 2) {
        const Tangent dir = m.random_unit_tangent(u[node], rng);
        const double fd = directional_fd(m, g, u, f, p, node, dir, h);
        const double an = m.inner(u[node], grad[static_cast<std::size_t>(node)], dir);
        INFO(m.spec(), " on ", spec, " node ", node);
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("gradient requires positive eps") {
  const Manifold m = Manifold::euclidean(1);
  const Grid g = Grid::interval(3);
  const Field f = Field::constant(g, point({0.0}));
  CHECK_THROWS_AS(riemannian_gradient(m, g, f, f, EnergyParams{1, 0, 0, 0}),
                  RequiresPositiveEps);
}

TEST_CASE("el_residual") {
  const Manifold m = Manifold::sphere(2);
  const Grid g = Grid::interval(7);
  const EnergyParams p{2.0, 0.1, 0.2, 0};

  SUBCASE("vanishes on constant u = f") {
    const Field f = Field::constant(g, point({0, 0, 1}));
    CHECK(el_residual(m, g, f, f, p).norm <= 1e-14);
  }
  SUBCASE("doubling lambda doubles the fidelity contribution") {
    Rng rng(12);
    const Field u = random_field(m, g, 0.4, rng);
    const Field f = random_field(m, g, 0.4, rng);
    const EnergyParams tv_only{1e-30, p.sigma, p.eps, 0};
    const auto base = el_residual(m, g, u, f, EnergyParams{1.0, p.sigma, p.eps, 0});
    const auto doubled = el_residual(m, g, u, f, EnergyParams{2.0, p.sigma, p.eps, 0});
    const auto none = el_residual(m, g, u, f, tv_only);
    for (int n = 0; n < g.num_nodes(); ++n) {
      const Vec fid1 = base.residual[static_cast<std::size_t>(n)].v -
                       none.residual[static_cast<std::size_t>(n)].v;
      const Vec fid2 = doubled.residual[static_cast<std::size_t>(n)].v -
                       none.residual[static_cast<std::size_t>(n)].v;
      CHECK((fid2 - 2.0 * fid1).norm() <= 1e-12 * std::max(1.0, fid1.norm()));
    }
  }
}

TEST_CASE("energy is invariant under target isometries, gradients map along") {
  const Grid g = Grid::circle(9);
  Rng rng(21);
  const EnergyParams p{1.3, 0.2, 0.1, 0};

  SUBCASE("sphere rotation") {
    const Manifold m = Manifold::sphere(2);
    const Field u = random_field(m, g, 0.6, rng);
    const Field f = random_field(m, g, 0.6, rng);
    const double a = 0.8;
    auto rotate = [&](const Point& q) {
      return point({q.x[0], std::cos(a) * q.x[1] - std::sin(a) * q.x[2],
                    std::sin(a) * q.x[1] + std::cos(a) * q.x[2]});
    };
    Field ru, rf;
    for (int i = 0; i < g.num_nodes(); ++i) {
      ru.values.push_back(rotate(u[i]));
      rf.values.push_back(rotate(f[i]));
    }
    CHECK(energy(m, g, ru, rf, p).total ==
          doctest::Approx(energy(m, g, u, f, p).total).epsilon(1e-12));
    const auto grad = riemannian_gradient(m, g, u, f, p);
    const auto rgrad = riemannian_gradient(m, g, ru, rf, p);
    for (int i = 0; i < g.num_nodes(); ++i) {
      const Vec mapped = rotate(Point{grad[static_cast<std::size_t>(i)].v}).x;
      CHECK((rgrad[static_cast<std::size_t>(i)].v - mapped).norm() <=
            1e-11 * std::max(1.0, mapped.norm()));
    }
  }

  SUBCASE("hyperbolic Lorentz boost") {
    const Manifold m = Manifold::hyperbolic(2);
    const Field u = random_field(m, g, 1.0, rng);
    const Field f = random_field(m, g, 1.0, rng);
    const double a = 0.5;
    auto boost = [&](const Point& q) {
      return point({std::cosh(a) * q.x[0] + std::sinh(a) * q.x[1],
                    std::sinh(a) * q.x[0] + std::cosh(a) * q.x[1], q.x[2]});
    };
    Field bu, bf;
    for (int i = 0; i < g.num_nodes(); ++i) {
      bu.values.push_back(boost(u[i]));
      bf.values.push_back(boost(f[i]));
    }
    CHECK(energy(m, g, bu, bf, p).total ==
          doctest::Approx(energy(m, g, u, f, p).total).epsilon(1e-12));
  }
}

TEST_CASE("tv is nondecreasing in eps with the stated bound") {
  const Manifold m = Manifold::hyperbolic(2);
  const Grid g = Grid::interval(10);
  Rng rng(31);
  const Field u = random_field(m, g, 0.8, rng);
  const Field f = u;
  double prev = energy(m, g, u, f, EnergyParams{0, 0, 0, 0}).tv;
  const double tv0 = prev;
  for (double eps : {0.01, 0.05, 0.2, 0.7}) {
    const double tv = energy(m, g, u, f, EnergyParams{0, 0, eps, 0}).tv;
    CHECK(tv >= prev);
    CHECK(tv - tv0 <= eps * g.total_area() + 1e-14);
    prev = tv;
  }
}

TEST_CASE("coefficient functions of the chart system") {
  SUBCASE("xi = 0") {
    const std::vector<double> xi(4, 0.0);
    const Coefficients c = coefficients(1.0, xi, 0.25, 0.1);
    CHECK(c.b == doctest::Approx(4.0).epsilon(1e-15));  // 1/eps
    for (double a : c.a) CHECK(a == 0.0);
  }
  SUBCASE("large |xi| asymptotics at rho = 1") {
    std::vector<double> xi{3e6, -4e6};
    const Coefficients c = coefficients(1.0, xi, 0.5, 0.7);
    CHECK(c.b <= 1.0 / 5e6 * (1 + 1e-12));
    double an = 0;
    for (double a : c.a) an += a * a;
    CHECK(std::sqrt(an) == doctest::Approx(0.7 * 5e6).epsilon(1e-6));
  }
  SUBCASE("H1 bound |a| <= (C/eps + sigma)|xi| on random draws") {
    Rng rng(41);
    const double eps = 0.3, sigma = 0.2;
    for (int trial = 0; trial < 200; ++trial) {
      const double rho = 0.5 + 1.5 * rng.uniform();
      std::vector<double> xi(6);
      for (double& v : xi) v = std::pow(10.0, rng.uniform(-3, 3)) * rng.normal();
      const Coefficients c = coefficients(rho, xi, eps, sigma);
      double an = 0, xn = 0;
      for (std::size_t i = 0; i < xi.size(); ++i) {
        an += c.a[i] * c.a[i];
        xn += xi[i] * xi[i];
      }
      CHECK(std::sqrt(an) <= (2.0 / eps + sigma) * std::sqrt(xn) * (1 + 1e-12));
    }
  }
}

TEST_CASE("H2 quadratic form agrees with finite differences of a") {
  Rng rng(55);
  const double eps = 0.2, sigma = 0.3;
  const ConformalFactor preset = conformal_preset("sphere_patch");
  const double rho = preset(0.3, 0.3);  // != 1, exercises the eps^2 rho^2 term
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xi(4), eta(4);
    for (double& v : xi) v = rng.normal();
    for (double& v : eta) v = rng.normal();

    // d/dt <a(xi + t eta), eta> at t = 0 equals the H2 form.
    const double h = 1e-6;
    std::vector<double> xp(4), xm(4);
    for (std::size_t i = 0; i < 4; ++i) {
      xp[i] = xi[i] + h * eta[i];
      xm[i] = xi[i] - h * eta[i];
    }
    const Coefficients cp = coefficients(rho, xp, eps, sigma);
    const Coefficients cm = coefficients(rho, xm, eps, sigma);
    double fd = 0;
    for (std::size_t i = 0; i < 4; ++i) fd += (cp.a[i] - cm.a[i]) * eta[i] / (2 * h);

    HypothesisSample s;
    s.x = {0.3, 0.3};
    s.y = {0.3, 0.3};
    s.xi = xi;
    s.eta = eta;
    const HypothesisReport hr =
        check_hypotheses(preset, std::vector<HypothesisSample>{s}, eps, sigma);
    double eta2 = 0;
    for (double v : eta) eta2 += v * v;
    const double form = hr.margins[0].h2 + sigma * eta2;
    CHECK(form == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("hypothesis margins") {
  const double eps = 0.25, sigma = 0.4;
  const ConformalFactor rho = conformal_preset("sphere_patch");

  SUBCASE("xi = eta gives zero H3 slack") {
    HypothesisSample s;
    s.x = {0.2, 0.8};
    s.y = {0.6, 0.1};
    s.xi = {1.0, -2.0, 0.5, 0.0};
    s.eta = s.xi;
    const HypothesisReport hr =
        check_hypotheses(rho, std::vector<HypothesisSample>{s}, eps, sigma);
    CHECK(hr.margins[0].h3 == doctest::Approx(0.0));
    CHECK(hr.violations == 0);
  }

  SUBCASE("eta orthogonal to xi: H2 form is (b + sigma)|eta|^2") {
    HypothesisSample s;
    s.x = {0.0, 0.0};
    s.y = {0.0, 0.0};
    s.xi = {1.0, 0.0};
    s.eta = {0.0, 2.0};
    const ConformalFactor flat = conformal_preset("flat");
    const HypothesisReport hr =
        check_hypotheses(flat, std::vector<HypothesisSample>{s}, eps, sigma);
    const Coefficients c = coefficients(1.0, s.xi, eps, sigma);
    CHECK(hr.margins[0].h2 == doctest::Approx(c.b * 4.0).epsilon(1e-13));
    CHECK(hr.margins[0].h2 >= 0.0);
  }

  SUBCASE("1e4-sample Monte-Carlo sweep has zero violations") {
    Rng rng(71);
    std::vector<HypothesisSample> batch(10000);
    for (HypothesisSample& s : batch) {
      s.x = {rng.uniform(), rng.uniform()};
      s.y = {rng.uniform(), rng.uniform()};
      const int dim = 2 * (1 + rng.uniform_int(3));
      s.xi.resize(static_cast<std::size_t>(dim));
      s.eta.resize(static_cast<std::size_t>(dim));
      const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
      for (double& v : s.xi) v = scale * rng.normal();
      for (double& v : s.eta) v = scale * rng.normal();
    }
    const HypothesisReport hr = check_hypotheses(rho, batch, eps, sigma);
    CHECK(hr.violations == 0);
  }
}

TEST_CASE("H7 fidelity bound on in-ball inputs") {
  // t(x,p) = -lambda rho^2 exp_p^{-1} f has |t| <= lambda max_rho^2 2R, and
  // |p| = 1 on the unit sphere, so C = 2 lambda max_rho^2 R works.
  const Manifold m = Manifold::sphere(2);
  Rng rng(81);
  const double lambda = 1.7, R = 0.5;
  const ConformalFactor rho = conformal_preset("sphere_patch");
  const double C = 2.0 * lambda * rho.max_value * rho.max_value * R;
  const Point c = m.reference_point();
  for (int trial = 0; trial < 200; ++trial) {
    const Point p = m.random_in_ball(c, R, rng);
    const Point f = m.random_in_ball(c, R, rng);
    const double rho_x = rho(rng.uniform(), rng.uniform());
    const double t_norm = lambda * rho_x * rho_x * m.norm(p, m.log(p, f));
    CHECK(t_norm <= C * p.x.norm() * (1 + 1e-12));
  }
}
