#include <doctest.h>

#include <cmath>

#include "mrof/geometry.hpp"
#include "test_util.hpp"

using namespace mrof;
using test::point;
using test::vec;

namespace {

/// Independent 1-D oracle for the two-point barycenter: golden-section
/// minimization of the Karcher functional along the geodesic from p to q.
double golden_section_midpoint(const Manifold& m, const Point& p, const Point& q) {
  const Tangent dir = m.log(p, q);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  auto value = [&](double t) {
    Tangent scaled = dir;
    scaled.v *= t;
    const Point x = m.exp(p, scaled);
    const double dp = m.dist(x, p);
    const double dq = m.dist(x, q);
    return 0.25 * (dp * dp + dq * dq);
  };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = value(c), fd = value(d);
  for (int it = 0; it < 90; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = value(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("barycenter basics") {
  SUBCASE("single point") {
    const Manifold m = Manifold::sphere(2);
    const Point p = point({0, 0, 1});
    const Point b = barycenter(m, {{p}, {1.0}});
    CHECK((b.x - p.x).norm() == 0.0);
  }

  SUBCASE("euclidean weighted mean is the closed form") {
    const Manifold m = Manifold::euclidean(2);
    const WeightedPoints wp{{point({0, 0}), point({1, 0}), point({0, 2})}, {0.2, 0.3, 0.5}};
    const Point b = barycenter(m, wp);
    CHECK(b.x[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(b.x[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("sphere equal-weight pair: geodesic midpoint via golden section") {
    const Manifold m = Manifold::sphere(2);
    Rng rng(17);
    const Point c = m.reference_point();
    for (int trial = 0; trial < 10; ++trial) {
      const Point p = m.random_in_ball(c, 0.6, rng);
      const Point q = m.random_in_ball(c, 0.6, rng);
      const Point b = barycenter(m, {{p, q}, {0.5, 0.5}}, 1e-12, 200);
      const double t_star = golden_section_midpoint(m, p, q);
      CHECK(t_star == doctest::Approx(0.5).epsilon(1e-8));
      CHECK(std::abs(m.dist(b, p) - m.dist(b, q)) <= 1e-8);
      Tangent half = m.log(p, q);
      half.v *= 0.5;
      CHECK(m.dist(b, m.exp(p, half)) <= 1e-8);
    }
  }

  SUBCASE("first-order optimality residual at return") {
    Rng rng(23);
    for (const Manifold& m : test::all_models()) {
      const Point c = m.reference_point();
      WeightedPoints wp;
      double wsum = 0;
      for (int i = 0; i < 5; ++i) {
        wp.points.push_back(m.random_in_ball(c, 0.4, rng));
        wp.weights.push_back(0.5 + rng.uniform());
        wsum += wp.weights.back();
      }
      for (double& w : wp.weights) w /= wsum;
      const Point b = barycenter(m, wp, 1e-10, 100);
      Vec grad = Vec::zero(m.ambient_dim());
      for (std::size_t i = 0; i < wp.points.size(); ++i)
        grad.axpy(wp.weights[i], m.log(b, wp.points[i]).v);
      CHECK(m.norm(b, Tangent{b, grad}) <= 1e-10);
    }
  }

  SUBCASE("invalid inputs") {
    const Manifold m = Manifold::euclidean(1);
    CHECK_THROWS_AS(barycenter(m, {{}, {}}), RangeViolation);
    CHECK_THROWS_AS(barycenter(m, {{point({0.0})}, {0.5}}), DomainError);
  }
}

TEST_CASE("mollify") {
  const Manifold m = Manifold::sphere(2);
  const Grid g = Grid::interval(16);

  SUBCASE("constant field is a fixed point, exactly") {
    const Field f = Field::constant(g, point({0, 0, 1}));
    const Field fd = mollify(m, g, f, 3.0 * g.spacing());
    for (int i = 0; i < g.num_nodes(); ++i) CHECK((fd[i].x - f[i].x).norm() == 0.0);
  }

  SUBCASE("delta below one spacing returns the field unchanged") {
    Rng rng(2);
    Field f;
    for (int i = 0; i < g.num_nodes(); ++i)
      f.values.push_back(m.random_in_ball(m.reference_point(), 0.5, rng));
    const Field fd = mollify(m, g, f, 0.5 * g.spacing());
    for (int i = 0; i < g.num_nodes(); ++i) CHECK((fd[i].x - f[i].x).norm() == 0.0);
  }

  SUBCASE("euclidean mollification equals the discrete kernel convolution") {
    const Manifold e = Manifold::euclidean(1);
    const Grid gi = Grid::interval(21);
    Rng rng(3);
    Field f;
    for (int i = 0; i < gi.num_nodes(); ++i) f.values.push_back(point({rng.normal()}));
    const double delta = 2.5 * gi.spacing();
    const Field fd = mollify(e, gi, f, delta);
    for (int x = 0; x < gi.num_nodes(); ++x) {
      double acc = 0, wsum = 0;
      for (int y = 0; y < gi.num_nodes(); ++y) {
        const double d = gi.node_distance(x, y);
        if (d > delta) continue;
        const double w = kernel_value(Kernel::bump, d / delta);
        acc += w * f[y].x[0];
        wsum += w;
      }
      CHECK(fd[x].x[0] == doctest::Approx(acc / wsum).epsilon(1e-12));
    }
  }

  SUBCASE("value ball is preserved") {
    Rng rng(4);
    const Point c = m.reference_point();
    Field f;
    for (int i = 0; i < g.num_nodes(); ++i) f.values.push_back(m.random_in_ball(c, 0.6, rng));
    const double before = max_dist_from(m, c, f);
    const Field fd = mollify(m, g, f, 2.0 * g.spacing(), Kernel::tent);
    CHECK(max_dist_from(m, c, fd) <= before + 1e-10);
  }
}

TEST_CASE("retract_into_ball") {
  const Manifold m = Manifold::sphere(2);
  const Point p = point({1, 0, 0});
  const double R = 0.5;

  SUBCASE("center and inside points are fixed") {
    CHECK((retract_into_ball(m, p, R, p).x - p.x).norm() == 0.0);
    const Point q = m.exp(p, Tangent{p, vec({0, 0.3, 0})});
    CHECK((retract_into_ball(m, p, R, q).x - q.x).norm() == 0.0);
  }
  SUBCASE("reflection branch: 1.5R lands at 0.5R on the same radial geodesic") {
    const Tangent dir{p, vec({0, 1.5 * R, 0})};
    const Point q = m.exp(p, dir);
    const Point r = retract_into_ball(m, p, R, q);
    CHECK(m.dist(p, r) == doctest::Approx(0.5 * R).epsilon(1e-12));
    const Point expected = m.exp(p, Tangent{p, vec({0, 0.5 * R, 0})});
    CHECK(m.dist(r, expected) <= 1e-12);
  }
  SUBCASE("beyond 2R collapses to the center") {
    const Point q = m.exp(p, Tangent{p, vec({0, 2.2 * R, 0})});
    CHECK((retract_into_ball(m, p, R, q).x - p.x).norm() == 0.0);
  }
  SUBCASE("length decreasing on 1000 random pairs, sphere and hyperbolic") {
    for (const Manifold& model : {Manifold::sphere(2), Manifold::hyperbolic(2)}) {
      Rng rng(31);
      const Point c = model.reference_point();
      const double radius = std::isfinite(model.convexity_radius())
                                ? 0.45 * model.convexity_radius()
                                : 0.9;
      double reach = 2.5 * radius;
      if (std::isfinite(model.inj())) reach = std::min(reach, 0.95 * model.inj());
      double worst = 0;
      for (int trial = 0; trial < 1000; ++trial) {
        const Point q1 = model.random_in_ball(c, reach, rng);
        const Point q2 = model.random_in_ball(c, reach, rng);
        const double before = model.dist(q1, q2);
        const double after = model.dist(retract_into_ball(model, c, radius, q1),
                                        retract_into_ball(model, c, radius, q2));
        worst = std::max(worst, after - before);
      }
      INFO("model ", model.spec());
      CHECK(worst <= 1e-12);
    }
  }
  SUBCASE("R above the convexity radius is rejected") {
    CHECK_THROWS_AS(retract_into_ball(m, p, 2.0, p), DomainError);
  }
}

TEST_CASE("geodesic homotopy") {
  const Manifold m = Manifold::sphere(2);
  const Grid g = Grid::circle(12);
  Rng rng(8);
  const Point c = m.reference_point();
  Field u, v;
  for (int i = 0; i < g.num_nodes(); ++i) {
    u.values.push_back(m.random_in_ball(c, 0.5, rng));
    v.values.push_back(m.random_in_ball(c, 0.5, rng));
  }

  SUBCASE("endpoints") {
    const Field at0 = geodesic_homotopy(m, u, v, 0.0);
    for (int i = 0; i < g.num_nodes(); ++i) CHECK((at0[i].x - u[i].x).norm() == 0.0);
    const Field at1 = geodesic_homotopy(m, u, v, 1.0);
    for (int i = 0; i < g.num_nodes(); ++i) CHECK(m.dist(at1[i], v[i]) <= 1e-10);
  }
  SUBCASE("midpoints are equidistant and distances scale linearly") {
    const Field mid = geodesic_homotopy(m, u, v, 0.5);
    for (int i = 0; i < g.num_nodes(); ++i) {
      CHECK(std::abs(m.dist(u[i], mid[i]) - m.dist(mid[i], v[i])) <= 1e-10);
      CHECK(m.dist(u[i], mid[i]) == doctest::Approx(0.5 * m.dist(u[i], v[i])).epsilon(1e-10));
    }
  }
}
