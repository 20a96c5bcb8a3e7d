#include <doctest.h>

#include <cmath>
#include <vector>

#include "mrof/oracle.hpp"
#include "test_util.hpp"

using namespace mrof;
using test::point;

namespace {

/// Independent convex oracle: projected coordinate descent on the dual box
/// QP. With s_k in [-1, 1] scaled by gamma_k, u(s) = f - (1/(lambda w)) D^T
/// (gamma s); each coordinate minimization is exact and clamped.
std::vector<double> dual_coordinate_descent(const std::vector<double>& f, double lambda,
                                            double dx, int sweeps) {
  const std::size_t n = f.size();
  std::vector<double> w(n, dx);
  w.front() *= 0.5;
  w.back() *= 0.5;
  std::vector<double> gamma(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) gamma[k] = w[k] / dx;

  // u_i = f_i - (g_{i-1} s_{i-1} - g_i s_i)/(lambda w_i) with s in [-gamma, gamma]
  // stored directly as S_k = gamma_k s_k.
  std::vector<double> S(n - 1, 0.0);
  auto u_at = [&](std::size_t i) {
    double div = 0;
    if (i > 0) div += S[i - 1];
    if (i + 1 < n) div -= S[i];
    return f[i] - div / (lambda * w[i]);
  };
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      // Exact minimization of the dual in S_k: quadratic with curvature
      // 1/(lambda w_k) + 1/(lambda w_{k+1}); zero-gradient at the unclamped
      // value, then clamp to [-gamma_k, gamma_k].
      const double a = 1.0 / (lambda * w[k]) + 1.0 / (lambda * w[k + 1]);
      // Gradient of the primal-dual objective wrt S_k is u_{k+1} - u_k
      // (with the current S); move S_k to cancel it.
      const double g = u_at(k + 1) - u_at(k);
      double s = S[k] + g / a;
      s = std::min(gamma[k], std::max(-gamma[k], s));
      S[k] = s;
    }
  }
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = u_at(i);
  return u;
}

}  // namespace

TEST_CASE("taut string basics") {
  SUBCASE("constant signal is returned as-is") {
    const std::vector<double> f(9, 1.25);
    const TautStringResult r = taut_string_1d(f, 3.0, 0.125);
    for (double v : r.values) CHECK(v == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(r.kkt_residual <= 1e-12);
  }

  SUBCASE("two nodes: symmetric shrinkage u = (t, 1-t), t = min(1/2, 1/lambda)") {
    for (double lambda : {0.5, 1.0, 1.9, 2.0, 4.0, 50.0}) {
      const std::vector<double> f{0.0, 1.0};
      const TautStringResult r = taut_string_1d(f, lambda, 1.0);
      const double t = std::min(0.5, 1.0 / lambda);
      INFO("lambda ", lambda);
      CHECK(r.values[0] == doctest::Approx(t).epsilon(1e-12));
      CHECK(r.values[1] == doctest::Approx(1.0 - t).epsilon(1e-12));
      // Closed form cross-checked against a grid search over (u0, u1).
      double best = 1e300, bu0 = 0, bu1 = 0;
      for (int i = -100; i <= 200; ++i)
        for (int j = -100; j <= 200; ++j) {
          const double u0 = i / 100.0, u1 = j / 100.0;
          const double e =
              0.5 * std::abs(u1 - u0) +
              0.5 * lambda * (0.5 * u0 * u0 + 0.5 * (u1 - 1.0) * (u1 - 1.0));
          if (e < best) {
            best = e;
            bu0 = u0;
            bu1 = u1;
          }
        }
      CHECK(std::abs(r.values[0] - bu0) <= 0.011);
      CHECK(std::abs(r.values[1] - bu1) <= 0.011);
    }
  }

  SUBCASE("n = 12 random signals match the dual coordinate-descent oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> f(12);
      for (double& v : f) v = rng.normal();
      const double lambda = 0.8 + 4.0 * rng.uniform();
      const double dx = 1.0 / 11.0;
      const TautStringResult r = taut_string_1d(f, lambda, dx);
      const std::vector<double> u = dual_coordinate_descent(f, lambda, dx, 40000);
      for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(r.values[i] - u[i]) <= 1e-8);
    }
  }

  SUBCASE("KKT residual stays below 1e-10 on 100 random instances") {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + rng.uniform_int(200);
      std::vector<double> f(static_cast<std::size_t>(n));
      for (double& v : f) v = rng.normal();
      const double lambda = 0.2 + 8.0 * rng.uniform();
      const TautStringResult r = taut_string_1d(f, lambda, 1.0 / std::max(1, n - 1));
      INFO("n ", n, " lambda ", lambda);
      CHECK(r.kkt_residual <= 1e-10);
    }
  }

  SUBCASE("objective equals the module energy re-evaluated on the result") {
    Rng rng(7);
    const Manifold m = Manifold::euclidean(1);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + rng.uniform_int(60);
      const Grid g = Grid::interval(n);
      std::vector<double> fs(static_cast<std::size_t>(n));
      for (double& v : fs) v = rng.normal();
      const double lambda = 0.5 + 5.0 * rng.uniform();
      const TautStringResult r = taut_string_1d(fs, lambda, g.spacing());
      Field u, f;
      for (int i = 0; i < n; ++i) {
        u.values.push_back(point({r.values[static_cast<std::size_t>(i)]}));
        f.values.push_back(point({fs[static_cast<std::size_t>(i)]}));
      }
      const double module_energy = energy(m, g, u, f, EnergyParams{lambda, 0, 0, 0}).total;
      CHECK(r.objective == doctest::Approx(module_energy).epsilon(1e-10));
    }
  }
}

TEST_CASE("brute force small instances") {
  SUBCASE("constant f is the best point on any net containing it") {
    const Manifold m = Manifold::sphere(2);
    const Grid g = Grid::interval(3);
    const Field f = Field::constant(g, point({0, 0, 1}));
    const BruteForceResult r = brute_force_small(m, g, f, EnergyParams{2.0, 0, 0.05, 0}, 6);
    for (int i = 0; i < 3; ++i) CHECK(m.dist(r.values[i], f[i]) <= 1e-12);
  }

  SUBCASE("euclidean pair agrees with the taut string within the net resolution") {
    const Manifold m = Manifold::euclidean(1);
    const Grid g = Grid::interval(2);
    Field f;
    f.values = {point({0.0}), point({1.0})};
    const double lambda = 4.0;
    const BruteForceResult r = brute_force_small(m, g, f, EnergyParams{lambda, 0, 0, 0}, 64);
    const TautStringResult ts = taut_string_1d(std::vector<double>{0.0, 1.0}, lambda, 1.0);
    Field ut;
    ut.values = {point({ts.values[0]}), point({ts.values[1]})};
    const double e_ts = energy(m, g, ut, f, EnergyParams{lambda, 0, 0, 0}).total;
    CHECK(r.objective <= e_ts + 1e-12);  // net contains near-optimal points
    CHECK(e_ts <= r.objective + 1e-12);  // and the oracle is a true lower bound
    for (int i = 0; i < 2; ++i) CHECK(std::abs(r.values[i].x[0] - ts.values[i]) <= r.resolution);
  }

  SUBCASE("objective re-evaluates exactly through energy()") {
    const Manifold m = Manifold::sphere(2);
    const Grid g = Grid::circle(3);
    Rng rng(9);
    Field f;
    for (int i = 0; i < 3; ++i)
      f.values.push_back(m.random_in_ball(m.reference_point(), 0.4, rng));
    const EnergyParams p{3.0, 0.1, 0.05, 0};
    const BruteForceResult r = brute_force_small(m, g, f, p, 8);
    CHECK(r.objective == doctest::Approx(energy(m, g, r.values, f, p).total).epsilon(1e-10));
  }

  SUBCASE("budget guard") {
    const Manifold m = Manifold::spd(2);
    const Grid g = Grid::rect2d(2, 2);
    Rng rng(10);
    Field f;
    for (int i = 0; i < 4; ++i)
      f.values.push_back(m.random_in_ball(m.reference_point(), 0.5, rng));
    CHECK_THROWS_AS(brute_force_small(m, g, f, EnergyParams{1, 0, 0.1, 0}, 200),
                    BudgetExceeded);
  }
}
