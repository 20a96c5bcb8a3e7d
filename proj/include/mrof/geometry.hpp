#pragma once

#include <vector>

#include "mrof/domain.hpp"
#include "mrof/manifold.hpp"

namespace mrof {

/// Discrete stand-in for a compactly supported Radon measure: points with
/// nonnegative weights summing to 1, all inside a common ball of radius
/// < convexity_radius (checked by barycenter).
struct WeightedPoints {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Karcher barycenter: the minimizer of q -> 1/2 sum_i w_i dist^2(p_i, q),
/// computed by the fixed-point iteration q <- exp(q, sum w_i log(q, p_i))
/// with step halving on functional increase. On return the first-order
/// optimality residual |sum w_i log(q, p_i)| is <= tol.
Point barycenter(const Manifold& m, const WeightedPoints& wp, double tol = 1e-10,
                 int max_iter = 100);

enum class Kernel { bump, tent };
Kernel kernel_from_name(std::string_view name);

/// Mollifier weight psi(s) on [0,1): smooth bump exp(1 - 1/(1-s^2)) or tent
/// 1 - s; zero for s >= 1.
double kernel_value(Kernel k, double s);

/// Domain-neighborhood mollification: f_delta(x) is the Karcher barycenter of
/// {f(y) : d_grid(x,y) <= delta} with weights psi(d_grid(x,y)/delta),
/// normalized. delta below one grid spacing returns f unchanged.
Field mollify(const Manifold& m, const Grid& grid, const Field& f, double delta,
              Kernel kernel = Kernel::bump);

/// Lipschitz retraction onto the closed ball B(center, R): identity inside,
/// radial reflection r -> 2R - r on the annulus R <= r < 2R, and the center
/// beyond 2R. Requires R < convexity_radius.
Point retract_into_ball(const Manifold& m, const Point& center, double R, const Point& q);

/// Nodewise geodesic homotopy U(t)(x) = exp(u(x), t log(u(x), v(x))).
/// U(0) = u (exactly), U(1) = v (up to exp/log round-off).
Field geodesic_homotopy(const Manifold& m, const Field& u, const Field& v, double t);

}  // namespace mrof
