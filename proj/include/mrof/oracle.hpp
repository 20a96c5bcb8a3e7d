#pragma once

#include <span>
#include <string>
#include <vector>

#include "mrof/energy.hpp"

namespace mrof {

struct TautStringResult {
  std::vector<double> values;
  double objective = 0;     // oracle-side re-evaluation of the discrete energy
  double kkt_residual = 0;  // max violation of the subgradient conditions
  std::string method = "taut_string";
};

/// Exact minimizer of the scalar 1-D interval energy
///   sum_k gamma_k |u_{k+1} - u_k| + (lambda/2) sum_i w_i (u_i - f_i)^2
/// with the module's interval conventions frozen in: w_i = dx halved at the
/// endpoints, gamma_k = w_k / dx (so the first edge carries weight 1/2).
/// Computed as the taut string through the tube of per-knot radii gamma_k /
/// lambda around the cumulative sums, via the greedy funnel algorithm.
TautStringResult taut_string_1d(std::span<const double> f, double lambda, double dx);

/// The KKT residual of a candidate u for the same energy (independent of the
/// path that produced u).
double taut_string_kkt_residual(std::span<const double> f, std::span<const double> u,
                                double lambda, double dx);

struct BruteForceResult {
  Field values;
  double objective = 0;
  double resolution = 0;  // covering radius of the per-node net
  std::string method = "brute_force";
};

/// Exhaustive minimization of energy() over a polar geodesic net of the ball
/// B(center, R) per node, with center/R taken from f. Ties resolve to the
/// lexicographically smallest index vector. Throws BudgetExceeded when
/// net^nodes would pass 1e8 evaluations.
BruteForceResult brute_force_small(const Manifold& m, const Grid& grid, const Field& f,
                                   const EnergyParams& params, int quantization);

}  // namespace mrof
