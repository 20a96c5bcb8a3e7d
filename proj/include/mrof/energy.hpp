#pragma once

#include <span>
#include <string>
#include <vector>

#include "mrof/domain.hpp"
#include "mrof/manifold.hpp"

namespace mrof {

struct EnergyParams {
  double lambda = 0;  // fidelity weight
  double sigma = 0;   // Dirichlet weight
  double eps = 0;     // TV regularization
  double delta = 0;   // mollification radius (0 = none)
};

struct EnergyBreakdown {
  double tv = 0;
  double fidelity = 0;
  double dirichlet = 0;
  double total = 0;
};

/// Discrete E_{sigma,eps}(u):
///   tv        = sum_n w_n sqrt(|du|^2_n + eps^2)
///   fidelity  = (lambda/2) sum_n w_n dist^2(u_n, f_n)
///   dirichlet = (sigma/2) sum_n w_n |du|^2_n
/// with |du|^2_n assembled from the forward edges at node n (squared geodesic
/// difference quotients) and w_n the trapezoidal node weights. Reduces to
/// E_sigma at eps = 0 and to E at eps = sigma = 0. When lambda > 0 every
/// nodewise dist(u, f) must stay below the injectivity radius
/// (CutLocusReached otherwise).
EnergyBreakdown energy(const Manifold& m, const Grid& grid, const Field& u, const Field& f,
                       const EnergyParams& params);

/// Riemannian gradient of energy() with respect to each node, assembled
/// intrinsically from log maps (the fidelity part is exactly
/// -lambda w_n log_{u_n} f_n). Requires eps > 0.
std::vector<Tangent> riemannian_gradient(const Manifold& m, const Grid& grid, const Field& u,
                                         const Field& f, const EnergyParams& params);

struct ElResidual {
  std::vector<Tangent> residual;  // -(gradient at node) / area weight
  double norm = 0;                // max nodewise tangent norm
};

/// Discrete Euler-Lagrange residual of the eps-regularized system; vanishes
/// at exact discrete minimizers.
ElResidual el_residual(const Manifold& m, const Grid& grid, const Field& u, const Field& f,
                       const EnergyParams& params);

/// Chart-level coefficient functions of the regularized system:
/// b(x,xi) = rho / sqrt(|xi|^2 + eps^2 rho^2), a_i(x,xi) = (b + sigma) xi_i.
struct Coefficients {
  double b = 0;
  std::vector<double> a;
};
Coefficients coefficients(double rho, std::span<const double> xi, double eps, double sigma);

/// Conformal factor preset with its bounds on the unit square (for the
/// hypothesis checks H1/H5).
struct ConformalFactor {
  std::string name;
  double min_value = 1;
  double max_value = 1;
  double lipschitz = 0;
  double operator()(double x, double y) const;
};
ConformalFactor conformal_preset(std::string_view name);  // "flat" | "sphere_patch"

struct HypothesisSample {
  std::array<double, 2> x{};       // chart points in [0,1]^2
  std::array<double, 2> y{};
  std::vector<double> xi;          // 2N-vectors
  std::vector<double> eta;
};

/// Slacks of the ellipticity/growth hypotheses, all >= 0 up to round-off:
///   h1: (max_rho/eps + sigma)|xi| - |a(x,xi)|
///   h2: quadratic form of Da(x,xi) at eta, minus sigma |eta|^2
///   h3: <a(x,xi) - a(x,eta), xi - eta> - sigma |xi - eta|^2
///   h4: <a(x,xi), xi> - sigma |xi|^2
///   h5: Lip(rho) |x - y| - |a(x,xi) - a(y,xi)|
///   h6: (1/eps + sigma)|xi - eta| - |a(x,xi) - a(x,eta)|
struct HypothesisMargins {
  double h1 = 0, h2 = 0, h3 = 0, h4 = 0, h5 = 0, h6 = 0;
};

struct HypothesisReport {
  std::vector<HypothesisMargins> margins;
  HypothesisMargins min_margins;
  int violations = 0;  // margins below -1e-12
};

HypothesisReport check_hypotheses(const ConformalFactor& rho,
                                  std::span<const HypothesisSample> samples, double eps,
                                  double sigma);

}  // namespace mrof
