#pragma once

#include <limits>
#include <string>
#include <string_view>

#include "mrof/errors.hpp"
#include "mrof/rng.hpp"
#include "mrof/types.hpp"

namespace mrof {

enum class ManifoldKind { euclidean, sphere, hyperbolic, spd };

/// Comparison functions of constant-curvature geometry:
/// s_k (generalized sine), c_k = s_k', ta_k = s_k/c_k, co_k = c_k/s_k.
struct Comparison {
  double s;
  double c;
  double ta;
  double co;
};

/// Evaluates the comparison functions at t >= 0 for curvature kappa.
/// Throws DomainError for t < 0 and, when kappa > 0, for t >= pi/sqrt(kappa)
/// (the co_k pole). co diverges to +inf as t -> 0+.
Comparison comparison(double kappa, double t);

/// One of the four model targets, with closed-form exp/log/dist in a fixed
/// embedded representation:
///   euclidean:n    R^n
///   sphere:n       round sphere of radius r in R^(n+1) (default r = 1)
///   hyperbolic:n   hyperboloid sheet {<x,x>_M = -1, x0 > 0} in R^(n+1)
///   spd:n          symmetric positive definite n x n matrices (n = 2, 3),
///                  affine-invariant metric, entries stored row-major
///
/// All operations are pure functions on immutable values.
class Manifold {
 public:
  static Manifold euclidean(int n);
  static Manifold sphere(int n, double radius = 1.0);
  static Manifold hyperbolic(int n);
  static Manifold spd(int n);

  /// Parses a specification string: "euclidean:3", "sphere:2", "sphere:2:r=2",
  /// "hyperbolic:2", "spd:2". Throws ParseError.
  static Manifold parse(std::string_view spec);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }
  double kappa_lo() const { return kappa_lo_; }
  double kappa_hi() const { return kappa_hi_; }
  /// Injectivity radius at the working center (+inf on the complete
  /// nonpositively curved models).
  double inj() const { return inj_; }
  double radius() const { return radius_; }  // sphere only

  /// R_kappa = 1/2 min{inj, pi/sqrt(kappa)} for kappa > 0, inj/2 otherwise
  /// (kappa = kappa_hi).
  double convexity_radius() const;
  /// R*_kappa = min{inj/2, pi/(4 sqrt(kappa))} for kappa > 0, inj/2 otherwise.
  double strong_radius() const;

  /// Geodesic exponential. Requires v tangent at p (DomainError beyond
  /// tolerance); the result is renormalized onto the constraint set.
  Point exp(const Point& p, const Tangent& v) const;

  /// Inverse of exp for dist(p,q) < inj. Throws CutLocusReached near the
  /// sphere antipode.
  Tangent log(const Point& p, const Point& q) const;

  /// Geodesic distance.
  double dist(const Point& p, const Point& q) const;

  /// Riemannian metric at p. Throws DomainError if v and w carry different
  /// base points.
  double inner(const Point& p, const Tangent& v, const Tangent& w) const;
  double norm(const Point& p, const Tangent& v) const;

  /// Orthogonal projection of an ambient vector onto T_p; idempotent,
  /// identity on euclidean targets.
  Tangent project_tangent(const Point& p, const Vec& ambient) const;

  /// Constraint residual of a candidate point (0 on the manifold).
  double point_residual(const Point& p) const;
  /// Tangency residual of an ambient vector at p (0 if tangent).
  double tangent_residual(const Point& p, const Vec& v) const;

  /// Canonical working center: origin, north pole, hyperboloid apex, or the
  /// identity matrix.
  Point reference_point() const;

  /// Deterministic sample in the closed geodesic ball B(center, R).
  Point random_in_ball(const Point& center, double R, Rng& rng) const;
  /// Deterministic unit tangent at p.
  Tangent random_unit_tangent(const Point& p, Rng& rng) const;

  std::string spec() const;

  friend bool operator==(const Manifold& a, const Manifold& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.radius_ == b.radius_;
  }

 private:
  Manifold() = default;

  void require_point(const Point& p) const;
  void require_tangent(const Point& p, const Vec& v) const;

  ManifoldKind kind_ = ManifoldKind::euclidean;
  int dim_ = 0;
  int ambient_dim_ = 0;
  double kappa_lo_ = 0;
  double kappa_hi_ = 0;
  double inj_ = std::numeric_limits<double>::infinity();
  double radius_ = 1.0;  // sphere radius; 1 elsewhere
};

/// Constraint tolerance for Point/Tangent invariants.
inline constexpr double kConstraintTol = 1e-12;

}  // namespace mrof
