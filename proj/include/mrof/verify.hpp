#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrof/solver.hpp"

namespace mrof {

/// One checked quantity: passes iff value >= threshold.
struct CaseMargin {
  std::string label;
  double value = 0;
  double threshold = 0;
  bool pass() const { return value >= threshold; }
};

struct StudyReport {
  std::string study;
  bool pass = true;
  std::vector<CaseMargin> margins;
  std::map<std::string, double> params;
  std::map<std::string, std::string> info;
  /// Non-criterion recordings (ratio tables, best violations found, ...).
  std::vector<std::pair<std::string, double>> table;

  void add(const std::string& label, double value, double threshold);
  double worst_margin() const;
  std::string to_json() const;
  std::string to_csv() const;  // "case,value,threshold,pass"
};

/// iid nodewise samples in the closed ball B(center, R).
Field random_field_in_ball(const Manifold& m, const Grid& grid, const Point& center, double R,
                           Rng& rng);

/// Scalar sawtooth profile on [0,1] with `teeth` ramps and amplitude a:
/// Lip = 2 a teeth.
double sawtooth(double x, double amplitude, int teeth);

/// f(x) = exp_c(a(x) e) for a fixed unit tangent e and the sawtooth a: all
/// values on one geodesic, so the discrete Lipschitz constant of the sampled
/// field equals that of the sampled scalar profile.
Field geodesic_zigzag_field(const Manifold& m, const Grid& grid, const Point& center,
                            double amplitude, int teeth);

/// Geodesic convexity of one homotopy: checks
///   E(U(t)) <= (1-t) E(u) + t E(v) + 1e-10
/// at each t in t_grid, separately for the tv term (lambda = sigma = 0), the
/// full energy, and the fidelity term. Requires kappa_hi <= 0.
StudyReport check_convexity(const Manifold& m, const Grid& grid, const Field& u, const Field& v,
                            const Field& f, const EnergyParams& params,
                            const std::vector<double>& t_grid);

/// Central second difference of t -> E(U(t)) at t0 with step h.
double second_variation_probe(const Manifold& m, const Grid& grid, const Field& u, const Field& v,
                              const Field& f, const EnergyParams& params, double t0,
                              double h = 1e-3);

/// Monte-Carlo convexity sweep (random pairs in a ball) plus second-variation
/// probes; NPC targets only.
StudyReport convexity_study(const Manifold& m, const Grid& grid, int trials, std::uint64_t seed);

/// Random-restart search for a tv convexity violation on the 2-sphere over a
/// 1-D domain: tv(U(1/2)) > (tv(u) + tv(v))/2 + 1e-6. Absence after the trial
/// budget is reported, not asserted.
StudyReport counterexample_search_s2(const Manifold& m, const Grid& grid, int trials,
                                     std::uint64_t seed);

/// Refinement study: solves the same continuum signal on each grid size and
/// asserts lipschitz_of_u(n) <= 1.10 x the coarsest ratio x Lip(f). The
/// euclidean scalar family additionally checks Lip(taut(f)) <= Lip(f) exactly.
/// family: "sawtooth" (euclidean:1) | "geodesic_zigzag".
StudyReport lipschitz_scaling_study(const Manifold& m, const std::string& family,
                                    const std::vector<int>& sizes, double lambda,
                                    const SolveConfig& cfg);

/// Retraction checks on random fields reaching radius up to 2R: energy never
/// increases under the retraction and retracted fields stay inside B(p, R).
StudyReport retraction_monotonicity(const Manifold& m, const Grid& grid, int samples, double R,
                                    std::uint64_t seed);

/// Ellipticity hypotheses H1-H6 on random chart samples.
StudyReport hypothesis_study(const std::string& rho_preset, int samples, double eps, double sigma,
                             std::uint64_t seed);

/// Prop 5.1 range invariance over a small battery of NPC solves initialized
/// at f: every iterate stays within range_radius + 1e-8 of the center.
StudyReport range_invariance_study(const Manifold& m, const Grid& grid, int runs,
                                   std::uint64_t seed);

}  // namespace mrof
