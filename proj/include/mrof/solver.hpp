#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mrof/energy.hpp"

namespace mrof {

struct SolveConfig {
  int max_iter = 20000;
  double grad_tol = 1e-8;    // stop when the max nodewise gradient norm drops below
  double armijo_c = 1e-4;    // sufficient-decrease constant, in (0,1)
  double step_shrink = 0.5;  // backtracking factor, in (0,1)
  double step_init = 1.0;    // first trial step
  std::uint64_t seed = 0;    // reserved for randomized initialization
};

struct SolveFlags {
  bool converged = false;
  bool max_iter = false;
  bool cut_locus_guard_triggered = false;
  /// f fits in a ball below convexity_radius but not below strong_radius.
  bool range_warning = false;
};

struct SolveReport {
  int iterations = 0;
  std::vector<EnergyBreakdown> energy_trace;  // E(u_0), then each accepted iterate
  double final_grad_norm = 0;
  double final_residual_norm = 0;
  double range_radius = 0;    // R: max dist(center, f), center the barycenter of f
  double range_max_dist = 0;  // max over all iterates of max dist(center, u)
  double lipschitz_of_u = 0;
  SolveFlags flags;
};

/// Riemannian gradient descent on E_{sigma,eps} with Armijo backtracking and
/// Barzilai-Borwein trial steps. Descent directions are -gradient, updates go
/// through exp. A step that would push a node beyond 0.9 inj from its fidelity
/// anchor is shrunk (cut-locus guard). Default initialization u0 = f.
std::pair<Field, SolveReport> minimize(const Manifold& m, const Grid& grid, const Field& f,
                                       const EnergyParams& params, const SolveConfig& cfg,
                                       const Field* u0 = nullptr);

struct ContinuationStage {
  double eps = 0;
  double sigma = 0;
  double delta = 0;
};

struct ContinuationResult {
  Field u;
  std::vector<SolveReport> stages;
  /// max over stages of lipschitz_of_u, and the bound 1.05 x stage-0 value
  /// that the nonpositively curved theory predicts it stays under.
  double max_lipschitz = 0;
  double lipschitz_bound = 0;
  bool lipschitz_bounded = true;
};

/// Warm-started continuation over a schedule nonincreasing in (eps, sigma,
/// delta); each stage solves the system for the mollified datum f_{delta_k}.
ContinuationResult continuation(const Manifold& m, const Grid& grid, const Field& f,
                                double lambda, const std::vector<ContinuationStage>& schedule,
                                const SolveConfig& cfg);

/// The CLI's "schedule default": 6 geometric stages eps 1e-1 -> ~1e-4
/// (factor 1/4), sigma tied to eps when tie_sigma, delta = 2 grid spacings on
/// the first stage then 0.
std::vector<ContinuationStage> default_schedule(const Grid& grid, bool tie_sigma = true,
                                                bool mollify_first = true);

}  // namespace mrof
