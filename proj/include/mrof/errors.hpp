#pragma once

#include <stdexcept>
#include <string>

namespace mrof {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (non-tangent vector,
/// comparison-function pole, mismatched base points, ...).
struct DomainError : Error {
  using Error::Error;
};

/// log/dist requested at or beyond the cut locus (sphere antipodal case).
struct CutLocusReached : Error {
  using Error::Error;
};

/// Iteration failed to reach its tolerance within the allowed budget.
struct NoConvergence : Error {
  using Error::Error;
};

/// Inputs violate a working-ball precondition (barycenter, mollifier).
struct RangeViolation : Error {
  using Error::Error;
};

/// Malformed manifold/grid/schedule specification string or file.
struct ParseError : Error {
  using Error::Error;
};

/// Fields defined on different grids or manifolds were mixed.
struct GridMismatch : Error {
  using Error::Error;
};

/// Smooth-gradient path called with eps == 0 (subgradient regime).
struct RequiresPositiveEps : Error {
  using Error::Error;
};

/// Brute-force search would exceed its evaluation budget.
struct BudgetExceeded : Error {
  using Error::Error;
};

}  // namespace mrof
