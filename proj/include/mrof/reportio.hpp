#pragma once

#include <string>
#include <vector>

#include "mrof/solver.hpp"

namespace mrof {

std::string solve_report_to_json(const SolveReport& report);
std::string continuation_report_to_json(const ContinuationResult& result);

/// "iter,tv,fidelity,dirichlet,total" rows over all stages, with a global
/// iteration counter.
std::string energy_trace_csv(const std::vector<SolveReport>& stages);

/// Accepts [[eps, sigma, delta], ...] or [{"eps":..., "sigma":..., "delta":...}, ...].
std::vector<ContinuationStage> parse_schedule_json(const std::string& text);

}  // namespace mrof
