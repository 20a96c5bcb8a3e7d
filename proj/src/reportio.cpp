#include "mrof/reportio.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

#include "mrof/errors.hpp"

namespace mrof {

namespace {

nlohmann::json report_json(const SolveReport& r) {
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["final_grad_norm"] = r.final_grad_norm;
  j["final_residual_norm"] = r.final_residual_norm;
  j["range_radius"] = r.range_radius;
  j["range_max_dist"] = r.range_max_dist;
  j["lipschitz_of_u"] = r.lipschitz_of_u;
  j["flags"] = {{"converged", r.flags.converged},
                {"max_iter", r.flags.max_iter},
                {"cut_locus_guard_triggered", r.flags.cut_locus_guard_triggered},
                {"range_warning", r.flags.range_warning}};
  nlohmann::json trace = nlohmann::json::array();
  for (const EnergyBreakdown& e : r.energy_trace)
    trace.push_back({{"tv", e.tv}, {"fidelity", e.fidelity}, {"dirichlet", e.dirichlet},
                     {"total", e.total}});
  j["energy_trace"] = trace;
  return j;
}

}  // namespace

std::string solve_report_to_json(const SolveReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string continuation_report_to_json(const ContinuationResult& result) {
  nlohmann::json j;
  nlohmann::json stages = nlohmann::json::array();
  for (const SolveReport& r : result.stages) stages.push_back(report_json(r));
  j["stages"] = stages;
  j["max_lipschitz"] = result.max_lipschitz;
  j["lipschitz_bound"] = result.lipschitz_bound;
  j["lipschitz_bounded"] = result.lipschitz_bounded;
  return j.dump(2) + "\n";
}

std::string energy_trace_csv(const std::vector<SolveReport>& stages) {
  std::string out = "iter,tv,fidelity,dirichlet,total\n";
  char buf[160];
  int iter = 0;
  for (const SolveReport& r : stages)
    for (const EnergyBreakdown& e : r.energy_trace) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", iter++, e.tv, e.fidelity,
                    e.dirichlet, e.total);
      out += buf;
    }
  return out;
}

std::vector<ContinuationStage> parse_schedule_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schedule is not valid JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw ParseError("schedule must be a nonempty JSON array");
  std::vector<ContinuationStage> out;
  for (const auto& item : j) {
    ContinuationStage s;
    if (item.is_array()) {
      if (item.size() != 3) throw ParseError("schedule triple must be [eps, sigma, delta]");
      s.eps = item[0].get<double>();
      s.sigma = item[1].get<double>();
      s.delta = item[2].get<double>();
    } else if (item.is_object()) {
      if (!item.contains("eps")) throw ParseError("schedule stage needs 'eps'");
      s.eps = item["eps"].get<double>();
      s.sigma = item.value("sigma", 0.0);
      s.delta = item.value("delta", 0.0);
    } else {
      throw ParseError("schedule stage must be a triple or an object");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace mrof
