#include "treeopt/solve.hpp"

#include <algorithm>

#include "treeopt/encoding.hpp"
#include "treeopt/error.hpp"

namespace treeopt {

void attach_solution(const Ensemble& ensemble, const MilpModel& model, SolveResult& result, bool exact) {
  if (!result.has_incumbent) return;
  result.encoding = encoding_of(model, result.values);
  result.x = decode(ensemble.schema(), result.encoding);
  result.cells = cell_bounds(ensemble.schema(), result.encoding);
  result.true_objective = predict(ensemble, result.x);
  if (exact) {
    result.objective = result.true_objective;
    result.bound = std::max(result.bound, result.objective);
    result.gap = std::max(0.0, relative_gap(result.bound, result.objective));
  }
}

SolveResult solve_direct(const Ensemble& ensemble, const BnbConfig& config) {
  const MilpModel model = build_full(ensemble);
  SolveResult result = solve_milp(model, config);
  attach_solution(ensemble, model, result, true);
  return result;
}

SolveResult solve_standard_linearization(const Ensemble& ensemble, const BnbConfig& config) {
  const MilpModel model = build_standard_linearization(ensemble);
  SolveResult result = solve_milp(model, config);
  attach_solution(ensemble, model, result, true);
  return result;
}

SolveResult solve_truncated(const Ensemble& ensemble, int depth, const BnbConfig& config) {
  const MilpModel model = build_truncated(ensemble, depth);
  SolveResult result = solve_milp(model, config);
  attach_solution(ensemble, model, result, false);
  return result;
}

double lp_relaxation_value(const MilpModel& model, const LpOptions& options) {
  const LpSolution sol = solve_lp(model, {}, options);
  if (sol.status != LpStatus::kOptimal)
    throw Error(ErrorCode::kInternal, "LP relaxation ended with status " + std::string(to_string(sol.status)));
  return sol.objective;
}

}  // namespace treeopt
