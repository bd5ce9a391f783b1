#pragma once

#include "treeopt/ensemble.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/milp_solver.hpp"

namespace treeopt {

/// Decodes the incumbent of `result` (a solve of `model` built from
/// `ensemble`) into encoding, raw X, cell bounds and the exact prediction.
/// With `exact` set the objective is replaced by that prediction, removing LP
/// round-off from reported optima.
void attach_solution(const Ensemble& ensemble, const MilpModel& model, SolveResult& result, bool exact);

/// Branch and bound on the full formulation.
SolveResult solve_direct(const Ensemble& ensemble, const BnbConfig& config = {});

/// Branch and bound on the standard linearization.
SolveResult solve_standard_linearization(const Ensemble& ensemble, const BnbConfig& config = {});

/// Depth-truncated problem. `objective` is Z*_{MIO,d} (an upper bound on the
/// true optimum for nonnegative weights), `true_objective` the prediction
/// of the returned x at full depth.
SolveResult solve_truncated(const Ensemble& ensemble, int depth, const BnbConfig& config = {});

/// Optimal value of the LP relaxation of `model`. Throws Error(kInternal)
/// unless the LP solves to optimality.
double lp_relaxation_value(const MilpModel& model, const LpOptions& options = {});

}  // namespace treeopt
