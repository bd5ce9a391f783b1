#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeopt/encoding.hpp"
#include "treeopt/lp_solver.hpp"
#include "treeopt/milp_model.hpp"

namespace treeopt {

enum class NodeSelection { kBestBound, kDepthFirst };
enum class BranchRule { kMostFractional, kFirstFractional };

struct BnbConfig {
  double rel_gap = 1e-6;
  double abs_gap = 1e-9;
  double int_tol = 1e-6;
  double time_limit = 0.0;  // seconds, 0 = unlimited
  long node_limit = 0;      // 0 = unlimited
  NodeSelection selection = NodeSelection::kBestBound;
  BranchRule branching = BranchRule::kMostFractional;
  LpOptions lp;
  /// Optional feasible point of the model used as the first incumbent.
  std::optional<std::vector<double>> initial_point;
};

enum class SolveStatus { kOptimal, kLimitReached, kInfeasible };
std::string_view to_string(SolveStatus status) noexcept;

struct SolveStats {
  long nodes = 0;
  long lp_solves = 0;
  long lp_iterations = 0;
  long incumbent_updates = 0;
  std::map<std::string, long> cuts;  // lazy rows added, by row kind
  double wall_ms = 0.0;

  long total_cuts() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  bool has_incumbent = false;
  double objective = 0.0;  // Z_LB
  double bound = 0.0;      // Z_UB
  double gap = 0.0;        // (Z_UB - Z_LB) / max(|Z_UB|, eps)
  std::vector<double> values;  // model point

  // Filled in by the ensemble-level solve wrappers.
  BinaryEncoding encoding;
  std::vector<double> x;  // decoded raw input
  std::vector<CellBounds> cells;
  double true_objective = 0.0;  // prediction of x at full depth

  SolveStats stats;
  std::vector<std::size_t> trace;  // per-round sizes for iterative schemes
};

/// (ub - lb) / max(|ub|, 1e-10).
double relative_gap(double ub, double lb);

/// Appends a lazy generator, invoked at every integer-feasible node.
void register_lazy(MilpModel& model, LazyGenerator generator);

/// LP-based branch and bound over the binaries of `model`.
///
/// Rows returned by lazy generators are added to the node LP and kept for the
/// rest of the search; an integer point becomes the incumbent only once every
/// generator returns nothing. At each integer point the model's repair hook,
/// when present, proposes a second candidate that is accepted under the same
/// rules. Throws Error(kInternal) if a generator returns a row that the
/// current point already satisfies or one that is already present.
SolveResult solve_milp(const MilpModel& model, const BnbConfig& config = {});

}  // namespace treeopt
