#pragma once

#include <optional>
#include <set>
#include <tuple>
#include <span>
#include <utility>
#include <vector>

#include "treeopt/ensemble.hpp"
#include "treeopt/milp_solver.hpp"

namespace treeopt {

enum class SplitSide { kLeft, kRight };

struct SplitViolation {
  NodeId split;
  SplitSide side;
  double amount;
};

/// Walks tree `tree` following the bits `x` (schema layout, integral). At a
/// split taking the left branch the right row is checked, at a split taking
/// the right branch the left row; returns the first row violated by more
/// than `tol`.
std::optional<SplitViolation> find_violation(const Tree& tree, const VariableSchema& schema,
                                             std::span<const double> x, std::span<const double> y,
                                             double tol = 1e-6);

/// Tree-split pairs whose left/right rows are in the model.
class ActiveSplitSet {
 public:
  /// Flags one side; false if it was already present.
  bool add(std::size_t tree, NodeId split, SplitSide side);
  /// Flags both sides; false if both were present.
  bool add_pair(std::size_t tree, NodeId split);
  bool contains(std::size_t tree, NodeId split, SplitSide side) const;
  /// Number of (tree, split) pairs with at least one row.
  std::size_t num_pairs() const;
  std::size_t num_rows() const noexcept { return rows_.size(); }
  /// (tree, split, side) triples in sorted order.
  const std::set<std::tuple<std::size_t, NodeId, SplitSide>>& rows() const noexcept { return rows_; }

  static ActiveSplitSet up_to_depth(const Ensemble& ensemble, int depth);
  static ActiveSplitSet all(const Ensemble& ensemble);

 private:
  std::set<std::tuple<std::size_t, NodeId, SplitSide>> rows_;
};

/// Split rows added lazily at integer nodes, one violated row per tree per
/// round. `warm_start` is a raw input used as the first incumbent.
SolveResult solve_splitgen_lazy(const Ensemble& ensemble, const BnbConfig& config = {},
                                std::optional<std::vector<double>> warm_start = std::nullopt, double tol = 1e-6);

/// Outer loop: solve with the rows of `active`, add both rows of every
/// violated pair found, repeat. `trace` holds the number of active pairs at
/// the start of every round. `max_rounds` = 0 means unlimited.
SolveResult solve_splitgen_iterative(const Ensemble& ensemble, const BnbConfig& config = {},
                                     ActiveSplitSet active = {}, int max_rounds = 0, double tol = 1e-6);

}  // namespace treeopt
