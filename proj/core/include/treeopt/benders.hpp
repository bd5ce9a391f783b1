#pragma once

#include <optional>
#include <span>
#include <vector>

#include "treeopt/ensemble.hpp"
#include "treeopt/milp_solver.hpp"

namespace treeopt {

struct DualEntry {
  NodeId split;
  double value;
};

/// Dual solution of one tree's subproblem, generated by leaf `leaf`:
/// alpha on the left rows of s in RS(leaf), beta on the right rows of
/// s in LS(leaf), gamma on the convexity row. All other duals are zero.
struct BendersCut {
  int tree = 0;
  int leaf = 0;
  std::vector<DualEntry> alpha;
  std::vector<DualEntry> beta;
  double gamma = 0.0;
};

/// Leaf indicator vector of the leaf reached by `bits`.
std::vector<double> primal_sub(const Tree& tree, const VariableSchema& schema, const BinaryEncoding& bits);

/// Closed-form optimal dual for the subproblem at any x mapped to `leaf`.
BendersCut dual_from_leaf(const Tree& tree, int leaf, int tree_index = 0);

/// sum alpha * q_s + sum beta * (1 - q_s) + gamma at the bit values `x`.
double cut_value(const BendersCut& cut, const Tree& tree, const VariableSchema& schema, std::span<const double> x);

/// Largest violation of the dual constraints over all leaves (<= 0 when
/// feasible).
double dual_infeasibility(const BendersCut& cut, const Tree& tree);

/// The cut of the leaf reached by `bits` when it is violated by more than
/// `tol` at (bits, theta).
std::optional<BendersCut> violated_cut(const Tree& tree, const VariableSchema& schema, const BinaryEncoding& bits,
                                       double theta, double tol = 1e-7);

/// Master problem over x and theta_t in [min p, max p] with objective
/// sum lambda_t theta_t and no cuts. Expects nonnegative weights.
MilpModel build_benders_master(const Ensemble& ensemble);

/// Cut as the master row theta_t - sum alpha q + sum beta q <= gamma + sum beta.
LinearRow benders_row(const MilpModel& master, const Ensemble& ensemble, const BendersCut& cut);

/// Benders decomposition with cuts separated at integer nodes. Trees with
/// negative weight are handled through normalize_weights.
SolveResult solve_benders(const Ensemble& ensemble, const BnbConfig& config = {});

}  // namespace treeopt
