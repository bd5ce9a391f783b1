#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "treeopt/milp_model.hpp"

namespace treeopt {

struct LpOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  long max_iterations = 0;  // 0: 50 * (rows + cols) + 10000
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string_view to_string(LpStatus status) noexcept;

/// Solution of the LP relaxation in the maximization sense of the model:
/// row duals are >= 0 for <= rows at optimality, reduced_costs[j] is
/// c_j - duals^T A_j.
struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> primal;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  long iterations = 0;
};

enum class BasisStatus : std::int8_t { kBasic, kAtLower, kAtUpper };

/// Column statuses for structural variables followed by row slacks.
struct Basis {
  std::vector<BasisStatus> columns;
  std::vector<BasisStatus> rows;
};

struct BoundOverride {
  int var;
  double lower;
  double upper;
};

/// Bounded dual simplex over max c^T x, A x (<= | =) b, l <= x <= u.
///
/// Every row gets a slack s_i with a x + s_i = b_i, s_i in [0, b_i - min(a x)]
/// (the upper end is implied by the variable box, [0, 0] for equality rows),
/// so every column is boxed and any basis can be made dual feasible by bound
/// flips. The basis inverse is kept as an LU of the structural kernel plus a
/// product-form eta file, refactored every `refactor_interval` pivots.
///
/// Stateful: bounds and rows may be changed between solves and the last basis
/// is reused as a warm start.
class LpSolver {
 public:
  explicit LpSolver(LpOptions options = {});

  /// Loads variables (integrality relaxed), objective and rows of `model`.
  void load(const MilpModel& model);
  void set_bounds(int var, double lower, double upper);
  double lower(int var) const { return lower_[static_cast<std::size_t>(var)]; }
  double upper(int var) const { return upper_[static_cast<std::size_t>(var)]; }
  /// Appends a row; its slack enters the basis.
  void add_row(const LinearRow& row);

  std::size_t num_rows() const noexcept { return rhs_.size(); }
  std::size_t num_columns() const noexcept { return static_cast<std::size_t>(n_); }

  LpSolution solve();

  Basis basis() const;
  /// Installs a warm-start basis. Rows added after the basis was taken get
  /// basic slacks. Inconsistent bases fall back to the all-slack basis.
  void set_basis(const Basis& basis);
  void reset_basis();

 private:
  struct Eta {
    int position;
    std::vector<double> column;
  };

  std::size_t m() const noexcept { return rhs_.size(); }
  std::size_t total() const noexcept { return static_cast<std::size_t>(n_) + rhs_.size(); }
  bool is_slack(int col) const noexcept { return col >= n_; }

  void refresh_slack_bounds();
  bool refactor();
  void ftran(std::vector<double>& v) const;   // rows -> positions
  void btran(std::vector<double>& c) const;   // positions -> rows
  void column(int col, std::vector<double>& out) const;
  void compute_primal();
  void compute_duals();
  bool flip_dual_infeasible();
  void place_nonbasic_at_bounds();
  bool install_slack_basis();
  LpSolution finish(LpStatus status, long iterations);

  LpOptions options_;
  int n_ = 0;
  std::vector<double> cost_;  // internal minimization costs of structurals
  std::vector<double> lower_, upper_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> rhs_;
  std::vector<char> equality_;

  std::vector<int> head_;  // basis position -> column
  std::vector<int> pos_;   // column -> basis position, -1 if nonbasic
  std::vector<BasisStatus> status_;
  std::vector<double> x_;
  std::vector<double> d_;

  // Factorization of the basis at the last refactor.
  std::vector<int> kernel_rows_;
  std::vector<int> kernel_cols_;
  std::vector<int> kernel_pos_;
  std::vector<int> row_in_kernel_;
  std::vector<int> base_slack_pos_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;
  bool basis_valid_ = false;
};

/// One-shot LP relaxation of `model` with optional bound overrides.
LpSolution solve_lp(const MilpModel& model, std::span<const BoundOverride> overrides = {}, LpOptions options = {});

}  // namespace treeopt
