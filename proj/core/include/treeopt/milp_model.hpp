#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace treeopt {

enum class VarType { kBinary, kContinuous };
enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

struct Variable {
  std::string name;
  VarType type = VarType::kContinuous;
  double lower = 0.0;
  double upper = 1.0;
  double objective = 0.0;
};

struct LinearTerm {
  int var;
  double coef;
};

/// Sparse row. `name` doubles as a deduplication key for lazily generated
/// rows; `kind` tags the row family for statistics.
struct LinearRow {
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
  std::string name;
  std::string kind;

  double activity(std::span<const double> values) const;
  /// Amount by which `values` violate the row (0 when satisfied).
  double violation(std::span<const double> values) const;
};

/// Handed to lazy generators at every integer-feasible node.
struct LazyContext {
  std::span<const double> values;
  const std::unordered_set<std::string>* existing = nullptr;

  bool has_row(const std::string& name) const { return existing != nullptr && existing->contains(name); }
};

/// Returns rows violated by ctx.values; must return nothing once the point is
/// feasible for the full problem.
using LazyGenerator = std::function<std::vector<LinearRow>(const LazyContext&)>;

/// Maps a model point with integral binaries to a point that is feasible for
/// the complete problem (e.g. y replaced by the leaf indicators of x). Used to
/// turn intermediate integer points into incumbents with exact objectives.
using IncumbentRepair = std::function<std::optional<std::vector<double>>(std::span<const double>)>;

/// Sparse maximization model over binary and bounded continuous variables.
/// Rows are stored as <= or =; >= rows are negated on insertion.
class MilpModel {
 public:
  int add_variable(std::string name, VarType type, double lower, double upper, double objective = 0.0);
  /// Validates variable ids, merges repeated terms, normalizes >= rows.
  int add_row(LinearRow row);

  std::span<const Variable> variables() const noexcept { return variables_; }
  const Variable& variable(int id) const { return variables_.at(static_cast<std::size_t>(id)); }
  std::span<const LinearRow> rows() const noexcept { return rows_; }
  std::size_t num_variables() const noexcept { return variables_.size(); }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  std::size_t num_binaries() const;
  int find_variable(std::string_view name) const;
  void set_objective(int var, double coef) { variables_.at(static_cast<std::size_t>(var)).objective = coef; }

  double objective_value(std::span<const double> values) const;
  /// Largest row or bound violation of `values`.
  double max_violation(std::span<const double> values) const;

  /// Text export in the CPLEX LP format, coefficients printed with 17
  /// significant digits.
  std::string to_lp_format() const;

  // Metadata filled in by the formulation builders.
  std::vector<std::vector<int>> x_vars;  // [i][j] -> variable id
  std::vector<std::vector<int>> y_vars;  // [t][leaf ordinal] -> variable id
  std::vector<int> theta_vars;           // [t] -> variable id (Benders master)
  std::vector<std::vector<int>> ladders;   // ordered ids with x_j <= x_{j+1}
  std::vector<std::vector<int>> one_hots;  // ids summing to one

  std::vector<LazyGenerator> lazy_generators;
  IncumbentRepair repair;

 private:
  std::vector<Variable> variables_;
  std::vector<LinearRow> rows_;
  std::unordered_map<std::string, int> by_name_;
};

/// Normalized copy of `row`: merged terms, >= turned into <=.
LinearRow normalize_row(LinearRow row, std::size_t num_variables);

}  // namespace treeopt
