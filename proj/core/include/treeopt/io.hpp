#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "treeopt/ensemble.hpp"
#include "treeopt/milp_solver.hpp"

namespace treeopt {

inline constexpr int kEnsembleSchemaVersion = 1;

/// Parses an ensemble document:
///
///   { "schema_version": 1,
///     "variables": [ {"name": "a", "kind": "numeric", "split_points": [1.0, 2.0]},
///                    {"name": "b", "kind": "categorical", "levels": 3} ],
///     "trees": [ {"weight": 0.5, "nodes": [
///        {"id": 0, "kind": "split", "var": 0, "threshold": 1.0, "left": 1, "right": 2},
///        {"id": 1, "kind": "leaf", "value": 3.5}, ... ]} ] }
///
/// `var` is 0-based, `level_set` (categorical splits) lists 1-based levels
/// routed left. The root is the one node no other node references. Errors
/// carry the JSON path of the offending member and a code per failure class.
Ensemble parse_ensemble_json(std::string_view text);
Ensemble load_ensemble(const std::filesystem::path& path);

/// Document accepted by parse_ensemble_json. Numbers are written in the
/// shortest form that reads back to the same double, so a load/save/load
/// cycle is exact.
std::string ensemble_to_json(const Ensemble& ensemble);
void save_ensemble(const Ensemble& ensemble, const std::filesystem::path& path);

/// Imports a plain-text tree dump:
///
///   var <name> numeric
///   var <name> categorical <levels>
///   tree [weight]
///   <id> <left> <right> <var> <split> <status> <prediction>
///
/// Node rows follow the randomForest getTree layout with 1-based ids and
/// variables. Leaves have left = right = 0 and status -1. For categorical
/// variables the split value is the bit mask of levels routed left (bit k-1
/// for level k). Undeclared variables are numeric. Trees without a weight get
/// 1/T. Lines starting with '#' are ignored.
Ensemble convert_tree_dump(std::istream& in);

/// Comma separated rows of raw inputs; a first row that does not parse as
/// numbers is taken as a header. Throws Error(kParse) with the line number.
std::vector<std::vector<double>> read_points_csv(std::istream& in, std::size_t num_variables);

/// JSON report of a solve: status, objective, bound, gap, decoded X with cell
/// bounds and statistics. `extra` entries are added as top-level numbers.
/// A non-empty `status` replaces the solver status (heuristic runs).
std::string solve_result_json(const SolveResult& result, const Ensemble& ensemble, std::string_view method,
                              const std::map<std::string, double>& extra = {}, std::string_view status = {});

}  // namespace treeopt
