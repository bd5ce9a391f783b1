#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeopt/ensemble.hpp"

namespace treeopt {

/// The x vector of the mixed-integer formulation, laid out per
/// VariableSchema::offset. Numeric bit x_{i,j} = 1 iff X_i <= a_{i,j};
/// categorical bit x_{i,j} = 1 iff X_i is level j.
struct BinaryEncoding {
  std::vector<std::uint8_t> bits;

  friend bool operator==(const BinaryEncoding&, const BinaryEncoding&) = default;
};

BinaryEncoding encode(const VariableSchema& schema, std::span<const double> x);

/// Canonical raw representative of the cell encoded by `x`: the smallest split
/// point whose bit is set, a_{i,K_i} + 1 for the top cell, the hot level for
/// categorical variables. Variables with K_i = 0 take `defaults[i]` when given,
/// otherwise 0. Throws Error(kEncoding) on invalid input.
std::vector<double> decode(const VariableSchema& schema, const BinaryEncoding& x,
                           std::span<const double> defaults = {});

struct EncodingViolation {
  enum class Kind { kLength, kNotBinary, kLadder, kOneHot };
  Kind kind;
  int var;    // variable index
  int index;  // bit index within the variable (ladder: first j with x_j > x_{j+1})
  std::string message;
};

/// First violated ladder / one-hot invariant, or nullopt.
std::optional<EncodingViolation> validate(const VariableSchema& schema, std::span<const std::uint8_t> bits);

/// sum_{j in C(s)} x_{V(s), j} for any bit-like vector (binary or LP values).
template <typename T>
T query_sum(const Node& split, const VariableSchema& schema, std::span<const T> bits) {
  const auto v = static_cast<std::size_t>(split.var);
  const std::size_t base = schema.offset(v);
  if (schema.is_numeric(v)) return bits[base + static_cast<std::size_t>(split.split_index)];
  T sum{};
  for (const int level : split.categories) sum += bits[base + static_cast<std::size_t>(level)];
  return sum;
}

/// Leaf ordinal reached by descending left whenever the split's query sum is 1.
int get_leaf(const Tree& tree, const VariableSchema& schema, std::span<const std::uint8_t> bits);
inline int get_leaf(const Tree& tree, const VariableSchema& schema, const BinaryEncoding& x) {
  return get_leaf(tree, schema, std::span<const std::uint8_t>(x.bits));
}

/// Interval of raw values sharing the decoded cell: (lower, upper]. Infinite
/// ends are +-infinity. Categorical variables report the level twice.
struct CellBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};
std::vector<CellBounds> cell_bounds(const VariableSchema& schema, const BinaryEncoding& x);

// ---------------------------------------------------------------------------
// Per-variable cell indexing used by enumeration and local search.
//
// Numeric variable i has K_i + 1 cells: cell c < K_i is represented by a_{i,c},
// cell K_i by a_{i,K_i} + 1 (0 when K_i = 0). Categorical cell c is level c + 1.

int cell_count(const VariableSchema& schema, std::size_t i);
double cell_value(const VariableSchema& schema, std::size_t i, int cell);
int cell_of(const VariableSchema& schema, std::size_t i, double value);

/// Leaf reached by the input whose variable i lies in cell `cells[i]`.
int find_leaf_by_cells(const Tree& tree, const VariableSchema& schema, std::span<const int> cells);

}  // namespace treeopt
