#include "treeopt/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "treeopt/error.hpp"

namespace treeopt {

BinaryEncoding encode(const VariableSchema& schema, std::span<const double> x) {
  check_domain(schema, x);
  BinaryEncoding out;
  out.bits.assign(schema.num_bits(), 0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::size_t base = schema.offset(i);
    if (schema.is_numeric(i)) {
      const auto points = schema.split_points(i);
      for (std::size_t j = 0; j < points.size(); ++j) out.bits[base + j] = x[i] <= points[j] ? 1 : 0;
    } else {
      out.bits[base + static_cast<std::size_t>(x[i]) - 1] = 1;
    }
  }
  return out;
}

std::optional<EncodingViolation> validate(const VariableSchema& schema, std::span<const std::uint8_t> bits) {
  using Kind = EncodingViolation::Kind;
  if (bits.size() != schema.num_bits())
    return EncodingViolation{Kind::kLength, -1, -1,
                             "expected " + std::to_string(schema.num_bits()) + " bits, got " +
                                 std::to_string(bits.size())};
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] > 1)
      return EncodingViolation{Kind::kNotBinary, -1, static_cast<int>(k), "bit " + std::to_string(k) + " not 0/1"};
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::size_t base = schema.offset(i);
    const int k = schema.cardinality(i);
    if (schema.is_numeric(i)) {
      for (int j = 0; j + 1 < k; ++j) {
        if (bits[base + static_cast<std::size_t>(j)] > bits[base + static_cast<std::size_t>(j) + 1])
          return EncodingViolation{Kind::kLadder, static_cast<int>(i), j,
                                   "ladder broken at variable " + std::to_string(i) + ", index " +
                                       std::to_string(j)};
      }
    } else {
      int hot = 0;
      for (int j = 0; j < k; ++j) hot += bits[base + static_cast<std::size_t>(j)];
      if (hot != 1)
        return EncodingViolation{Kind::kOneHot, static_cast<int>(i), -1,
                                 "variable " + std::to_string(i) + " has " + std::to_string(hot) + " hot levels"};
    }
  }
  return std::nullopt;
}

std::vector<double> decode(const VariableSchema& schema, const BinaryEncoding& x, std::span<const double> defaults) {
  if (const auto violation = validate(schema, x.bits)) throw Error(ErrorCode::kEncoding, violation->message);
  std::vector<double> out(schema.size(), 0.0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::size_t base = schema.offset(i);
    const int k = schema.cardinality(i);
    if (schema.is_numeric(i)) {
      if (k == 0) {
        out[i] = i < defaults.size() ? defaults[i] : 0.0;
        continue;
      }
      int first = k;
      for (int j = 0; j < k; ++j) {
        if (x.bits[base + static_cast<std::size_t>(j)]) {
          first = j;
          break;
        }
      }
      out[i] = cell_value(schema, i, first);
    } else {
      for (int j = 0; j < k; ++j)
        if (x.bits[base + static_cast<std::size_t>(j)]) out[i] = j + 1;
    }
  }
  return out;
}

int get_leaf(const Tree& tree, const VariableSchema& schema, std::span<const std::uint8_t> bits) {
  NodeId id = tree.root();
  while (!tree.node(id).is_leaf()) {
    const Node& n = tree.node(id);
    if (n.left == kNoNode || n.right == kNoNode) throw Error(ErrorCode::kStructure, "split without children");
    id = query_sum(n, schema, bits) == 1 ? n.left : n.right;
  }
  return tree.leaf_ordinal(id);
}

std::vector<CellBounds> cell_bounds(const VariableSchema& schema, const BinaryEncoding& x) {
  const auto rep = decode(schema, x);
  std::vector<CellBounds> out(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!schema.is_numeric(i)) {
      out[i] = {rep[i], rep[i]};
      continue;
    }
    const auto points = schema.split_points(i);
    const int cell = cell_of(schema, i, rep[i]);
    if (cell > 0) out[i].lower = points[static_cast<std::size_t>(cell) - 1];
    if (cell < static_cast<int>(points.size())) out[i].upper = points[static_cast<std::size_t>(cell)];
  }
  return out;
}

int cell_count(const VariableSchema& schema, std::size_t i) {
  return schema.is_numeric(i) ? schema.cardinality(i) + 1 : schema.cardinality(i);
}

double cell_value(const VariableSchema& schema, std::size_t i, int cell) {
  if (!schema.is_numeric(i)) return cell + 1;
  const auto points = schema.split_points(i);
  if (points.empty()) return 0.0;
  if (cell < static_cast<int>(points.size())) return points[static_cast<std::size_t>(cell)];
  return points.back() + 1.0;
}

int cell_of(const VariableSchema& schema, std::size_t i, double value) {
  if (!schema.is_numeric(i)) return static_cast<int>(value) - 1;
  const auto points = schema.split_points(i);
  // First split point with value <= a_j.
  return static_cast<int>(std::lower_bound(points.begin(), points.end(), value) - points.begin());
}

int find_leaf_by_cells(const Tree& tree, const VariableSchema& schema, std::span<const int> cells) {
  NodeId id = tree.root();
  while (!tree.node(id).is_leaf()) {
    const Node& n = tree.node(id);
    const int cell = cells[static_cast<std::size_t>(n.var)];
    bool left;
    if (schema.is_numeric(static_cast<std::size_t>(n.var)))
      left = cell <= n.split_index;
    else
      left = std::binary_search(n.categories.begin(), n.categories.end(), cell);
    id = left ? n.left : n.right;
  }
  return tree.leaf_ordinal(id);
}

}  // namespace treeopt
