#include "treeopt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "treeopt/error.hpp"

namespace treeopt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kStructure: return "structure";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kEncoding: return "encoding";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kEnumerationCap: return "enumeration-cap";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchemaVersion: return "schema-version";
    case ErrorCode::kMissingField: return "missing-field";
    case ErrorCode::kBadVariableKind: return "bad-variable-kind";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kUnknownVariable: return "unknown-variable";
    case ErrorCode::kThresholdNotInSchema: return "threshold-not-in-schema";
    case ErrorCode::kBadLevelSet: return "bad-level-set";
    case ErrorCode::kBadNodeReference: return "bad-node-reference";
    case ErrorCode::kNoTrees: return "no-trees";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// VariableSchema

VariableSchema::VariableSchema(std::vector<VariableSpec> variables) : variables_(std::move(variables)) {
  offsets_.reserve(variables_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& v = variables_[i];
    if (v.kind == VariableKind::kNumeric) {
      for (std::size_t j = 0; j < v.split_points.size(); ++j) {
        if (!std::isfinite(v.split_points[j]))
          throw Error(ErrorCode::kNonFinite, "variable " + std::to_string(i) + ": non-finite split point");
        if (j > 0 && !(v.split_points[j - 1] < v.split_points[j]))
          throw Error(ErrorCode::kSchema,
                      "variable " + std::to_string(i) + ": split points must be strictly increasing");
      }
    } else {
      if (v.levels < 1)
        throw Error(ErrorCode::kSchema, "categorical variable " + std::to_string(i) + " needs >= 1 level");
      if (!v.split_points.empty())
        throw Error(ErrorCode::kSchema, "categorical variable " + std::to_string(i) + " has split points");
    }
    offsets_.push_back(offsets_.back() + static_cast<std::size_t>(cardinality(i)));
  }
}

int VariableSchema::cardinality(std::size_t i) const {
  const auto& v = variables_.at(i);
  return v.kind == VariableKind::kNumeric ? static_cast<int>(v.split_points.size()) : v.levels;
}

int VariableSchema::find_split_point(std::size_t i, double value) const {
  const auto points = split_points(i);
  const auto it = std::lower_bound(points.begin(), points.end(), value);
  if (it == points.end() || *it != value) return -1;
  return static_cast<int>(it - points.begin());
}

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(std::vector<Node> nodes, NodeId root) : nodes_(std::move(nodes)), root_(root) {
  const auto count = static_cast<NodeId>(nodes_.size());
  if (count == 0) throw Error(ErrorCode::kStructure, "tree has no nodes");
  if (root_ < 0 || root_ >= count) throw Error(ErrorCode::kStructure, "root id out of range");

  for (NodeId id = 0; id < count; ++id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const bool has_left = n.left != kNoNode;
    const bool has_right = n.right != kNoNode;
    if (has_left != has_right)
      throw Error(ErrorCode::kStructure, "node " + std::to_string(id) + " has exactly one child");
    if (has_left && (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count))
      throw Error(ErrorCode::kStructure, "node " + std::to_string(id) + " references a missing child");
  }

  // Pre-order walk, left child first. Each node must be reached exactly once.
  leaf_ordinal_.assign(nodes_.size(), -1);
  leaf_sets_.left.assign(nodes_.size(), {});
  leaf_sets_.right.assign(nodes_.size(), {});
  std::vector<char> seen(nodes_.size(), 0);
  struct Frame {
    NodeId id;
    int depth;
  };
  std::vector<Frame> stack{{root_, 1}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    auto& n = nodes_[static_cast<std::size_t>(f.id)];
    if (seen[static_cast<std::size_t>(f.id)])
      throw Error(ErrorCode::kStructure, "node " + std::to_string(f.id) + " reachable twice (cycle or shared child)");
    seen[static_cast<std::size_t>(f.id)] = 1;
    n.depth = f.depth;
    if (n.is_leaf()) {
      leaf_ordinal_[static_cast<std::size_t>(f.id)] = static_cast<int>(leaves_.size());
      leaves_.push_back(f.id);
    } else {
      splits_.push_back(f.id);
      max_split_depth_ = std::max(max_split_depth_, f.depth);
      stack.push_back({n.right, f.depth + 1});
      stack.push_back({n.left, f.depth + 1});
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw Error(ErrorCode::kStructure, "tree contains nodes unreachable from the root");

  // Leaves are numbered left-first, so every subtree owns a contiguous range.
  std::vector<std::pair<int, int>> range(nodes_.size(), {0, 0});
  // Reversed breadth-first order visits children before parents.
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  order.push_back(root_);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Node& n = nodes_[static_cast<std::size_t>(order[k])];
    if (!n.is_leaf()) {
      order.push_back(n.left);
      order.push_back(n.right);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto id = static_cast<std::size_t>(*it);
    const Node& n = nodes_[id];
    if (n.is_leaf()) {
      range[id] = {leaf_ordinal_[id], leaf_ordinal_[id] + 1};
    } else {
      const auto l = range[static_cast<std::size_t>(n.left)];
      const auto r = range[static_cast<std::size_t>(n.right)];
      range[id] = {l.first, r.second};
      for (int k = l.first; k < l.second; ++k) leaf_sets_.left[id].push_back(k);
      for (int k = r.first; k < r.second; ++k) leaf_sets_.right[id].push_back(k);
    }
  }

  leaf_sets_.left_splits.assign(leaves_.size(), {});
  leaf_sets_.right_splits.assign(leaves_.size(), {});
  for (const NodeId s : splits_) {
    const auto id = static_cast<std::size_t>(s);
    for (const int l : leaf_sets_.left[id]) leaf_sets_.left_splits[static_cast<std::size_t>(l)].push_back(s);
    for (const int l : leaf_sets_.right[id]) leaf_sets_.right_splits[static_cast<std::size_t>(l)].push_back(s);
  }
}

// ---------------------------------------------------------------------------
// Ensemble

Ensemble::Ensemble(VariableSchema schema, std::vector<Tree> trees, std::vector<double> weights)
    : schema_(std::move(schema)), trees_(std::move(trees)), weights_(std::move(weights)) {
  if (trees_.empty()) throw Error(ErrorCode::kNoTrees, "ensemble needs at least one tree");
  if (weights_.size() != trees_.size())
    throw Error(ErrorCode::kStructure, "one weight per tree is required");
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    if (!std::isfinite(weights_[t]))
      throw Error(ErrorCode::kNonFinite, "tree " + std::to_string(t) + ": non-finite weight");
    for (const Node& n : trees_[t].nodes()) {
      const std::string where = "tree " + std::to_string(t);
      if (n.is_leaf()) {
        if (!std::isfinite(n.value)) throw Error(ErrorCode::kNonFinite, where + ": non-finite leaf value");
        continue;
      }
      if (n.var < 0 || static_cast<std::size_t>(n.var) >= schema_.size())
        throw Error(ErrorCode::kUnknownVariable, where + ": split on unknown variable " + std::to_string(n.var));
      const auto v = static_cast<std::size_t>(n.var);
      const int k = schema_.cardinality(v);
      if (schema_.is_numeric(v)) {
        if (n.split_index < 0 || n.split_index >= k)
          throw Error(ErrorCode::kThresholdNotInSchema, where + ": split index outside the variable's ladder");
      } else {
        const auto& c = n.categories;
        const bool sorted_unique = std::adjacent_find(c.begin(), c.end(), std::greater_equal<>()) == c.end();
        if (c.empty() || !sorted_unique || c.front() < 0 || c.back() >= k)
          throw Error(ErrorCode::kBadLevelSet, where + ": level set must be a sorted subset of the levels");
        if (static_cast<int>(c.size()) == k)
          throw Error(ErrorCode::kBadLevelSet, where + ": split on the full level set is vacuous");
      }
    }
  }
}

std::size_t Ensemble::num_leaves() const {
  std::size_t total = 0;
  for (const auto& t : trees_) total += t.num_leaves();
  return total;
}

int Ensemble::max_depth() const {
  int d = 0;
  for (const auto& t : trees_) d = std::max(d, t.max_split_depth());
  return d;
}

// ---------------------------------------------------------------------------
// Raw trees

VariableSchema extract_schema(std::span<const RawVariable> variables, std::span<const RawTree> trees) {
  std::vector<std::set<double>> points(variables.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (const RawNode& n : trees[t].nodes) {
      if (n.is_leaf()) continue;
      if (n.var < 0 || static_cast<std::size_t>(n.var) >= variables.size())
        throw Error(ErrorCode::kUnknownVariable,
                    "tree " + std::to_string(t) + ": split on unknown variable " + std::to_string(n.var));
      if (variables[static_cast<std::size_t>(n.var)].kind != VariableKind::kNumeric) continue;
      if (!std::isfinite(n.threshold))
        throw Error(ErrorCode::kNonFinite, "tree " + std::to_string(t) + ": non-finite threshold");
      points[static_cast<std::size_t>(n.var)].insert(n.threshold);
    }
  }
  std::vector<VariableSpec> specs;
  specs.reserve(variables.size());
  for (std::size_t i = 0; i < variables.size(); ++i) {
    VariableSpec spec;
    spec.name = variables[i].name;
    spec.kind = variables[i].kind;
    if (spec.kind == VariableKind::kNumeric)
      spec.split_points.assign(points[i].begin(), points[i].end());
    else
      spec.levels = variables[i].levels;
    specs.push_back(std::move(spec));
  }
  return VariableSchema(std::move(specs));
}

Tree index_tree(const RawTree& raw, const VariableSchema& schema) {
  std::vector<Node> nodes;
  nodes.reserve(raw.nodes.size());
  for (const RawNode& r : raw.nodes) {
    Node n;
    n.left = r.left;
    n.right = r.right;
    n.value = r.value;
    if (!r.is_leaf()) {
      n.var = r.var;
      if (r.var < 0 || static_cast<std::size_t>(r.var) >= schema.size())
        throw Error(ErrorCode::kUnknownVariable, "split on unknown variable " + std::to_string(r.var));
      if (schema.is_numeric(static_cast<std::size_t>(r.var))) {
        if (!std::isfinite(r.threshold)) throw Error(ErrorCode::kNonFinite, "non-finite threshold");
        n.split_index = schema.find_split_point(static_cast<std::size_t>(r.var), r.threshold);
        if (n.split_index < 0)
          throw Error(ErrorCode::kThresholdNotInSchema,
                      "threshold " + std::to_string(r.threshold) + " is not a split point of variable " +
                          std::to_string(r.var));
      } else {
        n.categories = r.levels;
        std::sort(n.categories.begin(), n.categories.end());
      }
    }
    nodes.push_back(std::move(n));
  }
  return Tree(std::move(nodes), raw.root);
}

Ensemble build_ensemble(std::span<const RawVariable> variables, std::span<const RawTree> trees) {
  VariableSchema schema = extract_schema(variables, trees);
  std::vector<Tree> indexed;
  std::vector<double> weights;
  indexed.reserve(trees.size());
  for (const RawTree& raw : trees) {
    indexed.push_back(index_tree(raw, schema));
    weights.push_back(raw.weight);
  }
  return Ensemble(std::move(schema), std::move(indexed), std::move(weights));
}

RawTree to_raw(const Tree& tree, const VariableSchema& schema, double weight) {
  RawTree raw;
  raw.root = tree.root();
  raw.weight = weight;
  raw.nodes.reserve(tree.nodes().size());
  for (const Node& n : tree.nodes()) {
    RawNode r;
    r.left = n.left;
    r.right = n.right;
    r.value = n.value;
    if (!n.is_leaf()) {
      r.var = n.var;
      if (schema.is_numeric(static_cast<std::size_t>(n.var)))
        r.threshold = schema.split_points(static_cast<std::size_t>(n.var))[static_cast<std::size_t>(n.split_index)];
      else
        r.levels = n.categories;
    }
    raw.nodes.push_back(std::move(r));
  }
  return raw;
}

std::vector<RawVariable> raw_variables(const VariableSchema& schema) {
  std::vector<RawVariable> vars;
  vars.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& v = schema.variable(i);
    vars.push_back({v.name, v.kind, v.kind == VariableKind::kCategorical ? v.levels : 0});
  }
  return vars;
}

// ---------------------------------------------------------------------------
// Evaluation

void check_domain(const VariableSchema& schema, std::span<const double> x) {
  if (x.size() != schema.size())
    throw Error(ErrorCode::kDomain, "input has " + std::to_string(x.size()) + " values, schema has " +
                                        std::to_string(schema.size()) + " variables");
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.is_numeric(i)) {
      if (std::isnan(x[i])) throw Error(ErrorCode::kDomain, "variable " + std::to_string(i) + " is NaN");
      continue;
    }
    const double level = x[i];
    if (level != std::floor(level) || level < 1 || level > schema.cardinality(i))
      throw Error(ErrorCode::kDomain, "variable " + std::to_string(i) + ": level " + std::to_string(level) +
                                          " outside 1.." + std::to_string(schema.cardinality(i)));
  }
}

bool evaluate_split(const Node& split, const VariableSchema& schema, std::span<const double> x) {
  const auto v = static_cast<std::size_t>(split.var);
  if (schema.is_numeric(v))
    return x[v] <= schema.split_points(v)[static_cast<std::size_t>(split.split_index)];
  const int level = static_cast<int>(x[v]) - 1;
  return std::binary_search(split.categories.begin(), split.categories.end(), level);
}

int find_leaf(const Tree& tree, const VariableSchema& schema, std::span<const double> x) {
  NodeId id = tree.root();
  while (!tree.node(id).is_leaf()) {
    const Node& n = tree.node(id);
    id = evaluate_split(n, schema, x) ? n.left : n.right;
  }
  return tree.leaf_ordinal(id);
}

double predict(const Ensemble& ensemble, std::span<const double> x) {
  check_domain(ensemble.schema(), x);
  double total = 0.0;
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    total += ensemble.weight(t) * tree.leaf_value(find_leaf(tree, ensemble.schema(), x));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Collapse

namespace {

// Values of one variable still admissible on the current path. Only tracked for
// gridded variables; a grid is a sorted list of raw values (levels for
// categorical variables).
using Admissible = std::map<int, std::vector<double>>;

class Collapser {
 public:
  Collapser(const Tree& tree, const VariableSchema& schema, const CollapseOptions& options)
      : tree_(tree), schema_(schema), options_(options) {}

  RawTree run(double weight) {
    Admissible admissible;
    for (const auto& [var, grid] : options_.grids) {
      std::vector<double> values = grid;
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      admissible[var] = std::move(values);
    }
    RawTree out;
    out.weight = weight;
    out.root = emit(tree_.root(), admissible, out);
    return out;
  }

 private:
  bool goes_left(const Node& n, double value) const {
    const auto v = static_cast<std::size_t>(n.var);
    if (schema_.is_numeric(v)) return value <= schema_.split_points(v)[static_cast<std::size_t>(n.split_index)];
    return std::binary_search(n.categories.begin(), n.categories.end(), static_cast<int>(value) - 1);
  }

  NodeId emit(NodeId id, Admissible& admissible, RawTree& out) {
    const Node& n = tree_.node(id);
    if (n.is_leaf()) {
      RawNode leaf;
      leaf.value = n.value;
      out.nodes.push_back(leaf);
      return static_cast<NodeId>(out.nodes.size() - 1);
    }
    if (const auto f = options_.fixed.find(n.var); f != options_.fixed.end())
      return emit(goes_left(n, f->second) ? n.left : n.right, admissible, out);

    if (const auto g = admissible.find(n.var); g != admissible.end()) {
      std::vector<double> yes, no;
      for (const double value : g->second) (goes_left(n, value) ? yes : no).push_back(value);
      if (yes.empty() || no.empty()) return emit(yes.empty() ? n.right : n.left, admissible, out);
      const std::vector<double> saved = g->second;
      g->second = std::move(yes);
      const NodeId left = emit(n.left, admissible, out);
      admissible[n.var] = std::move(no);
      const NodeId right = emit(n.right, admissible, out);
      admissible[n.var] = saved;
      return add_split(n, left, right, out);
    }
    const NodeId left = emit(n.left, admissible, out);
    const NodeId right = emit(n.right, admissible, out);
    return add_split(n, left, right, out);
  }

  NodeId add_split(const Node& n, NodeId left, NodeId right, RawTree& out) const {
    RawNode split;
    split.var = n.var;
    split.left = left;
    split.right = right;
    if (schema_.is_numeric(static_cast<std::size_t>(n.var)))
      split.threshold = schema_.split_points(static_cast<std::size_t>(n.var))[static_cast<std::size_t>(n.split_index)];
    else
      split.levels = n.categories;
    out.nodes.push_back(std::move(split));
    return static_cast<NodeId>(out.nodes.size() - 1);
  }

  const Tree& tree_;
  const VariableSchema& schema_;
  const CollapseOptions& options_;
};

void check_collapse_options(const VariableSchema& schema, const CollapseOptions& options) {
  for (const auto& [var, value] : options.fixed) {
    if (var < 0 || static_cast<std::size_t>(var) >= schema.size())
      throw Error(ErrorCode::kConfiguration, "fixed variable " + std::to_string(var) + " out of range");
    if (options.grids.contains(var))
      throw Error(ErrorCode::kConfiguration, "variable " + std::to_string(var) + " is both fixed and gridded");
    if (!schema.is_numeric(static_cast<std::size_t>(var)) &&
        (value != std::floor(value) || value < 1 || value > schema.cardinality(static_cast<std::size_t>(var))))
      throw Error(ErrorCode::kDomain, "fixed level outside the domain of variable " + std::to_string(var));
  }
  for (const auto& [var, grid] : options.grids) {
    if (var < 0 || static_cast<std::size_t>(var) >= schema.size())
      throw Error(ErrorCode::kConfiguration, "gridded variable " + std::to_string(var) + " out of range");
    if (grid.empty()) throw Error(ErrorCode::kConfiguration, "empty grid for variable " + std::to_string(var));
    for (const double value : grid) {
      if (!std::isfinite(value)) throw Error(ErrorCode::kDomain, "non-finite grid value");
      if (!schema.is_numeric(static_cast<std::size_t>(var)) &&
          (value != std::floor(value) || value < 1 || value > schema.cardinality(static_cast<std::size_t>(var))))
        throw Error(ErrorCode::kDomain, "grid level outside the domain of variable " + std::to_string(var));
    }
  }
}

}  // namespace

RawTree collapse_tree(const Tree& tree, const VariableSchema& schema, const CollapseOptions& options,
                      double weight) {
  check_collapse_options(schema, options);
  return Collapser(tree, schema, options).run(weight);
}

Ensemble collapse_ensemble(const Ensemble& ensemble, const CollapseOptions& options) {
  std::vector<RawTree> raw;
  raw.reserve(ensemble.size());
  for (std::size_t t = 0; t < ensemble.size(); ++t)
    raw.push_back(collapse_tree(ensemble.tree(t), ensemble.schema(), options, ensemble.weight(t)));
  const auto vars = raw_variables(ensemble.schema());
  return build_ensemble(vars, raw);
}

}  // namespace treeopt
