#include "treeopt/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "treeopt/error.hpp"

namespace treeopt {

namespace {

std::string idx(std::string_view stem, std::size_t a) { return std::string(stem) + "[" + std::to_string(a) + "]"; }
std::string idx(std::string_view stem, std::size_t a, std::size_t b) {
  return idx(stem, a) + "[" + std::to_string(b) + "]";
}

// Appends coef * sum_{j in C(s)} x_{V(s), j}.
void add_query(std::vector<LinearTerm>& terms, const MilpModel& model, const Node& s, double coef) {
  const auto& bits = model.x_vars.at(static_cast<std::size_t>(s.var));
  if (s.split_index >= 0) {
    terms.push_back({bits.at(static_cast<std::size_t>(s.split_index)), coef});
    return;
  }
  for (const int level : s.categories) terms.push_back({bits.at(static_cast<std::size_t>(level)), coef});
}

std::optional<std::vector<double>> leaf_indicators(const Ensemble& ensemble,
                                                   const std::vector<std::vector<int>>& x_vars,
                                                   const std::vector<std::vector<int>>& y_vars,
                                                   std::span<const double> values) {
  const VariableSchema& schema = ensemble.schema();
  BinaryEncoding enc;
  enc.bits.reserve(schema.num_bits());
  for (const auto& bits : x_vars)
    for (const int b : bits) enc.bits.push_back(values[static_cast<std::size_t>(b)] > 0.5 ? 1 : 0);
  if (validate(schema, enc.bits)) return std::nullopt;
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t t = 0; t < y_vars.size(); ++t) {
    const int leaf = get_leaf(ensemble.tree(t), schema, enc);
    for (std::size_t l = 0; l < y_vars[t].size(); ++l)
      out[static_cast<std::size_t>(y_vars[t][l])] = static_cast<int>(l) == leaf ? 1.0 : 0.0;
  }
  return out;
}

MilpModel build_base(const Ensemble& ensemble, bool convexity, bool leaves = true) {
  const VariableSchema& schema = ensemble.schema();
  MilpModel model;
  model.x_vars.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const int k = schema.cardinality(i);
    for (int j = 0; j < k; ++j)
      model.x_vars[i].push_back(model.add_variable(idx("x", i, static_cast<std::size_t>(j)), VarType::kBinary, 0, 1));
  }
  model.y_vars.resize(leaves ? ensemble.size() : 0);
  for (std::size_t t = 0; t < model.y_vars.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
      model.y_vars[t].push_back(model.add_variable(idx("y", t, l), VarType::kContinuous, 0, 1,
                                                   ensemble.weight(t) * tree.leaf_value(static_cast<int>(l))));
  }

  if (convexity && leaves) {
    for (std::size_t t = 0; t < ensemble.size(); ++t) {
      LinearRow row{{}, RowSense::kEqual, 1.0, idx("convex", t), "convexity"};
      for (const int y : model.y_vars[t]) row.terms.push_back({y, 1.0});
      model.add_row(std::move(row));
    }
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& bits = model.x_vars[i];
    if (schema.is_numeric(i)) {
      for (std::size_t j = 0; j + 1 < bits.size(); ++j)
        model.add_row({{{bits[j], 1.0}, {bits[j + 1], -1.0}}, RowSense::kLessEqual, 0.0, idx("ladder", i, j), "ladder"});
      if (!bits.empty()) model.ladders.push_back(bits);
    } else {
      LinearRow row{{}, RowSense::kEqual, 1.0, idx("onehot", i), "one-hot"};
      for (const int b : bits) row.terms.push_back({b, 1.0});
      model.add_row(std::move(row));
      model.one_hots.push_back(bits);
    }
  }

  auto shared = std::make_shared<const Ensemble>(ensemble);
  model.repair = [shared, x_vars = model.x_vars, y_vars = model.y_vars](std::span<const double> values) {
    return leaf_indicators(*shared, x_vars, y_vars, values);
  };
  return model;
}

void add_split_rows(MilpModel& model, const Ensemble& ensemble, int max_depth) {
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    for (const NodeId s : tree.splits()) {
      if (max_depth > 0 && tree.node(s).depth > max_depth) continue;
      model.add_row(split_left_row(model, ensemble, t, s));
      model.add_row(split_right_row(model, ensemble, t, s));
    }
  }
}

}  // namespace

LinearRow split_left_row(const MilpModel& model, const Ensemble& ensemble, std::size_t t, NodeId s) {
  const Tree& tree = ensemble.tree(t);
  LinearRow row{{}, RowSense::kLessEqual, 0.0, idx("left", t, static_cast<std::size_t>(s)), "split-left"};
  for (const int l : tree.leaf_sets().left[static_cast<std::size_t>(s)])
    row.terms.push_back({model.y_vars[t][static_cast<std::size_t>(l)], 1.0});
  add_query(row.terms, model, tree.node(s), -1.0);
  return row;
}

LinearRow split_right_row(const MilpModel& model, const Ensemble& ensemble, std::size_t t, NodeId s) {
  const Tree& tree = ensemble.tree(t);
  LinearRow row{{}, RowSense::kLessEqual, 1.0, idx("right", t, static_cast<std::size_t>(s)), "split-right"};
  for (const int l : tree.leaf_sets().right[static_cast<std::size_t>(s)])
    row.terms.push_back({model.y_vars[t][static_cast<std::size_t>(l)], 1.0});
  add_query(row.terms, model, tree.node(s), 1.0);
  return row;
}

MilpModel build_full(const Ensemble& ensemble) {
  MilpModel model = build_base(ensemble, true);
  add_split_rows(model, ensemble, 0);
  return model;
}

MilpModel build_truncated(const Ensemble& ensemble, int depth) {
  if (depth < 1) throw Error(ErrorCode::kConfiguration, "truncation depth must be >= 1");
  MilpModel model = build_base(ensemble, true);
  add_split_rows(model, ensemble, depth);
  return model;
}

MilpModel build_encoding_model(const Ensemble& ensemble) {
  MilpModel model = build_base(ensemble, false, false);
  model.repair = nullptr;
  return model;
}

MilpModel build_relaxed_master(const Ensemble& ensemble) { return build_base(ensemble, true); }

MilpModel build_standard_linearization(const Ensemble& ensemble) {
  MilpModel model = build_base(ensemble, false);
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    const LeafSets& sets = tree.leaf_sets();
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
      const int y = model.y_vars[t][l];
      const auto& ls = sets.left_splits[l];
      const auto& rs = sets.right_splits[l];
      LinearRow lower{{{y, -1.0}}, RowSense::kLessEqual, static_cast<double>(ls.size() + rs.size()) - 1.0,
                      idx("stdlin_lower", t, l), "stdlin-lower"};
      for (const NodeId s : ls) {
        LinearRow row{{{y, 1.0}}, RowSense::kLessEqual, 0.0,
                      idx("stdlin_left", t, l) + "[" + std::to_string(s) + "]", "stdlin-upper"};
        add_query(row.terms, model, tree.node(s), -1.0);
        model.add_row(std::move(row));
        add_query(lower.terms, model, tree.node(s), 1.0);
      }
      for (const NodeId s : rs) {
        LinearRow row{{{y, 1.0}}, RowSense::kLessEqual, 1.0,
                      idx("stdlin_right", t, l) + "[" + std::to_string(s) + "]", "stdlin-upper"};
        add_query(row.terms, model, tree.node(s), 1.0);
        model.add_row(std::move(row));
        // (1 - sum x) contributes -sum x to the left side and -1 to the rhs.
        add_query(lower.terms, model, tree.node(s), -1.0);
        lower.rhs -= 1.0;
      }
      model.add_row(std::move(lower));
    }
  }
  return model;
}

TruncationBound truncation_bound(const Ensemble& ensemble, int depth) {
  if (depth < 1) throw Error(ErrorCode::kConfiguration, "truncation depth must be >= 1");
  TruncationBound out;
  out.depth = depth;
  out.tree_delta.assign(ensemble.size(), 0.0);
  out.splits.resize(ensemble.size());
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    if (ensemble.weight(t) < 0)
      throw Error(ErrorCode::kConfiguration, "truncation bound needs nonnegative weights; normalize first");
    const Tree& tree = ensemble.tree(t);
    const LeafSets& sets = tree.leaf_sets();
    auto range = [&](const std::vector<int>& leaves) {
      double lo = tree.leaf_value(leaves.front());
      double hi = lo;
      for (const int l : leaves) {
        lo = std::min(lo, tree.leaf_value(l));
        hi = std::max(hi, tree.leaf_value(l));
      }
      return hi - lo;
    };
    for (const NodeId s : tree.splits()) {
      if (tree.node(s).depth != depth) continue;
      const double delta = std::max(range(sets.left[static_cast<std::size_t>(s)]),
                                    range(sets.right[static_cast<std::size_t>(s)]));
      out.splits[t].push_back({s, delta});
      out.tree_delta[t] = std::max(out.tree_delta[t], delta);
    }
    out.total += ensemble.weight(t) * out.tree_delta[t];
  }
  return out;
}

Ensemble normalize_weights(const Ensemble& ensemble) {
  std::vector<Tree> trees;
  std::vector<double> weights;
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    if (ensemble.weight(t) >= 0) {
      trees.push_back(tree);
      weights.push_back(ensemble.weight(t));
      continue;
    }
    std::vector<Node> nodes(tree.nodes().begin(), tree.nodes().end());
    for (Node& n : nodes)
      if (n.is_leaf()) n.value = -n.value;
    trees.emplace_back(std::move(nodes), tree.root());
    weights.push_back(-ensemble.weight(t));
  }
  return Ensemble(ensemble.schema(), std::move(trees), std::move(weights));
}

int add_leaf_linear_constraint(MilpModel& model, std::span<const LeafTerm> terms, RowSense sense, double rhs,
                               std::string name) {
  LinearRow row{{}, sense, rhs, std::move(name), "leaf-linear"};
  for (const auto& term : terms) {
    if (term.tree < 0 || static_cast<std::size_t>(term.tree) >= model.y_vars.size() || term.leaf < 0 ||
        static_cast<std::size_t>(term.leaf) >= model.y_vars[static_cast<std::size_t>(term.tree)].size())
      throw Error(ErrorCode::kConfiguration, "unknown leaf key (" + std::to_string(term.tree) + ", " +
                                                 std::to_string(term.leaf) + ")");
    row.terms.push_back({model.y_vars[static_cast<std::size_t>(term.tree)][static_cast<std::size_t>(term.leaf)],
                         term.coef});
  }
  return model.add_row(std::move(row));
}

std::vector<std::vector<int>> proximity_vectors(const Ensemble& ensemble, std::span<const std::vector<double>> points) {
  std::vector<std::vector<int>> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    check_domain(ensemble.schema(), p);
    std::vector<int> leaves(ensemble.size());
    for (std::size_t t = 0; t < ensemble.size(); ++t) leaves[t] = find_leaf(ensemble.tree(t), ensemble.schema(), p);
    out.push_back(std::move(leaves));
  }
  return out;
}

double proximity(const Ensemble& ensemble, std::span<const double> a, std::span<const double> b) {
  check_domain(ensemble.schema(), a);
  check_domain(ensemble.schema(), b);
  std::size_t same = 0;
  for (std::size_t t = 0; t < ensemble.size(); ++t)
    same += find_leaf(ensemble.tree(t), ensemble.schema(), a) == find_leaf(ensemble.tree(t), ensemble.schema(), b);
  return static_cast<double>(same) / static_cast<double>(ensemble.size());
}

void add_proximity_constraints(MilpModel& model, const Ensemble& ensemble,
                               std::span<const std::vector<double>> points, double cap) {
  const auto vectors = proximity_vectors(ensemble, points);
  const double scale = 1.0 / static_cast<double>(ensemble.size());
  for (std::size_t m = 0; m < vectors.size(); ++m) {
    std::vector<LeafTerm> terms;
    for (std::size_t t = 0; t < ensemble.size(); ++t) terms.push_back({static_cast<int>(t), vectors[m][t], scale});
    add_leaf_linear_constraint(model, terms, RowSense::kLessEqual, cap, idx("proximity", m));
  }
}

BinaryEncoding encoding_of(const MilpModel& model, std::span<const double> values) {
  BinaryEncoding enc;
  for (const auto& bits : model.x_vars)
    for (const int b : bits) enc.bits.push_back(values[static_cast<std::size_t>(b)] > 0.5 ? 1 : 0);
  return enc;
}

std::vector<double> repair_leaf_indicators(const MilpModel& model, const Ensemble& ensemble,
                                           std::span<const double> values) {
  auto out = leaf_indicators(ensemble, model.x_vars, model.y_vars, values);
  if (!out) throw Error(ErrorCode::kEncoding, "x part of the point violates the ladder/one-hot rows");
  return *std::move(out);
}

}  // namespace treeopt
