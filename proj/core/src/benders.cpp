#include "treeopt/benders.hpp"

#include <algorithm>
#include <memory>

#include "treeopt/encoding.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/solve.hpp"

namespace treeopt {

namespace {

double query(const Node& s, const VariableSchema& schema, std::span<const double> x) {
  return query_sum<double>(s, schema, x);
}

std::string cut_name(const BendersCut& cut) {
  return "benders[" + std::to_string(cut.tree) + "][" + std::to_string(cut.leaf) + "]";
}

}  // namespace

std::vector<double> primal_sub(const Tree& tree, const VariableSchema& schema, const BinaryEncoding& bits) {
  std::vector<double> y(tree.num_leaves(), 0.0);
  y[static_cast<std::size_t>(get_leaf(tree, schema, bits))] = 1.0;
  return y;
}

BendersCut dual_from_leaf(const Tree& tree, int leaf, int tree_index) {
  const LeafSets& sets = tree.leaf_sets();
  const double p_star = tree.leaf_value(leaf);
  auto excess = [&](const std::vector<int>& leaves) {
    double best = 0.0;
    for (const int l : leaves) best = std::max(best, tree.leaf_value(l) - p_star);
    return best;
  };
  BendersCut cut;
  cut.tree = tree_index;
  cut.leaf = leaf;
  cut.gamma = p_star;
  for (const NodeId s : sets.right_splits[static_cast<std::size_t>(leaf)])
    cut.alpha.push_back({s, excess(sets.left[static_cast<std::size_t>(s)])});
  for (const NodeId s : sets.left_splits[static_cast<std::size_t>(leaf)])
    cut.beta.push_back({s, excess(sets.right[static_cast<std::size_t>(s)])});
  return cut;
}

double cut_value(const BendersCut& cut, const Tree& tree, const VariableSchema& schema, std::span<const double> x) {
  double v = cut.gamma;
  for (const auto& [s, a] : cut.alpha) v += a * query(tree.node(s), schema, x);
  for (const auto& [s, b] : cut.beta) v += b * (1.0 - query(tree.node(s), schema, x));
  return v;
}

double dual_infeasibility(const BendersCut& cut, const Tree& tree) {
  const LeafSets& sets = tree.leaf_sets();
  std::vector<double> lhs(tree.num_leaves(), cut.gamma);
  for (const auto& [s, a] : cut.alpha)
    for (const int l : sets.left[static_cast<std::size_t>(s)]) lhs[static_cast<std::size_t>(l)] += a;
  for (const auto& [s, b] : cut.beta)
    for (const int l : sets.right[static_cast<std::size_t>(s)]) lhs[static_cast<std::size_t>(l)] += b;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < lhs.size(); ++l) worst = std::max(worst, tree.leaf_value(static_cast<int>(l)) - lhs[l]);
  for (const auto& e : cut.alpha) worst = std::max(worst, -e.value);
  for (const auto& e : cut.beta) worst = std::max(worst, -e.value);
  return worst;
}

std::optional<BendersCut> violated_cut(const Tree& tree, const VariableSchema& schema, const BinaryEncoding& bits,
                                       double theta, double tol) {
  const int leaf = get_leaf(tree, schema, bits);
  if (!(theta > tree.leaf_value(leaf) + tol)) return std::nullopt;
  return dual_from_leaf(tree, leaf);
}

MilpModel build_benders_master(const Ensemble& ensemble) {
  MilpModel model = build_encoding_model(ensemble);
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    double lo = tree.leaf_value(0);
    double hi = lo;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
      lo = std::min(lo, tree.leaf_value(static_cast<int>(l)));
      hi = std::max(hi, tree.leaf_value(static_cast<int>(l)));
    }
    model.theta_vars.push_back(
        model.add_variable("theta[" + std::to_string(t) + "]", VarType::kContinuous, lo, hi, ensemble.weight(t)));
  }
  auto shared = std::make_shared<const Ensemble>(ensemble);
  model.repair = [shared, x_vars = model.x_vars, theta = model.theta_vars](std::span<const double> values)
      -> std::optional<std::vector<double>> {
    const VariableSchema& schema = shared->schema();
    BinaryEncoding enc;
    for (const auto& bits : x_vars)
      for (const int b : bits) enc.bits.push_back(values[static_cast<std::size_t>(b)] > 0.5 ? 1 : 0);
    if (validate(schema, enc.bits)) return std::nullopt;
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t t = 0; t < theta.size(); ++t)
      out[static_cast<std::size_t>(theta[t])] = shared->tree(t).leaf_value(get_leaf(shared->tree(t), schema, enc));
    return out;
  };
  return model;
}

LinearRow benders_row(const MilpModel& master, const Ensemble& ensemble, const BendersCut& cut) {
  const Tree& tree = ensemble.tree(static_cast<std::size_t>(cut.tree));
  LinearRow row{{{master.theta_vars.at(static_cast<std::size_t>(cut.tree)), 1.0}}, RowSense::kLessEqual, cut.gamma,
                cut_name(cut), "benders"};
  auto add_query = [&](NodeId s, double coef) {
    const Node& n = tree.node(s);
    const auto& bits = master.x_vars.at(static_cast<std::size_t>(n.var));
    if (n.split_index >= 0) {
      row.terms.push_back({bits[static_cast<std::size_t>(n.split_index)], coef});
      return;
    }
    for (const int level : n.categories) row.terms.push_back({bits[static_cast<std::size_t>(level)], coef});
  };
  for (const auto& [s, a] : cut.alpha)
    if (a != 0.0) add_query(s, -a);
  for (const auto& [s, b] : cut.beta) {
    if (b == 0.0) continue;
    add_query(s, b);
    row.rhs += b;
  }
  return row;
}

SolveResult solve_benders(const Ensemble& original, const BnbConfig& config) {
  auto ensemble = std::make_shared<const Ensemble>(normalize_weights(original));
  MilpModel master = build_benders_master(*ensemble);
  const double tol = config.lp.feas_tol;
  // Variable layout of the master, enough to build rows and read x.
  auto layout = std::make_shared<MilpModel>();
  layout->x_vars = master.x_vars;
  layout->theta_vars = master.theta_vars;
  register_lazy(master, [ensemble, layout, tol](const LazyContext& ctx) {
    const BinaryEncoding bits = encoding_of(*layout, ctx.values);
    std::vector<LinearRow> rows;
    for (std::size_t t = 0; t < ensemble->size(); ++t) {
      const double theta = ctx.values[static_cast<std::size_t>(layout->theta_vars[t])];
      auto cut = violated_cut(ensemble->tree(t), ensemble->schema(), bits, theta, tol);
      if (!cut) continue;
      cut->tree = static_cast<int>(t);
      LinearRow row = benders_row(*layout, *ensemble, *cut);
      if (ctx.has_row(row.name)) continue;
      rows.push_back(std::move(row));
    }
    return rows;
  });
  SolveResult result = solve_milp(master, config);
  attach_solution(original, master, result, true);
  return result;
}

}  // namespace treeopt
