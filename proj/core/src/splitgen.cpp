#include "treeopt/splitgen.hpp"

#include <memory>

#include "treeopt/encoding.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/solve.hpp"

namespace treeopt {

std::optional<SplitViolation> find_violation(const Tree& tree, const VariableSchema& schema,
                                             std::span<const double> x, std::span<const double> y, double tol) {
  const LeafSets& sets = tree.leaf_sets();
  auto mass = [&](const std::vector<int>& leaves) {
    double sum = 0.0;
    for (const int l : leaves) sum += y[static_cast<std::size_t>(l)];
    return sum;
  };
  NodeId id = tree.root();
  while (!tree.node(id).is_leaf()) {
    const Node& n = tree.node(id);
    const double q = query_sum<double>(n, schema, x);
    const auto sid = static_cast<std::size_t>(id);
    if (q > 0.5) {
      const double excess = mass(sets.right[sid]) - (1.0 - q);
      if (excess > tol) return SplitViolation{id, SplitSide::kRight, excess};
      id = n.left;
    } else {
      const double excess = mass(sets.left[sid]) - q;
      if (excess > tol) return SplitViolation{id, SplitSide::kLeft, excess};
      id = n.right;
    }
  }
  return std::nullopt;
}

bool ActiveSplitSet::add(std::size_t tree, NodeId split, SplitSide side) {
  return rows_.emplace(tree, split, side).second;
}

bool ActiveSplitSet::add_pair(std::size_t tree, NodeId split) {
  const bool left = add(tree, split, SplitSide::kLeft);
  const bool right = add(tree, split, SplitSide::kRight);
  return left || right;
}

bool ActiveSplitSet::contains(std::size_t tree, NodeId split, SplitSide side) const {
  return rows_.contains({tree, split, side});
}

std::size_t ActiveSplitSet::num_pairs() const {
  std::set<std::pair<std::size_t, NodeId>> pairs;
  for (const auto& [t, s, side] : rows_) pairs.emplace(t, s);
  return pairs.size();
}

ActiveSplitSet ActiveSplitSet::up_to_depth(const Ensemble& ensemble, int depth) {
  ActiveSplitSet out;
  for (std::size_t t = 0; t < ensemble.size(); ++t)
    for (const NodeId s : ensemble.tree(t).splits())
      if (ensemble.tree(t).node(s).depth <= depth) out.add_pair(t, s);
  return out;
}

ActiveSplitSet ActiveSplitSet::all(const Ensemble& ensemble) {
  return up_to_depth(ensemble, std::max(ensemble.max_depth(), 1));
}

namespace {

struct PointView {
  std::vector<double> x;
  std::vector<std::vector<double>> y;
};

PointView view(const MilpModel& layout, std::span<const double> values) {
  PointView v;
  for (const auto& bits : layout.x_vars)
    for (const int b : bits) v.x.push_back(values[static_cast<std::size_t>(b)]);
  for (const auto& leaves : layout.y_vars) {
    std::vector<double> yt;
    yt.reserve(leaves.size());
    for (const int l : leaves) yt.push_back(values[static_cast<std::size_t>(l)]);
    v.y.push_back(std::move(yt));
  }
  return v;
}

LinearRow row_for(const MilpModel& model, const Ensemble& ensemble, std::size_t t, NodeId s, SplitSide side) {
  return side == SplitSide::kLeft ? split_left_row(model, ensemble, t, s) : split_right_row(model, ensemble, t, s);
}

}  // namespace

SolveResult solve_splitgen_lazy(const Ensemble& ensemble, const BnbConfig& config,
                                std::optional<std::vector<double>> warm_start, double tol) {
  MilpModel model = build_relaxed_master(ensemble);
  auto shared = std::make_shared<const Ensemble>(ensemble);
  auto layout = std::make_shared<MilpModel>();
  layout->x_vars = model.x_vars;
  layout->y_vars = model.y_vars;
  register_lazy(model, [shared, layout, tol](const LazyContext& ctx) {
    const PointView v = view(*layout, ctx.values);
    std::vector<LinearRow> rows;
    for (std::size_t t = 0; t < shared->size(); ++t) {
      const auto hit = find_violation(shared->tree(t), shared->schema(), v.x, v.y[t], tol);
      if (!hit) continue;
      LinearRow row = row_for(*layout, *shared, t, hit->split, hit->side);
      if (ctx.has_row(row.name)) continue;
      rows.push_back(std::move(row));
    }
    return rows;
  });

  BnbConfig cfg = config;
  if (warm_start) {
    const BinaryEncoding bits = encode(ensemble.schema(), *warm_start);
    std::vector<double> point(model.num_variables(), 0.0);
    std::size_t k = 0;
    for (const auto& vars : model.x_vars)
      for (const int b : vars) point[static_cast<std::size_t>(b)] = bits.bits[k++];
    cfg.initial_point = repair_leaf_indicators(model, ensemble, point);
  }
  SolveResult result = solve_milp(model, cfg);
  attach_solution(ensemble, model, result, true);
  return result;
}

SolveResult solve_splitgen_iterative(const Ensemble& ensemble, const BnbConfig& config, ActiveSplitSet active,
                                     int max_rounds, double tol) {
  SolveStats total;
  std::vector<std::size_t> trace;
  for (int round = 1;; ++round) {
    trace.push_back(active.num_pairs());
    MilpModel model = build_relaxed_master(ensemble);
    for (const auto& [t, s, side] : active.rows()) model.add_row(row_for(model, ensemble, t, s, side));
    SolveResult result = solve_milp(model, config);
    total.nodes += result.stats.nodes;
    total.lp_solves += result.stats.lp_solves;
    total.lp_iterations += result.stats.lp_iterations;
    total.incumbent_updates += result.stats.incumbent_updates;
    total.wall_ms += result.stats.wall_ms;

    bool added = false;
    if (result.status == SolveStatus::kOptimal) {
      const PointView v = view(model, result.values);
      for (std::size_t t = 0; t < ensemble.size(); ++t) {
        const auto hit = find_violation(ensemble.tree(t), ensemble.schema(), v.x, v.y[t], tol);
        if (!hit) continue;
        const bool left = active.add(t, hit->split, SplitSide::kLeft);
        const bool right = active.add(t, hit->split, SplitSide::kRight);
        total.cuts["split-left"] += left;
        total.cuts["split-right"] += right;
        added = added || left || right;
      }
    }
    if (!added || (max_rounds > 0 && round >= max_rounds)) {
      if (added) result.status = SolveStatus::kLimitReached;
      result.stats = total;
      result.trace = std::move(trace);
      attach_solution(ensemble, model, result, !added);
      return result;
    }
  }
}

}  // namespace treeopt
