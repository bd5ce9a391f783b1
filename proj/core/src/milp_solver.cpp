#include "treeopt/milp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>
#include <utility>

#include "treeopt/error.hpp"

namespace treeopt {

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kLimitReached: return "limit-reached";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

long SolveStats::total_cuts() const {
  long n = 0;
  for (const auto& [kind, count] : cuts) n += count;
  return n;
}

double relative_gap(double ub, double lb) { return (ub - lb) / std::max(std::abs(ub), 1e-10); }

void register_lazy(MilpModel& model, LazyGenerator generator) {
  model.lazy_generators.push_back(std::move(generator));
}

namespace {

using Fixings = std::vector<std::pair<int, std::uint8_t>>;

struct BnbNode {
  long id = 0;
  int depth = 0;
  double bound = std::numeric_limits<double>::infinity();
  Fixings fixings;
  Basis basis;
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const BnbConfig& config)
      : model_(model), config_(config), lp_(config.lp), start_(std::chrono::steady_clock::now()) {
    lp_.load(model);
    ladder_of_.assign(model.num_variables(), {-1, -1});
    one_hot_of_.assign(model.num_variables(), -1);
    for (std::size_t l = 0; l < model.ladders.size(); ++l)
      for (std::size_t p = 0; p < model.ladders[l].size(); ++p)
        ladder_of_[static_cast<std::size_t>(model.ladders[l][p])] = {static_cast<int>(l), static_cast<int>(p)};
    for (std::size_t h = 0; h < model.one_hots.size(); ++h)
      for (const int v : model.one_hots[h]) one_hot_of_[static_cast<std::size_t>(v)] = static_cast<int>(h);
    for (std::size_t j = 0; j < model.num_variables(); ++j)
      if (model.variables()[j].type == VarType::kBinary) binaries_.push_back(static_cast<int>(j));
  }

  SolveResult run() {
    if (config_.initial_point) try_incumbent(*config_.initial_point);

    push(BnbNode{next_id_++, 0, std::numeric_limits<double>::infinity(), {}, {}});
    bool limit = false;
    while (!open_.empty()) {
      if (has_incumbent_ && dominated(*bounds_.rbegin())) break;
      if (limit_reached()) {
        limit = true;
        break;
      }
      BnbNode node = pop();
      if (has_incumbent_ && dominated(node.bound)) continue;
      ++result_.stats.nodes;
      process(node);
    }

    double ub = bounds_.empty() ? -std::numeric_limits<double>::infinity() : *bounds_.rbegin();
    if (has_incumbent_) ub = std::max(ub, incumbent_obj_);
    if (has_incumbent_) {
      result_.has_incumbent = true;
      result_.objective = incumbent_obj_;
      result_.bound = ub;
      result_.gap = std::max(0.0, relative_gap(ub, incumbent_obj_));
      result_.values = incumbent_;
      result_.status = limit ? SolveStatus::kLimitReached : SolveStatus::kOptimal;
    } else {
      result_.status = limit ? SolveStatus::kLimitReached : SolveStatus::kInfeasible;
      result_.bound = ub;
    }
    result_.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return std::move(result_);
  }

 private:
  bool dominated(double bound) const {
    if (!std::isfinite(bound)) return false;
    const double diff = bound - incumbent_obj_;
    return diff <= config_.abs_gap || diff <= config_.rel_gap * std::max(std::abs(bound), 1e-10);
  }

  bool limit_reached() const {
    if (config_.node_limit > 0 && result_.stats.nodes >= config_.node_limit) return true;
    if (config_.time_limit > 0) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (elapsed >= config_.time_limit) return true;
    }
    return false;
  }

  using Key = std::pair<double, long>;

  void push(BnbNode node) {
    const Key key = config_.selection == NodeSelection::kBestBound ? Key{-node.bound, node.id}
                                                                   : Key{0.0, -node.id};
    bounds_.insert(node.bound);
    open_.emplace(key, std::move(node));
  }

  BnbNode pop() {
    auto it = open_.begin();
    BnbNode node = std::move(it->second);
    open_.erase(it);
    bounds_.erase(bounds_.find(node.bound));
    return node;
  }

  // Closes `fix` under the ladder and one-hot implications; false on conflict.
  bool propagate(Fixings& fix) const {
    std::map<int, std::uint8_t> value;
    std::vector<std::pair<int, std::uint8_t>> work(fix.begin(), fix.end());
    while (!work.empty()) {
      const auto [v, b] = work.back();
      work.pop_back();
      const auto [it, inserted] = value.emplace(v, b);
      if (!inserted) {
        if (it->second != b) return false;
        continue;
      }
      const auto [ladder, pos] = ladder_of_[static_cast<std::size_t>(v)];
      if (ladder >= 0) {
        const auto& bits = model_.ladders[static_cast<std::size_t>(ladder)];
        if (b == 1)
          for (std::size_t p = static_cast<std::size_t>(pos) + 1; p < bits.size(); ++p) work.emplace_back(bits[p], 1);
        else
          for (int p = 0; p < pos; ++p) work.emplace_back(bits[static_cast<std::size_t>(p)], 0);
      }
      const int hot = one_hot_of_[static_cast<std::size_t>(v)];
      if (hot >= 0 && b == 1)
        for (const int other : model_.one_hots[static_cast<std::size_t>(hot)])
          if (other != v) work.emplace_back(other, 0);
    }
    fix.assign(value.begin(), value.end());
    return true;
  }

  void apply(const Fixings& fix) {
    for (const auto& [v, b] : applied_) {
      const auto& var = model_.variable(v);
      lp_.set_bounds(v, var.lower, var.upper);
    }
    for (const auto& [v, b] : fix) lp_.set_bounds(v, b, b);
    applied_ = fix;
  }

  LpSolution solve_lp() {
    LpSolution sol = lp_.solve();
    ++result_.stats.lp_solves;
    result_.stats.lp_iterations += sol.iterations;
    if (sol.status == LpStatus::kIterationLimit) {
      lp_.reset_basis();
      sol = lp_.solve();
      ++result_.stats.lp_solves;
      result_.stats.lp_iterations += sol.iterations;
    }
    if (sol.status != LpStatus::kOptimal && sol.status != LpStatus::kInfeasible)
      throw Error(ErrorCode::kInternal, "node LP ended with status " + std::string(to_string(sol.status)));
    return sol;
  }

  std::vector<LinearRow> generate(std::span<const double> point) const {
    std::vector<LinearRow> rows;
    const LazyContext ctx{point, &lazy_names_};
    for (const auto& gen : model_.lazy_generators) {
      auto more = gen(ctx);
      for (auto& r : more) rows.push_back(std::move(r));
    }
    return rows;
  }

  bool feasible(std::span<const double> point) const {
    const double tol = 10 * config_.lp.feas_tol;
    if (point.size() != model_.num_variables()) return false;
    for (std::size_t j = 0; j < point.size(); ++j) {
      const auto& v = model_.variables()[j];
      if (point[j] < v.lower - tol || point[j] > v.upper + tol) return false;
      if (v.type == VarType::kBinary && std::abs(point[j] - std::round(point[j])) > config_.int_tol) return false;
    }
    for (const auto& r : model_.rows())
      if (r.violation(point) > tol) return false;
    for (const auto& r : lazy_rows_)
      if (r.violation(point) > tol) return false;
    return true;
  }

  void offer(std::span<const double> point, double objective) {
    if (has_incumbent_ && objective <= incumbent_obj_) return;
    has_incumbent_ = true;
    incumbent_obj_ = objective;
    incumbent_.assign(point.begin(), point.end());
    ++result_.stats.incumbent_updates;
  }

  void try_incumbent(std::span<const double> point) {
    if (!feasible(point) || !generate(point).empty()) return;
    offer(point, model_.objective_value(point));
  }

  void process(BnbNode& node) {
    apply(node.fixings);
    if (!node.basis.columns.empty()) lp_.set_basis(node.basis);
    while (true) {
      const LpSolution sol = solve_lp();
      if (sol.status == LpStatus::kInfeasible) return;
      if (has_incumbent_ && dominated(sol.objective)) return;

      int branch = -1;
      double best = config_.int_tol;
      for (const int v : binaries_) {
        const double val = sol.primal[static_cast<std::size_t>(v)];
        const double frac = std::min(val - std::floor(val), std::ceil(val) - val);
        if (frac > best) {
          branch = v;
          best = frac;
          if (config_.branching == BranchRule::kFirstFractional) break;
        }
      }
      if (branch >= 0) {
        split(node, sol, branch);
        return;
      }

      if (model_.repair) {
        if (auto candidate = model_.repair(sol.primal)) try_incumbent(*candidate);
      }
      auto rows = generate(sol.primal);
      if (rows.empty()) {
        std::vector<double> point = sol.primal;
        for (const int v : binaries_) point[static_cast<std::size_t>(v)] = std::round(point[static_cast<std::size_t>(v)]);
        offer(point, model_.objective_value(point));
        return;
      }
      for (auto& row : rows) {
        if (lazy_names_.contains(row.name))
          throw Error(ErrorCode::kInternal, "lazy generator returned existing row '" + row.name + "'");
        if (!(row.violation(sol.primal) > 0.0))
          throw Error(ErrorCode::kInternal, "lazy generator returned satisfied row '" + row.name + "'");
        lazy_names_.insert(row.name);
        ++result_.stats.cuts[row.kind];
        lp_.add_row(row);
        lazy_rows_.push_back(normalize_row(std::move(row), model_.num_variables()));
      }
    }
  }

  void split(const BnbNode& node, const LpSolution& sol, int var) {
    const Basis basis = lp_.basis();
    for (const std::uint8_t b : {std::uint8_t{0}, std::uint8_t{1}}) {
      Fixings fix = node.fixings;
      fix.emplace_back(var, b);
      if (!propagate(fix)) continue;
      push(BnbNode{next_id_++, node.depth + 1, sol.objective, std::move(fix), basis});
    }
  }

  const MilpModel& model_;
  const BnbConfig& config_;
  LpSolver lp_;
  std::chrono::steady_clock::time_point start_;

  std::vector<std::pair<int, int>> ladder_of_;
  std::vector<int> one_hot_of_;
  std::vector<int> binaries_;

  std::map<Key, BnbNode> open_;
  std::multiset<double> bounds_;
  long next_id_ = 0;
  Fixings applied_;

  std::unordered_set<std::string> lazy_names_;
  std::vector<LinearRow> lazy_rows_;

  bool has_incumbent_ = false;
  double incumbent_obj_ = -std::numeric_limits<double>::infinity();
  std::vector<double> incumbent_;
  SolveResult result_;
};

}  // namespace

SolveResult solve_milp(const MilpModel& model, const BnbConfig& config) {
  if (!(config.rel_gap > 0) || !(config.int_tol > 0) || !(config.abs_gap > 0) || config.time_limit < 0 ||
      config.node_limit < 0)
    throw Error(ErrorCode::kConfiguration, "tolerances must be > 0 and limits >= 0");
  BranchAndBound bnb(model, config);
  return bnb.run();
}

}  // namespace treeopt
