// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "treeopt/bench.hpp"
#include "treeopt/benders.hpp"
#include "treeopt/encoding.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/io.hpp"
#include "treeopt/local_search.hpp"
#include "treeopt/oracle.hpp"
#include "treeopt/solve.hpp"
#include "treeopt/splitgen.hpp"

using namespace treeopt;
namespace tt = treeopt::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void fail(const std::string& what) {
    pass = false;
    if (problems.size() < 5) problems.push_back(what);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::vector<Ensemble>& random_suite() {
  static const std::vector<Ensemble> suite = [] {
    std::vector<Ensemble> out;
    for (std::uint64_t seed = 0; seed < 200; ++seed) out.push_back(random_instance(tt::small_spec(seed)));
    return out;
  }();
  return suite;
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto start = Clock::now();
  const auto& suite = random_suite();
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const Ensemble& e = suite[k];
    const double exact = brute_force_opt(e).objective;
    const double independent = tt::exhaustive_max(e).best;
    if (std::abs(exact - independent) > 1e-9)
      o.fail("instance " + std::to_string(k) + " brute force: " + str(exact) + " vs " + str(independent));
    const std::pair<const char*, SolveResult> runs[] = {
        {"direct", solve_direct(e)},
        {"benders", solve_benders(e)},
        {"splitgen-lazy", solve_splitgen_lazy(e)},
        {"splitgen-iter", solve_splitgen_iterative(e)},
    };
    for (const auto& [name, r] : runs) {
      if (r.status != SolveStatus::kOptimal || std::abs(r.objective - exact) > 1e-6)
        o.fail("instance " + std::to_string(k) + " " + name + ": " + str(r.objective) + " vs " + str(exact));
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed > 300.0) o.fail("runtime " + str(elapsed) + " s above 300 s");
  o.detail = std::to_string(suite.size()) + " instances x 4 methods in " + str(elapsed) + " s";
  return o;
}

Outcome relaxation_ordering() {
  Outcome o;
  int eligible = 0;
  int strict = 0;
  for (std::size_t k = 0; k < random_suite().size(); ++k) {
    const Ensemble& e = random_suite()[k];
    const double z_lo = lp_relaxation_value(build_full(e));
    const double z_std = lp_relaxation_value(build_standard_linearization(e));
    if (z_lo > z_std + 1e-7) o.fail("instance " + std::to_string(k) + ": " + str(z_lo) + " > " + str(z_std));
    if (e.size() >= 5) {
      ++eligible;
      strict += z_std > z_lo + 1e-7 ? 1 : 0;
    }
  }
  const double share = eligible == 0 ? 0.0 : static_cast<double>(strict) / eligible;
  if (share < 0.9) o.fail("strictly weaker on " + str(100 * share) + "% of T >= 5 instances");
  o.detail = "strictly weaker standard relaxation on " + std::to_string(strict) + "/" + std::to_string(eligible) +
             " instances with T >= 5";
  return o;
}

Outcome truncation_sandwich() {
  Outcome o;
  int instances = 0;
  int solves = 0;
  for (std::uint64_t seed = 1000; instances < 60; ++seed) {
    InstanceSpec spec = tt::small_spec(seed);
    spec.max_depth = 2 + static_cast<int>(seed % 3);
    const Ensemble e = random_instance(spec);
    if (e.max_depth() < 2) continue;
    ++instances;
    const double z_star = tt::exhaustive_max(e).best;
    double prev_ub = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= e.max_depth(); ++d) {
      const SolveResult r = solve_truncated(e, d);
      ++solves;
      const double ub = r.objective;
      const double actual = tt::evaluate(e, r.x);
      // Independent Delta: leaf value ranges under each depth-d split.
      double delta = 0.0;
      for (std::size_t t = 0; t < e.size(); ++t) {
        const Tree& tree = e.tree(t);
        double tree_delta = 0.0;
        for (const NodeId s : tree.splits()) {
          if (tree.node(s).depth != d) continue;
          for (const NodeId child : {tree.node(s).left, tree.node(s).right}) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            std::vector<NodeId> stack{child};
            while (!stack.empty()) {
              const Node& n = tree.node(stack.back());
              stack.pop_back();
              if (n.is_leaf()) {
                lo = std::min(lo, n.value);
                hi = std::max(hi, n.value);
              } else {
                stack.push_back(n.left);
                stack.push_back(n.right);
              }
            }
            tree_delta = std::max(tree_delta, hi - lo);
          }
        }
        delta += e.weight(t) * tree_delta;
      }
      const std::string at = "seed " + std::to_string(seed) + " d " + std::to_string(d) + ": ";
      if (r.status != SolveStatus::kOptimal) o.fail(at + "not optimal");
      if (ub - delta > actual + 1e-6) o.fail(at + "LB " + str(ub - delta) + " > actual " + str(actual));
      if (actual > z_star + 1e-6) o.fail(at + "actual " + str(actual) + " > Z* " + str(z_star));
      if (z_star > ub + 1e-6) o.fail(at + "Z* " + str(z_star) + " > UB " + str(ub));
      if (ub > prev_ub + 1e-6) o.fail(at + "UB increased");
      if (d == e.max_depth() && (std::abs(ub - actual) > 1e-6 || std::abs(actual - z_star) > 1e-6))
        o.fail(at + "UB " + str(ub) + " / actual " + str(actual) + " differ from Z* at full depth");
      prev_ub = ub;
    }
  }
  o.detail = std::to_string(instances) + " instances, " + std::to_string(solves) + " truncated solves";
  return o;
}

Outcome subproblem_duality() {
  Outcome o;
  std::mt19937_64 rng(4242);
  int pairs = 0;
  for (std::uint64_t seed = 0; pairs < 1000; ++seed) {
    InstanceSpec spec = tt::small_spec(seed + 5000);
    spec.num_trees = 1;
    const Ensemble e = random_instance(spec);
    const Tree& tree = e.tree(0);
    const VariableSchema& schema = e.schema();
    for (int rep = 0; rep < 5 && pairs < 1000; ++rep, ++pairs) {
      const std::vector<double> x = tt::random_input(schema, rng);
      const BinaryEncoding bits = encode(schema, x);
      std::vector<double> q(tree.nodes().size(), 0.0);
      for (const NodeId s : tree.splits()) q[static_cast<std::size_t>(s)] = query_sum<std::uint8_t>(tree.node(s), schema, bits.bits);

      // Subproblem over y for fixed x, solved as an LP.
      MilpModel sub;
      std::vector<int> y;
      for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        y.push_back(sub.add_variable("y" + std::to_string(l), VarType::kContinuous, 0.0, 1.0,
                                     tree.leaf_value(static_cast<int>(l))));
      LinearRow convex{{}, RowSense::kEqual, 1.0};
      for (const int v : y) convex.terms.push_back({v, 1.0});
      sub.add_row(convex);
      const LeafSets& sets = tree.leaf_sets();
      for (const NodeId s : tree.splits()) {
        LinearRow left{{}, RowSense::kLessEqual, q[static_cast<std::size_t>(s)]};
        for (const int l : sets.left[static_cast<std::size_t>(s)]) left.terms.push_back({y[static_cast<std::size_t>(l)], 1.0});
        LinearRow right{{}, RowSense::kLessEqual, 1.0 - q[static_cast<std::size_t>(s)]};
        for (const int l : sets.right[static_cast<std::size_t>(s)]) right.terms.push_back({y[static_cast<std::size_t>(l)], 1.0});
        sub.add_row(left);
        sub.add_row(right);
      }
      const LpSolution lp = solve_lp(sub);
      const NodeId leaf_node = tt::descend(tree, schema, x);
      const int leaf = tree.leaf_ordinal(leaf_node);
      const std::string at = "pair " + std::to_string(pairs) + ": ";
      if (lp.status != LpStatus::kOptimal) {
        o.fail(at + "subproblem not optimal");
        continue;
      }
      for (std::size_t l = 0; l < y.size(); ++l)
        if (std::abs(lp.primal[static_cast<std::size_t>(y[l])] - (static_cast<int>(l) == leaf ? 1.0 : 0.0)) > 1e-9)
          o.fail(at + "LP solution is not the indicator of the reached leaf");

      // Closed-form dual: feasibility checked leaf by leaf.
      const BendersCut cut = dual_from_leaf(tree, leaf);
      std::vector<double> alpha(tree.nodes().size(), 0.0), beta(tree.nodes().size(), 0.0);
      for (const auto& [s, a] : cut.alpha) alpha[static_cast<std::size_t>(s)] = a;
      for (const auto& [s, b] : cut.beta) beta[static_cast<std::size_t>(s)] = b;
      for (std::size_t s = 0; s < alpha.size(); ++s)
        if (alpha[s] < 0.0 || beta[s] < 0.0) o.fail(at + "negative dual");
      for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        double lhs = cut.gamma;
        for (const NodeId s : tree.splits()) {
          const auto& lefts = sets.left[static_cast<std::size_t>(s)];
          const auto& rights = sets.right[static_cast<std::size_t>(s)];
          if (std::find(lefts.begin(), lefts.end(), static_cast<int>(l)) != lefts.end()) lhs += alpha[static_cast<std::size_t>(s)];
          if (std::find(rights.begin(), rights.end(), static_cast<int>(l)) != rights.end()) lhs += beta[static_cast<std::size_t>(s)];
        }
        if (lhs < tree.leaf_value(static_cast<int>(l)) - 1e-9) o.fail(at + "dual infeasible at leaf " + std::to_string(l));
      }
      double dual_obj = cut.gamma;
      for (const NodeId s : tree.splits())
        dual_obj += alpha[static_cast<std::size_t>(s)] * q[static_cast<std::size_t>(s)] +
                    beta[static_cast<std::size_t>(s)] * (1.0 - q[static_cast<std::size_t>(s)]);
      if (std::abs(dual_obj - tree.leaf_value(leaf)) > 1e-9)
        o.fail(at + "dual objective " + str(dual_obj) + " vs " + str(tree.leaf_value(leaf)));
    }
  }
  o.detail = std::to_string(pairs) + " (tree, x) pairs";
  return o;
}

Outcome separation_exactness() {
  Outcome o;
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int candidates = 0;
  int violated = 0;
  for (std::uint64_t seed = 0; candidates < 1000; ++seed) {
    InstanceSpec spec = tt::small_spec(seed + 9000);
    spec.num_trees = 1;
    spec.max_depth = 2 + static_cast<int>(seed % 3);
    const Ensemble e = random_instance(spec);
    const Tree& tree = e.tree(0);
    const VariableSchema& schema = e.schema();
    for (int rep = 0; rep < 4 && candidates < 1000; ++rep, ++candidates) {
      const BinaryEncoding bits = encode(schema, tt::random_input(schema, rng));
      std::vector<double> x(bits.bits.begin(), bits.bits.end());
      // y on the simplex: the consistent indicator, a random mixture, or a
      // single random leaf.
      std::vector<double> y(tree.num_leaves(), 0.0);
      const int mode = static_cast<int>(candidates % 3);
      if (mode == 0) {
        y[static_cast<std::size_t>(get_leaf(tree, schema, bits))] = 1.0;
      } else if (mode == 1) {
        double sum = 0.0;
        for (double& v : y) sum += (v = unit(rng) < 0.5 ? unit(rng) : 0.0);
        if (sum == 0.0) y[0] = sum = 1.0;
        for (double& v : y) v /= sum;
      } else {
        y[std::uniform_int_distribution<std::size_t>(0, y.size() - 1)(rng)] = 1.0;
      }
      bool any = false;
      const LeafSets& sets = tree.leaf_sets();
      for (const NodeId s : tree.splits()) {
        const double qs = query_sum<double>(tree.node(s), schema, x);
        double l = 0.0, r = 0.0;
        for (const int leaf : sets.left[static_cast<std::size_t>(s)]) l += y[static_cast<std::size_t>(leaf)];
        for (const int leaf : sets.right[static_cast<std::size_t>(s)]) r += y[static_cast<std::size_t>(leaf)];
        any = any || l > qs + 1e-6 || r > 1.0 - qs + 1e-6;
      }
      const bool found = find_violation(tree, schema, x, y, 1e-6).has_value();
      violated += any ? 1 : 0;
      if (found != any)
        o.fail("candidate " + std::to_string(candidates) + ": traversal " + (found ? "found" : "missed") +
               " a violation, exhaustive check " + (any ? "found one" : "found none"));
    }
  }
  o.detail = std::to_string(candidates) + " candidates, " + std::to_string(violated) + " infeasible";
  return o;
}

bool connected(const Graph& g) {
  if (g.num_vertices <= 1) return true;
  std::vector<int> seen(static_cast<std::size_t>(g.num_vertices), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& [a, b] : g.edges) {
      const int v = a == u ? b : (b == u ? a : -1);
      if (v >= 0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

int subset_min_cover(const Graph& g) {
  int best = g.num_vertices;
  for (unsigned mask = 0; mask < (1u << g.num_vertices); ++mask) {
    bool covers = true;
    for (const auto& [a, b] : g.edges) covers = covers && (((mask >> a) & 1u) || ((mask >> b) & 1u));
    if (covers) best = std::min(best, __builtin_popcount(mask));
  }
  return best;
}

Outcome vertex_cover_reduction() {
  Outcome o;
  std::vector<std::pair<std::string, Graph>> catalog;
  for (int n = 2; n <= 8; ++n) catalog.emplace_back("path " + std::to_string(n), path_graph(n));
  for (int n = 3; n <= 8; ++n) catalog.emplace_back("cycle " + std::to_string(n), cycle_graph(n));
  for (int n = 2; n <= 8; ++n) catalog.emplace_back("complete " + std::to_string(n), complete_graph(n));
  for (int n = 1; n <= 7; ++n) catalog.emplace_back("star " + std::to_string(n), star_graph(n));
  for (int n = 2; n <= 8; ++n) {
    Graph g = induced_subgraph(petersen_graph(), n);
    if (connected(g)) catalog.emplace_back("petersen " + std::to_string(n), std::move(g));
  }
  for (const auto& [name, g] : catalog) {
    const Ensemble e = vertex_cover_instance(g);
    const SolveResult r = solve_direct(e);
    const int cover = subset_min_cover(g);
    if (r.status != SolveStatus::kOptimal || r.objective != -static_cast<double>(cover))
      o.fail(name + ": objective " + str(r.objective) + ", minimum cover " + std::to_string(cover));
  }
  o.detail = std::to_string(catalog.size()) + " connected graphs";
  return o;
}

Outcome local_search_gap() {
  Outcome o;
  int checked = 0;
  auto check = [&](const Ensemble& e, const std::string& id) {
    const double exact = tt::exhaustive_max(e).best;
    const LocalSearchResult ls = multi_start(e, 10, 99);
    const double g = g_ls_pct(exact, ls.objective);
    if (ls.objective > exact + 1e-9) o.fail(id + ": local search " + str(ls.objective) + " above " + str(exact));
    if (g < 0.0) o.fail(id + ": G_LS = " + str(g));
    ++checked;
    return g;
  };
  for (std::size_t k = 0; k < random_suite().size(); ++k) check(random_suite()[k], "instance " + std::to_string(k));

  int large = 0;
  int positive = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    InstanceSpec spec;
    spec.seed = 20000 + seed;
    spec.num_trees = 10 + static_cast<int>(seed % 11);
    spec.num_variables = 8;
    spec.max_depth = 4;
    spec.max_split_points = 4;
    spec.max_levels = 4;
    spec.categorical_fraction = 0.35;
    const Ensemble e = random_instance(spec);
    ++large;
    positive += check(e, "large seed " + std::to_string(seed)) > 0.0 ? 1 : 0;
  }
  if (positive * 10 < large) o.fail("G_LS > 0 on only " + std::to_string(positive) + "/" + std::to_string(large));
  o.detail = std::to_string(checked) + " instances; G_LS > 0 on " + std::to_string(positive) + "/" +
             std::to_string(large) + " with T >= 10";
  return o;
}

Outcome proximity_frontier() {
  Outcome o;
  InstanceSpec spec;
  spec.seed = 31337;
  spec.num_trees = 20;
  spec.num_variables = 10;
  spec.max_depth = 4;
  spec.max_split_points = 6;
  const Ensemble e = random_instance(spec);
  // Training points cluster in the lower half of every variable's cells.
  std::mt19937_64 rng(2024);
  const auto values = tt::candidate_values(e.schema());
  std::vector<std::vector<double>> points;
  for (int m = 0; m < 50; ++m) {
    std::vector<double> p;
    for (const auto& v : values) p.push_back(v[std::uniform_int_distribution<std::size_t>(0, (v.size() + 1) / 2 - 1)(rng)]);
    points.push_back(std::move(p));
  }
  const std::vector<double> caps{0.01, 0.1, 0.2, 0.5, 1.0};
  const FrontierResult frontier = run_proximity_frontier(e, points, caps);
  double prev = -std::numeric_limits<double>::infinity();
  int feasible = 0;
  for (const FrontierRecord& r : frontier.records) {
    const std::string at = "c = " + str(r.cap) + ": ";
    if (!r.feasible) {
      if (prev > -std::numeric_limits<double>::infinity()) o.fail(at + "infeasible after a feasible cap");
      continue;
    }
    ++feasible;
    double realized = 0.0;
    for (const auto& p : points) realized = std::max(realized, tt::shared_leaf_fraction(e, r.x, p));
    if (realized > r.cap + 1e-12) o.fail(at + "realized proximity " + str(realized));
    if (std::abs(tt::evaluate(e, r.x) - r.objective) > 1e-9) o.fail(at + "objective does not match x");
    if (r.objective < prev - 1e-9) o.fail(at + "objective decreased");
    prev = r.objective;
  }
  const double unconstrained = solve_benders(e).objective;
  if (std::abs(frontier.records.back().objective - unconstrained) > 1e-6)
    o.fail("c = 1 differs from the unconstrained optimum " + str(unconstrained));
  for (const auto& v : frontier.violations) o.fail(v);
  o.detail = std::to_string(feasible) + "/" + std::to_string(caps.size()) + " caps feasible, 50 training points";
  return o;
}

std::string strip_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() > 5) cells.erase(cells.begin() + 5);
    for (const auto& c : cells) out += c + ',';
    out += '\n';
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  auto run = [](int workers) {
    std::vector<BenchInstance> instances;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      instances.push_back({"i" + std::to_string(seed), random_instance(tt::small_spec(300 + seed)), seed});
    BenchConfig config;
    config.seed = 5;
    config.workers = workers;
    return run_method_sweep(instances, all_methods(), config);
  };
  const SweepResult a = run(1);
  const SweepResult b = run(1);
  const SweepResult c = run(2);
  for (std::size_t k = 0; k < a.records.size(); ++k)
    if (std::memcmp(&a.records[k].z_lb, &b.records[k].z_lb, sizeof(double)) != 0)
      o.fail("incumbent objective differs on record " + std::to_string(k));
  if (strip_time_column(bench_csv(a.records)) != strip_time_column(bench_csv(b.records)))
    o.fail("CSV bytes differ between identical runs");
  if (strip_time_column(bench_csv(a.records)) != strip_time_column(bench_csv(c.records)))
    o.fail("CSV bytes differ between 1 and 2 workers");
  InstanceSpec spec = tt::small_spec(77);
  if (ensemble_to_json(random_instance(spec)) != ensemble_to_json(random_instance(spec)))
    o.fail("generator output differs for the same seed");
  for (const auto& v : a.violations) o.fail(v);
  o.detail = std::to_string(a.records.size()) + " records compared across 3 runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"relaxation ordering", relaxation_ordering},
      {"truncation sandwich", truncation_sandwich},
      {"subproblem duality", subproblem_duality},
      {"separation exactness", separation_exactness},
      {"vertex cover reduction", vertex_cover_reduction},
      {"local search gap", local_search_gap},
      {"proximity frontier", proximity_frontier},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                out.detail.c_str(), seconds_since(start));
    for (const auto& p : out.problems) std::printf("    %s\n", p.c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
