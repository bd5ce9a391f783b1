#include "treeopt/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "treeopt/encoding.hpp"
#include "treeopt/error.hpp"

namespace treeopt {

std::uint64_t cell_space_size(const VariableSchema& schema) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto c = static_cast<std::uint64_t>(cell_count(schema, i));
    if (c != 0 && total > std::numeric_limits<std::uint64_t>::max() / c) return std::numeric_limits<std::uint64_t>::max();
    total *= c;
  }
  return total;
}

BruteForceResult brute_force_opt(const Ensemble& ensemble, std::uint64_t cap) {
  const VariableSchema& schema = ensemble.schema();
  const std::uint64_t size = cell_space_size(schema);
  if (size > cap)
    throw Error(ErrorCode::kEnumerationCap,
                "cell space of " + std::to_string(size) + " exceeds the cap of " + std::to_string(cap));
  const std::size_t n = schema.size();
  std::vector<int> radix(n);
  for (std::size_t i = 0; i < n; ++i) radix[i] = cell_count(schema, i);

  BruteForceResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::vector<int> cells(n, 0);
  while (true) {
    double z = 0.0;
    for (std::size_t t = 0; t < ensemble.size(); ++t) {
      const Tree& tree = ensemble.tree(t);
      z += ensemble.weight(t) * tree.leaf_value(find_leaf_by_cells(tree, schema, cells));
    }
    ++best.visited;
    if (z > best.objective) {
      best.objective = z;
      best.cells = cells;
    }
    // Odometer step, last variable fastest.
    bool carry = true;
    for (std::size_t i = n; carry && i > 0;) {
      --i;
      if (++cells[i] < radix[i]) carry = false;
      else cells[i] = 0;
    }
    if (carry) break;
  }
  best.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) best.x[i] = cell_value(schema, i, best.cells[i]);
  return best;
}

Graph path_graph(int n) {
  Graph g{n, {}};
  for (int v = 0; v + 1 < n; ++v) g.edges.emplace_back(v, v + 1);
  return g;
}

Graph cycle_graph(int n) {
  Graph g = path_graph(n);
  if (n >= 3) g.edges.emplace_back(n - 1, 0);
  return g;
}

Graph complete_graph(int n) {
  Graph g{n, {}};
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.edges.emplace_back(u, v);
  return g;
}

Graph star_graph(int leaves) {
  Graph g{leaves + 1, {}};
  for (int v = 1; v <= leaves; ++v) g.edges.emplace_back(0, v);
  return g;
}

Graph petersen_graph() {
  Graph g{10, {}};
  for (int v = 0; v < 5; ++v) {
    g.edges.emplace_back(v, (v + 1) % 5);          // outer cycle
    g.edges.emplace_back(v, v + 5);                // spokes
    g.edges.emplace_back(v + 5, (v + 2) % 5 + 5);  // inner pentagram
  }
  return g;
}

Graph induced_subgraph(const Graph& g, int n) {
  Graph out{n, {}};
  for (const auto& [u, v] : g.edges)
    if (u < n && v < n) out.edges.emplace_back(u, v);
  return out;
}

Graph read_edge_list(std::istream& in, int num_vertices) {
  Graph g{num_vertices, {}};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long u = 0;
    long long v = 0;
    std::string rest;
    if (!(ls >> u >> v) || (ls >> rest))
      throw Error(ErrorCode::kParse, "edge list line " + std::to_string(line_no) + ": expected 'u v'");
    if (u < 1 || v < 1 || u > 1'000'000 || v > 1'000'000)
      throw Error(ErrorCode::kParse, "edge list line " + std::to_string(line_no) + ": vertices are 1-indexed");
    g.edges.emplace_back(static_cast<int>(u - 1), static_cast<int>(v - 1));
    g.num_vertices = std::max(g.num_vertices, static_cast<int>(std::max(u, v)));
  }
  return g;
}

Ensemble vertex_cover_instance(const Graph& graph) {
  const int n = graph.num_vertices;
  if (n < 1) throw Error(ErrorCode::kConfiguration, "vertex cover instance needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : graph.edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw Error(ErrorCode::kConfiguration, "edge references a vertex outside 1.." + std::to_string(n));
    if (u == v) throw Error(ErrorCode::kConfiguration, "self-loop at vertex " + std::to_string(u + 1));
    if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
      throw Error(ErrorCode::kConfiguration, "repeated edge " + std::to_string(u + 1) + " " + std::to_string(v + 1));
  }

  std::vector<VariableSpec> vars;
  for (int v = 0; v < n; ++v) vars.push_back({"v" + std::to_string(v + 1), VariableKind::kNumeric, {0.5}, 0});
  VariableSchema schema(std::move(vars));

  auto leaf = [](double value) {
    Node node;
    node.value = value;
    return node;
  };
  auto split = [](int var, NodeId left, NodeId right) {
    Node node;
    node.var = var;
    node.split_index = 0;
    node.left = left;
    node.right = right;
    return node;
  };

  std::vector<Tree> trees;
  for (int v = 0; v < n; ++v) trees.emplace_back(std::vector<Node>{split(v, 1, 2), leaf(0.0), leaf(1.0)}, 0);
  for (const auto& [u, v] : graph.edges)
    trees.emplace_back(std::vector<Node>{split(u, 1, 4), split(v, 2, 3), leaf(n + 1.0), leaf(0.0), leaf(0.0)}, 0);
  std::vector<double> weights(trees.size(), -1.0);
  return Ensemble(std::move(schema), std::move(trees), std::move(weights));
}

int min_vertex_cover(const Graph& graph) {
  if (graph.num_vertices > 24) throw Error(ErrorCode::kEnumerationCap, "exhaustive cover search limited to 24 vertices");
  int best = graph.num_vertices;
  const std::uint32_t limit = 1u << graph.num_vertices;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    const int size = std::popcount(mask);
    if (size >= best) continue;
    bool covers = true;
    for (const auto& [u, v] : graph.edges) {
      if (!((mask >> u) & 1u) && !((mask >> v) & 1u)) {
        covers = false;
        break;
      }
    }
    if (covers) best = size;
  }
  return best;
}

Ensemble random_instance(const InstanceSpec& spec) {
  if (spec.num_variables < 1 || spec.num_trees < 1 || spec.max_depth < 0 || spec.max_split_points < 1 ||
      spec.max_levels < 2 || !(spec.leaf_min <= spec.leaf_max) || !(spec.weight_min <= spec.weight_max))
    throw Error(ErrorCode::kConfiguration, "invalid instance spec");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<RawVariable> variables;
  std::vector<std::vector<double>> pools(static_cast<std::size_t>(spec.num_variables));
  for (int i = 0; i < spec.num_variables; ++i) {
    RawVariable var{"X" + std::to_string(i + 1), VariableKind::kNumeric, 0};
    if (unit(rng) < spec.categorical_fraction) {
      var.kind = VariableKind::kCategorical;
      var.levels = std::uniform_int_distribution<int>(2, spec.max_levels)(rng);
    } else {
      const int k = std::uniform_int_distribution<int>(1, spec.max_split_points)(rng);
      std::set<double> points;
      std::uniform_int_distribution<int> grid(0, 1000);
      while (static_cast<int>(points.size()) < k) points.insert(grid(rng) / 100.0);
      pools[static_cast<std::size_t>(i)].assign(points.begin(), points.end());
    }
    variables.push_back(std::move(var));
  }

  std::uniform_int_distribution<int> pick_var(0, spec.num_variables - 1);
  std::uniform_real_distribution<double> leaf_value(spec.leaf_min, spec.leaf_max);
  std::uniform_real_distribution<double> weight(spec.weight_min, spec.weight_max);

  std::vector<RawTree> trees;
  for (int t = 0; t < spec.num_trees; ++t) {
    RawTree tree;
    // Builds the subtree rooted at a node of the given depth; returns its id.
    auto grow = [&](auto&& self, int depth) -> NodeId {
      const auto id = static_cast<NodeId>(tree.nodes.size());
      tree.nodes.emplace_back();
      const bool split = depth <= spec.max_depth && (depth == 1 || unit(rng) < spec.split_probability);
      if (!split) {
        tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(rng);
        return id;
      }
      RawNode node;
      node.var = pick_var(rng);
      const RawVariable& var = variables[static_cast<std::size_t>(node.var)];
      if (var.kind == VariableKind::kNumeric) {
        const auto& pool = pools[static_cast<std::size_t>(node.var)];
        node.threshold = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      } else {
        const std::uint32_t full = (1u << var.levels) - 1u;
        const std::uint32_t mask = std::uniform_int_distribution<std::uint32_t>(1u, full - 1u)(rng);
        for (int level = 0; level < var.levels; ++level)
          if ((mask >> level) & 1u) node.levels.push_back(level);
      }
      node.left = self(self, depth + 1);
      node.right = self(self, depth + 1);
      tree.nodes[static_cast<std::size_t>(id)] = std::move(node);
      return id;
    };
    tree.root = grow(grow, 1);
    tree.weight = weight(rng);
    trees.push_back(std::move(tree));
  }
  return build_ensemble(variables, trees);
}

}  // namespace treeopt
