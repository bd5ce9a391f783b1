#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "treeopt/ensemble.hpp"

namespace treeopt {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

struct BruteForceResult {
  std::vector<double> x;
  std::vector<int> cells;
  double objective = 0.0;
  std::uint64_t visited = 0;
};

/// Number of cells prod (K_i + 1) x prod K_i, saturated at UINT64_MAX.
std::uint64_t cell_space_size(const VariableSchema& schema);

/// Exact maximum by enumerating one representative per cell in mixed-radix
/// order (variable 0 most significant); ties keep the first cell. Throws
/// Error(kEnumerationCap) when the cell count exceeds `cap`.
BruteForceResult brute_force_opt(const Ensemble& ensemble, std::uint64_t cap = kDefaultEnumerationCap);

/// Simple undirected graph on vertices 0..n-1.
struct Graph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges;
};

Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);
Graph star_graph(int leaves);
Graph petersen_graph();
/// Subgraph induced by the vertices {0..n-1}.
Graph induced_subgraph(const Graph& g, int n);

/// "u v" per line, 1-indexed; blank lines and lines starting with '#'
/// ignored. The vertex count is the largest index seen unless
/// `num_vertices` is larger. Throws Error(kParse) with the line number.
Graph read_edge_list(std::istream& in, int num_vertices = 0);

/// |V| trees "X_i <= 0.5" with leaves 0 / 1 and |E| trees on X_u then X_v
/// with leaves |V|+1 (both <= 0.5), 0, 0; all weights -1. The maximum is
/// minus the minimum vertex cover size. Throws Error(kConfiguration) on
/// self-loops, repeated edges or bad vertex ids.
Ensemble vertex_cover_instance(const Graph& graph);

/// Exhaustive minimum vertex cover size (|V| <= 24).
int min_vertex_cover(const Graph& graph);

struct InstanceSpec {
  int num_variables = 4;
  double categorical_fraction = 0.3;
  int max_split_points = 4;  // numeric K_i drawn from 1..max
  int max_levels = 4;        // categorical K_i drawn from 2..max
  int num_trees = 5;
  int max_depth = 3;          // deepest split depth
  double split_probability = 0.8;  // chance a node below the root splits
  double leaf_min = 0.0;
  double leaf_max = 10.0;
  double weight_min = 0.5;
  double weight_max = 1.5;
  std::uint64_t seed = 0;
};

/// Reproducible random ensemble. Thresholds are drawn from a per-variable
/// pool of split points, categorical splits route a random proper nonempty
/// level subset left. The schema holds only thresholds actually used.
Ensemble random_instance(const InstanceSpec& spec);

}  // namespace treeopt
