#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treeopt/ensemble.hpp"

namespace treeopt {

struct LocalSearchResult {
  std::vector<double> x;
  double objective = 0.0;
  long improvements = 0;
  long evaluations = 0;
  int best_restart = 0;
  double wall_ms = 0.0;
};

/// Candidate values per variable: all levels for categorical variables;
/// the split points plus a_K + 1 for numeric ones ({0} when K = 0).
std::vector<std::vector<double>> search_domain(const Ensemble& ensemble);

/// Coordinate-wise local search from a uniformly random point of the search
/// domain. Untested variables are scanned in ascending order; the best value
/// of a coordinate is the first maximizer in domain order.
LocalSearchResult local_search(const Ensemble& ensemble, std::uint64_t seed);

/// Best of `restarts` local searches; run r uses restart_seed(seed, r).
/// Ties keep the earliest run. Throws Error(kConfiguration) for restarts < 1.
LocalSearchResult multi_start(const Ensemble& ensemble, int restarts, std::uint64_t seed);

std::uint64_t restart_seed(std::uint64_t seed, int restart);

/// True when no single-coordinate move within the search domain improves
/// the prediction of `x` by more than `tol`.
bool is_one_swap_optimal(const Ensemble& ensemble, std::span<const double> x, double tol = 1e-12);

}  // namespace treeopt
