#include "treeopt/local_search.hpp"

#include <chrono>
#include <random>

#include "treeopt/encoding.hpp"
#include "treeopt/error.hpp"

namespace treeopt {

namespace {

double evaluate(const Ensemble& ensemble, std::span<const int> cells) {
  double sum = 0.0;
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    sum += ensemble.weight(t) * tree.leaf_value(find_leaf_by_cells(tree, ensemble.schema(), cells));
  }
  return sum;
}

std::vector<double> to_raw(const VariableSchema& schema, std::span<const int> cells) {
  std::vector<double> x(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) x[i] = cell_value(schema, i, cells[i]);
  return x;
}

}  // namespace

std::vector<std::vector<double>> search_domain(const Ensemble& ensemble) {
  const VariableSchema& schema = ensemble.schema();
  std::vector<std::vector<double>> out(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i)
    for (int c = 0; c < cell_count(schema, i); ++c) out[i].push_back(cell_value(schema, i, c));
  return out;
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

LocalSearchResult local_search(const Ensemble& ensemble, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const VariableSchema& schema = ensemble.schema();
  const std::size_t n = schema.size();
  std::mt19937_64 rng(seed);
  std::vector<int> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, cell_count(schema, i) - 1);
    cells[i] = pick(rng);
  }

  LocalSearchResult result;
  double z = evaluate(ensemble, cells);
  ++result.evaluations;
  std::vector<char> untested(n, 1);
  std::size_t remaining = n;
  while (remaining > 0) {
    std::size_t i = 0;
    while (!untested[i]) ++i;

    const int current = cells[i];
    int best_cell = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < cell_count(schema, i); ++c) {
      cells[i] = c;
      const double v = evaluate(ensemble, cells);
      ++result.evaluations;
      if (v > best) {
        best = v;
        best_cell = c;
      }
    }
    if (best > z) {
      z = best;
      cells[i] = best_cell;
      ++result.improvements;
      std::fill(untested.begin(), untested.end(), 1);
      untested[i] = 0;
      remaining = n - 1;
    } else {
      cells[i] = current;
      untested[i] = 0;
      --remaining;
    }
  }
  result.x = to_raw(schema, cells);
  result.objective = z;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

LocalSearchResult multi_start(const Ensemble& ensemble, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw Error(ErrorCode::kConfiguration, "restarts must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  LocalSearchResult best;
  long evaluations = 0;
  for (int r = 0; r < restarts; ++r) {
    LocalSearchResult run = local_search(ensemble, restart_seed(seed, r));
    evaluations += run.evaluations;
    if (r == 0 || run.objective > best.objective) {
      best = std::move(run);
      best.best_restart = r;
    }
  }
  best.evaluations = evaluations;
  best.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return best;
}

bool is_one_swap_optimal(const Ensemble& ensemble, std::span<const double> x, double tol) {
  const VariableSchema& schema = ensemble.schema();
  check_domain(schema, x);
  std::vector<int> cells(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) cells[i] = cell_of(schema, i, x[i]);
  const double z = evaluate(ensemble, cells);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const int keep = cells[i];
    for (int c = 0; c < cell_count(schema, i); ++c) {
      cells[i] = c;
      if (evaluate(ensemble, cells) > z + tol) return false;
    }
    cells[i] = keep;
  }
  return true;
}

}  // namespace treeopt
