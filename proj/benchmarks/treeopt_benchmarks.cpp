#include <benchmark/benchmark.h>

#include "treeopt/benders.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/local_search.hpp"
#include "treeopt/lp_solver.hpp"
#include "treeopt/oracle.hpp"
#include "treeopt/solve.hpp"
#include "treeopt/splitgen.hpp"

namespace {

using namespace treeopt;

Ensemble instance(int trees, int depth = 4, int vars = 8) {
  InstanceSpec spec;
  spec.num_trees = trees;
  spec.max_depth = depth;
  spec.num_variables = vars;
  spec.max_split_points = 6;
  spec.seed = 42;
  return random_instance(spec);
}

void BM_FullRelaxation(benchmark::State& state) {
  const MilpModel model = build_full(instance(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(model).objective);
  state.counters["rows"] = static_cast<double>(model.num_rows());
}
BENCHMARK(BM_FullRelaxation)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_StdLinRelaxation(benchmark::State& state) {
  const MilpModel model = build_standard_linearization(instance(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(model).objective);
  state.counters["rows"] = static_cast<double>(model.num_rows());
}
BENCHMARK(BM_StdLinRelaxation)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SolveDirect(benchmark::State& state) {
  const Ensemble e = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_direct(e).objective);
}
BENCHMARK(BM_SolveDirect)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SolveBenders(benchmark::State& state) {
  const Ensemble e = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_benders(e).objective);
}
BENCHMARK(BM_SolveBenders)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SolveSplitgenLazy(benchmark::State& state) {
  const Ensemble e = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_splitgen_lazy(e).objective);
}
BENCHMARK(BM_SolveSplitgenLazy)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SolveSplitgenIterative(benchmark::State& state) {
  const Ensemble e = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_splitgen_iterative(e).objective);
}
BENCHMARK(BM_SolveSplitgenIterative)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SolveTruncated(benchmark::State& state) {
  const Ensemble e = instance(30);
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_truncated(e, depth).objective);
}
BENCHMARK(BM_SolveTruncated)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const Ensemble e = instance(static_cast<int>(state.range(0)), 3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_opt(e).objective);
  state.counters["cells"] = static_cast<double>(cell_space_size(e.schema()));
}
BENCHMARK(BM_BruteForce)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_LocalSearch(benchmark::State& state) {
  const Ensemble e = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(multi_start(e, 10, 7).objective);
}
BENCHMARK(BM_LocalSearch)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const Ensemble e = instance(100);
  const auto domain = search_domain(e);
  std::vector<double> x;
  for (const auto& d : domain) x.push_back(d.front());
  for (auto _ : state) benchmark::DoNotOptimize(predict(e, x));
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
