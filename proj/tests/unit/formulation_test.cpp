#include <random>

#include <gtest/gtest.h>

#include "builders.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/milp_solver.hpp"
#include "treeopt/solve.hpp"

namespace treeopt {
namespace {

using namespace testing;

// Model point of raw input x: ladder/one-hot bits and the leaf indicators,
// built from the raw traversal.
std::vector<double> model_point(const MilpModel& model, const Ensemble& e, std::span<const double> x) {
  std::vector<double> v(model.num_variables(), 0.0);
  const VariableSchema& s = e.schema();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& bits = model.x_vars[i];
    for (std::size_t j = 0; j < bits.size(); ++j) {
      const bool on = s.is_numeric(i) ? x[i] <= s.split_points(i)[j] : static_cast<int>(x[i]) == static_cast<int>(j) + 1;
      v[static_cast<std::size_t>(bits[j])] = on ? 1.0 : 0.0;
    }
  }
  for (std::size_t t = 0; t < model.y_vars.size(); ++t) {
    const int leaf = e.tree(t).leaf_ordinal(descend(e.tree(t), s, x));
    v[static_cast<std::size_t>(model.y_vars[t][static_cast<std::size_t>(leaf)])] = 1.0;
  }
  return v;
}

std::size_t count_kind(const MilpModel& m, std::string_view kind) {
  std::size_t n = 0;
  for (const auto& row : m.rows()) n += row.kind == kind;
  return n;
}

// Root X1 <= 1 with a left child X1 <= 0.5 (leaves a, b) and right leaf c.
Ensemble two_level(double a, double b, double c, double weight = 1.0) {
  const std::vector<RawVariable> vars{numeric("X1")};
  const RawTree t{{split(0, 1.0, 1, 2), split(0, 0.5, 3, 4), leaf(c), leaf(a), leaf(b)}, 0, weight};
  return build_ensemble(vars, std::vector<RawTree>{t});
}

TEST(BuildFull, SingleSplitCounts) {
  const Ensemble e = single_split(1.0, 5.0);
  const MilpModel m = build_full(e);
  EXPECT_EQ(m.num_variables(), 3u);
  EXPECT_EQ(m.num_binaries(), 1u);
  EXPECT_EQ(count_kind(m, "convexity"), 1u);
  EXPECT_EQ(count_kind(m, "split-left"), 1u);
  EXPECT_EQ(count_kind(m, "split-right"), 1u);
  EXPECT_EQ(m.num_rows(), 3u);
}

TEST(BuildFull, CountsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Ensemble e = random_instance(small_spec(seed));
    const MilpModel m = build_full(e);
    const VariableSchema& s = e.schema();
    std::size_t ladder = 0, onehot = 0, splits = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.is_numeric(i)) ladder += s.cardinality(i) > 0 ? static_cast<std::size_t>(s.cardinality(i) - 1) : 0;
      else ++onehot;
    }
    for (const Tree& t : e.trees()) splits += t.splits().size();
    EXPECT_EQ(m.num_binaries(), s.num_bits());
    EXPECT_EQ(m.num_variables(), s.num_bits() + e.num_leaves());
    EXPECT_EQ(count_kind(m, "ladder"), ladder);
    EXPECT_EQ(count_kind(m, "one-hot"), onehot);
    EXPECT_EQ(count_kind(m, "convexity"), e.size());
    EXPECT_EQ(count_kind(m, "split-left"), splits);
    EXPECT_EQ(count_kind(m, "split-right"), splits);
  }
}

TEST(BuildFull, IntegerPointsAreFeasibleWithExactObjective) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Ensemble e = random_instance(small_spec(seed));
    const MilpModel full = build_full(e);
    const MilpModel stdlin = build_standard_linearization(e);
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = random_input(e.schema(), rng);
      const auto p = model_point(full, e, x);
      EXPECT_LE(full.max_violation(p), 1e-12);
      EXPECT_NEAR(full.objective_value(p), evaluate(e, x), 1e-9);
      const auto q = model_point(stdlin, e, x);
      EXPECT_LE(stdlin.max_violation(q), 1e-12);
      EXPECT_NEAR(stdlin.objective_value(q), evaluate(e, x), 1e-9);
    }
  }
}

TEST(BuildFull, WrongLeafIsInfeasible) {
  const Ensemble e = single_split(1.0, 5.0);
  const MilpModel m = build_full(e);
  const std::vector<double> x{1.0};
  auto p = model_point(m, e, x);
  std::swap(p[static_cast<std::size_t>(m.y_vars[0][0])], p[static_cast<std::size_t>(m.y_vars[0][1])]);
  EXPECT_GT(m.max_violation(p), 0.5);
}

TEST(BuildFull, SingleSplitOptimum) {
  const Ensemble e = single_split(1.0, 5.0);
  const SolveResult r = solve_milp(build_full(e));
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.objective, 5.0, 1e-9);
}

TEST(BuildFull, SingleLeafTrees) {
  const Ensemble e = constant_trees({2.0, -3.0}, {1.0, 2.0});
  const MilpModel m = build_full(e);
  const SolveResult r = solve_milp(m);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.objective, -4.0, 1e-9);
  EXPECT_NEAR(lp_relaxation_value(m), -4.0, 1e-9);
}

TEST(StandardLinearization, NoConvexityRowAndSameOptimum) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Ensemble e = random_instance(small_spec(seed));
    const MilpModel m = build_standard_linearization(e);
    EXPECT_EQ(count_kind(m, "convexity"), 0u);
    const SolveResult r = solve_milp(m);
    ASSERT_EQ(r.status, SolveStatus::kOptimal);
    EXPECT_NEAR(r.objective, exhaustive_max(e).best, 1e-6) << "seed " << seed;
  }
}

TEST(Relaxations, FullIsNoWeakerThanStandardLinearization) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Ensemble e = normalize_weights(random_instance(small_spec(seed)));
    const double full = lp_relaxation_value(build_full(e));
    const double stdlin = lp_relaxation_value(build_standard_linearization(e));
    EXPECT_LE(full, stdlin + 1e-7) << "seed " << seed;
    EXPECT_GE(full, exhaustive_max(e).best - 1e-7) << "seed " << seed;
  }
}

TEST(Truncated, DeepEnoughEqualsFull) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Ensemble e = random_instance(small_spec(seed));
    const MilpModel full = build_full(e);
    const MilpModel trunc = build_truncated(e, e.max_depth() + 1);
    ASSERT_EQ(trunc.num_rows(), full.num_rows());
    for (std::size_t r = 0; r < full.num_rows(); ++r) EXPECT_EQ(trunc.rows()[r].name, full.rows()[r].name);
  }
}

TEST(Truncated, KeepsOnlyShallowSplits) {
  const Ensemble e = two_level(1.0, 3.0, 5.0);
  const MilpModel m = build_truncated(e, 1);
  EXPECT_EQ(count_kind(m, "split-left"), 1u);
  EXPECT_EQ(count_kind(m, "split-right"), 1u);
  EXPECT_EQ(code_of([&] { build_truncated(e, 0); }), ErrorCode::kConfiguration);
}

TEST(Truncated, OverestimateWithinBound) {
  // Tree 1: X1 <= 1 ? (X1 <= 0.5 ? 0 : 10) : 0. Tree 2: X1 <= 0.5 ? 10 : 0.
  const std::vector<RawVariable> vars{numeric("X1")};
  const std::vector<RawTree> trees{
      {{split(0, 1.0, 1, 2), split(0, 0.5, 3, 4), leaf(0.0), leaf(0.0), leaf(10.0)}, 0, 1.0},
      {{split(0, 0.5, 1, 2), leaf(10.0), leaf(0.0)}, 0, 1.0}};
  const Ensemble e = build_ensemble(vars, trees);
  EXPECT_NEAR(exhaustive_max(e).best, 10.0, 1e-12);
  const SolveResult r = solve_truncated(e, 1);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.objective, 20.0, 1e-9);
  EXPECT_NEAR(r.true_objective, 10.0, 1e-9);
  EXPECT_NEAR(truncation_bound(e, 1).total, 10.0, 1e-12);
}

TEST(Truncated, SandwichOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Ensemble e = normalize_weights(random_instance(small_spec(seed)));
    const double z = exhaustive_max(e).best;
    double previous = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= e.max_depth(); ++d) {
      const SolveResult r = solve_truncated(e, d);
      ASSERT_EQ(r.status, SolveStatus::kOptimal);
      const double lb = r.objective - truncation_bound(e, d).total;
      EXPECT_LE(lb, r.true_objective + 1e-6);
      EXPECT_LE(r.true_objective, z + 1e-6);
      EXPECT_LE(z, r.objective + 1e-6);
      EXPECT_LE(r.objective, previous + 1e-6);
      previous = r.objective;
    }
    EXPECT_NEAR(previous, z, 1e-6);
  }
}

TEST(TruncationBound, HandExample) {
  const Ensemble e = two_level(1.0, 3.0, 5.0, 0.5);
  const TruncationBound b1 = truncation_bound(e, 1);
  ASSERT_EQ(b1.splits[0].size(), 1u);
  EXPECT_EQ(b1.splits[0][0].delta, 2.0);
  EXPECT_EQ(b1.tree_delta[0], 2.0);
  EXPECT_EQ(b1.total, 1.0);
  EXPECT_EQ(truncation_bound(e, 2).tree_delta[0], 0.0);
  const TruncationBound b3 = truncation_bound(e, 3);
  EXPECT_TRUE(b3.splits[0].empty());
  EXPECT_EQ(b3.total, 0.0);
}

TEST(TruncationBound, Errors) {
  const Ensemble e = single_split(1.0, 5.0, 2.0, -1.0);
  EXPECT_EQ(code_of([&] { truncation_bound(e, 1); }), ErrorCode::kConfiguration);
  EXPECT_EQ(code_of([&] { truncation_bound(single_split(1.0, 5.0), 0); }), ErrorCode::kConfiguration);
}

TEST(NormalizeWeights, SamePredictionsNonnegativeWeights) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    InstanceSpec spec = small_spec(seed);
    spec.weight_min = -1.5;
    const Ensemble e = random_instance(spec);
    const Ensemble n = normalize_weights(e);
    for (const double w : n.weights()) EXPECT_GE(w, 0.0);
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = random_input(e.schema(), rng);
      EXPECT_NEAR(evaluate(n, x), evaluate(e, x), 1e-9);
    }
  }
}

TEST(Proximity, HandValues) {
  const std::vector<RawVariable> vars{numeric("X1")};
  const std::vector<RawTree> trees{{{split(0, 1.0, 1, 2), leaf(0.0), leaf(1.0)}, 0, 1.0},
                                   {{split(0, 2.0, 1, 2), leaf(0.0), leaf(1.0)}, 0, 1.0}};
  const Ensemble e = build_ensemble(vars, trees);
  const std::vector<double> a{0.0}, b{1.5}, c{3.0};
  EXPECT_EQ(proximity(e, a, a), 1.0);
  EXPECT_EQ(proximity(e, a, b), 0.5);
  EXPECT_EQ(proximity(e, a, c), 0.0);
  const std::vector<std::vector<double>> pts{a, c};
  EXPECT_EQ(proximity_vectors(e, pts), (std::vector<std::vector<int>>{{0, 0}, {1, 1}}));
}

TEST(Proximity, SymmetricAndMatchesSharedLeaves) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Ensemble e = random_instance(small_spec(seed));
    const auto a = random_input(e.schema(), rng);
    const auto b = random_input(e.schema(), rng);
    EXPECT_EQ(proximity(e, a, b), proximity(e, b, a));
    EXPECT_EQ(proximity(e, a, b), shared_leaf_fraction(e, a, b));
  }
}

TEST(Proximity, CapKeepsSolutionAway) {
  const std::vector<RawVariable> vars{numeric("X1")};
  const std::vector<RawTree> trees{{{split(0, 1.0, 1, 2), leaf(5.0), leaf(1.0)}, 0, 1.0},
                                   {{split(0, 2.0, 1, 2), leaf(5.0), leaf(2.0)}, 0, 1.0}};
  const Ensemble e = build_ensemble(vars, trees);
  const std::vector<std::vector<double>> pts{{0.0}};
  MilpModel m = build_full(e);
  add_proximity_constraints(m, e, pts, 0.5);
  const SolveResult r = solve_milp(m);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.objective, 6.0, 1e-9);

  MilpModel strict = build_full(e);
  add_proximity_constraints(strict, e, pts, 0.0);
  EXPECT_NEAR(solve_milp(strict).objective, 3.0, 1e-9);

  MilpModel loose = build_full(e);
  add_proximity_constraints(loose, e, pts, 1.0);
  EXPECT_NEAR(solve_milp(loose).objective, 10.0, 1e-9);
}

TEST(LeafLinearConstraint, ForcesLeafAndRejectsUnknownKeys) {
  const Ensemble e = single_split(1.0, 5.0);
  MilpModel m = build_full(e);
  const std::vector<LeafTerm> force{{0, 0, 1.0}};
  add_leaf_linear_constraint(m, force, RowSense::kGreaterEqual, 1.0, "force");
  EXPECT_NEAR(solve_milp(m).objective, 1.0, 1e-9);
  const std::vector<LeafTerm> bad_tree{{1, 0, 1.0}};
  const std::vector<LeafTerm> bad_leaf{{0, 2, 1.0}};
  EXPECT_EQ(code_of([&] { add_leaf_linear_constraint(m, bad_tree, RowSense::kLessEqual, 0.0); }),
            ErrorCode::kConfiguration);
  EXPECT_EQ(code_of([&] { add_leaf_linear_constraint(m, bad_leaf, RowSense::kLessEqual, 0.0); }),
            ErrorCode::kConfiguration);
}

TEST(Repair, SetsLeafIndicatorsFromBits) {
  const Ensemble e = single_split(1.0, 5.0);
  const MilpModel m = build_full(e);
  std::vector<double> v(m.num_variables(), 0.3);
  v[static_cast<std::size_t>(m.x_vars[0][0])] = 0.0;
  const auto r = repair_leaf_indicators(m, e, v);
  EXPECT_EQ(r[static_cast<std::size_t>(m.y_vars[0][0])], 0.0);
  EXPECT_EQ(r[static_cast<std::size_t>(m.y_vars[0][1])], 1.0);
  EXPECT_EQ(encoding_of(m, r).bits, (std::vector<std::uint8_t>{0}));
  EXPECT_LE(m.max_violation(r), 0.0);
}

TEST(Repair, RejectsBrokenEncoding) {
  const std::vector<RawVariable> vars{categorical("c", 3)};
  const std::vector<RawTree> trees{{{category_split(0, {0}, 1, 2), leaf(1.0), leaf(2.0)}, 0, 1.0}};
  const Ensemble e = build_ensemble(vars, trees);
  const MilpModel m = build_full(e);
  const std::vector<double> v(m.num_variables(), 0.0);
  EXPECT_EQ(code_of([&] { repair_leaf_indicators(m, e, v); }), ErrorCode::kEncoding);
}

TEST(EncodingModel, OnlyStructureRows) {
  const Ensemble e = random_instance(small_spec(4));
  const MilpModel m = build_encoding_model(e);
  EXPECT_TRUE(m.y_vars.empty());
  EXPECT_EQ(m.num_variables(), e.schema().num_bits());
  EXPECT_EQ(m.num_rows(), count_kind(m, "ladder") + count_kind(m, "one-hot"));
}

TEST(RelaxedMaster, NoSplitRows) {
  const Ensemble e = random_instance(small_spec(4));
  const MilpModel m = build_relaxed_master(e);
  EXPECT_EQ(count_kind(m, "split-left") + count_kind(m, "split-right"), 0u);
  EXPECT_EQ(count_kind(m, "convexity"), e.size());
}

}  // namespace
}  // namespace treeopt
