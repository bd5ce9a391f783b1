#pragma once

#include <span>
#include <string>
#include <vector>

#include "treeopt/encoding.hpp"
#include "treeopt/ensemble.hpp"
#include "treeopt/milp_model.hpp"

namespace treeopt {

/// Full formulation: binary x bits, continuous y in [0, 1], one convexity row
/// per tree, left/right split rows for every split, ladder and one-hot rows.
MilpModel build_full(const Ensemble& ensemble);

/// Standard linearization of the polynomial formulation: per-leaf upper rows
/// for every ancestor split plus one lower row per leaf, sharing the x-side
/// rows. There is no convexity row.
MilpModel build_standard_linearization(const Ensemble& ensemble);

/// As build_full, but split rows only for splits of depth <= `depth`.
/// Throws Error(kConfiguration) for depth < 1.
MilpModel build_truncated(const Ensemble& ensemble, int depth);

/// x bits with their ladder and one-hot rows only (no y, no objective).
MilpModel build_encoding_model(const Ensemble& ensemble);

/// Convexity, ladder, one-hot rows and the objective only; split rows are
/// left to the caller (split generation).
MilpModel build_relaxed_master(const Ensemble& ensemble);

/// Left row sum_{left(s)} y <= sum_{C(s)} x and right row
/// sum_{right(s)} y <= 1 - sum_{C(s)} x of split `s` in tree `t`.
LinearRow split_left_row(const MilpModel& model, const Ensemble& ensemble, std::size_t t, NodeId s);
LinearRow split_right_row(const MilpModel& model, const Ensemble& ensemble, std::size_t t, NodeId s);

struct SplitDelta {
  NodeId split;
  double delta;
};

struct TruncationBound {
  int depth = 1;
  std::vector<double> tree_delta;                // Delta_t
  std::vector<std::vector<SplitDelta>> splits;   // delta_{t,s} for s at depth == d
  double total = 0.0;                            // sum_t lambda_t Delta_t
};

/// delta_{t,s} = max(range of leaf values under left(s), range under right(s))
/// over the splits at depth exactly d; Delta_t is their maximum (0 if none).
/// Throws Error(kConfiguration) when some lambda_t < 0 or depth < 1.
TruncationBound truncation_bound(const Ensemble& ensemble, int depth);

/// Equivalent ensemble with lambda_t >= 0: trees with negative weight get
/// their weight and leaf values negated.
Ensemble normalize_weights(const Ensemble& ensemble);

/// Coefficient on y_{tree, leaf}.
struct LeafTerm {
  int tree;
  int leaf;  // leaf ordinal
  double coef;
};

/// Appends sum coef * y_{t,l} (sense) rhs. Throws Error(kConfiguration) on an
/// unknown (t, l) key.
int add_leaf_linear_constraint(MilpModel& model, std::span<const LeafTerm> terms, RowSense sense, double rhs,
                               std::string name = {});

/// Leaf ordinal of every point in every tree: result[m][t]. This is the compact
/// form of the indicator vectors y^(m).
std::vector<std::vector<int>> proximity_vectors(const Ensemble& ensemble, std::span<const std::vector<double>> points);

/// Fraction of trees placing the two inputs in the same leaf.
double proximity(const Ensemble& ensemble, std::span<const double> a, std::span<const double> b);

/// One row (1/T) sum_t y_{t, leaf_t(m)} <= c per training point.
void add_proximity_constraints(MilpModel& model, const Ensemble& ensemble,
                               std::span<const std::vector<double>> points, double cap);

/// x bits of a model point, rounded to {0, 1}.
BinaryEncoding encoding_of(const MilpModel& model, std::span<const double> values);

/// Point with y set to the leaf indicators of the (rounded) x part of
/// `values`; other variables are copied.
std::vector<double> repair_leaf_indicators(const MilpModel& model, const Ensemble& ensemble,
                                           std::span<const double> values);

}  // namespace treeopt
