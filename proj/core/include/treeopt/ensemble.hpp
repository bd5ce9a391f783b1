#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace treeopt {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class VariableKind { kNumeric, kCategorical };

/// One independent variable as seen by the optimizer.
///
/// Numeric variables are described by their ladder of unique split points
/// a_1 < ... < a_K (model units). Categorical variables by their level count K;
/// levels are 1..K in raw inputs and 0..K-1 internally.
struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::kNumeric;
  std::vector<double> split_points;  // numeric only
  int levels = 0;                    // categorical only

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

class VariableSchema {
 public:
  VariableSchema() = default;
  explicit VariableSchema(std::vector<VariableSpec> variables);

  std::size_t size() const noexcept { return variables_.size(); }
  const VariableSpec& variable(std::size_t i) const { return variables_.at(i); }
  VariableKind kind(std::size_t i) const { return variables_.at(i).kind; }
  bool is_numeric(std::size_t i) const { return kind(i) == VariableKind::kNumeric; }

  /// K_i: number of split points (numeric) or levels (categorical).
  int cardinality(std::size_t i) const;
  std::span<const double> split_points(std::size_t i) const { return variables_.at(i).split_points; }

  /// Offset of x_{i,0} in the flat bit vector; bits of variable i occupy
  /// [offset(i), offset(i) + cardinality(i)).
  std::size_t offset(std::size_t i) const { return offsets_.at(i); }
  /// N_Levels = sum_i K_i.
  std::size_t num_bits() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }

  /// Index j with split_points(i)[j] == value exactly, or -1.
  int find_split_point(std::size_t i, double value) const;

  friend bool operator==(const VariableSchema&, const VariableSchema&) = default;

 private:
  std::vector<VariableSpec> variables_;
  std::vector<std::size_t> offsets_;  // size() + 1 entries
};

/// Split or leaf of a tree arena. A node is a leaf iff it has no children.
struct Node {
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  int var = -1;
  int split_index = -1;         // numeric split: query X_var <= a_{var, split_index}
  std::vector<int> categories;  // categorical split: sorted 0-based levels routed left
  double value = 0.0;           // leaf prediction
  int depth = 1;                // root = 1, filled in by Tree

  bool is_leaf() const noexcept { return left == kNoNode; }
  friend bool operator==(const Node&, const Node&) = default;
};

/// left(s)/right(s) for every split and LS(l)/RS(l) for every leaf. Leaves are
/// referred to by their ordinal (position in Tree::leaves()), splits by node id.
struct LeafSets {
  std::vector<std::vector<int>> left;       // indexed by node id; empty for leaves
  std::vector<std::vector<int>> right;      // indexed by node id; empty for leaves
  std::vector<std::vector<NodeId>> left_splits;   // LS, indexed by leaf ordinal
  std::vector<std::vector<NodeId>> right_splits;  // RS, indexed by leaf ordinal
};

class Tree {
 public:
  /// Validates the arena (single root, binary, acyclic, every split with two
  /// children) and precomputes depths, leaf ordering and leaf sets. Throws
  /// Error(kStructure) on malformed input.
  Tree(std::vector<Node> nodes, NodeId root);

  NodeId root() const noexcept { return root_; }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const Node> nodes() const noexcept { return nodes_; }

  /// Leaf node ids in left-first depth-first order; index = leaf ordinal.
  std::span<const NodeId> leaves() const noexcept { return leaves_; }
  /// Split node ids in pre-order.
  std::span<const NodeId> splits() const noexcept { return splits_; }
  std::size_t num_leaves() const noexcept { return leaves_.size(); }
  int leaf_ordinal(NodeId id) const { return leaf_ordinal_.at(static_cast<std::size_t>(id)); }
  double leaf_value(int ordinal) const { return node(leaves_.at(static_cast<std::size_t>(ordinal))).value; }
  /// Deepest split depth; 0 for a single-leaf tree.
  int max_split_depth() const noexcept { return max_split_depth_; }

  const LeafSets& leaf_sets() const noexcept { return leaf_sets_; }

  friend bool operator==(const Tree& a, const Tree& b) { return a.root_ == b.root_ && a.nodes_ == b.nodes_; }

 private:
  std::vector<Node> nodes_;
  NodeId root_ = 0;
  std::vector<NodeId> leaves_;
  std::vector<NodeId> splits_;
  std::vector<int> leaf_ordinal_;
  int max_split_depth_ = 0;
  LeafSets leaf_sets_;
};

class Ensemble {
 public:
  /// Checks T >= 1, finite weights and that every split references a variable
  /// and split index / level present in the schema.
  Ensemble(VariableSchema schema, std::vector<Tree> trees, std::vector<double> weights);

  const VariableSchema& schema() const noexcept { return schema_; }
  std::size_t size() const noexcept { return trees_.size(); }
  const Tree& tree(std::size_t t) const { return trees_.at(t); }
  std::span<const Tree> trees() const noexcept { return trees_; }
  double weight(std::size_t t) const { return weights_.at(t); }
  std::span<const double> weights() const noexcept { return weights_; }

  /// N_Leaves = sum_t |leaves(t)|.
  std::size_t num_leaves() const;
  /// d_max over all trees (0 if every tree is a single leaf).
  int max_depth() const;

  friend bool operator==(const Ensemble&, const Ensemble&) = default;

 private:
  VariableSchema schema_;
  std::vector<Tree> trees_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Raw (threshold-valued) trees, as read from external models.

struct RawNode {
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  int var = -1;
  double threshold = std::numeric_limits<double>::quiet_NaN();  // numeric split
  std::vector<int> levels;  // categorical split, 0-based levels routed left
  double value = 0.0;

  bool is_leaf() const noexcept { return left == kNoNode; }
  friend bool operator==(const RawNode&, const RawNode&) = default;
};

struct RawTree {
  std::vector<RawNode> nodes;
  NodeId root = 0;
  double weight = 1.0;
  friend bool operator==(const RawTree&, const RawTree&) = default;
};

/// Variable declaration for raw models: numeric variables get their ladder
/// from the trees, categorical ones carry their level count.
struct RawVariable {
  std::string name;
  VariableKind kind = VariableKind::kNumeric;
  int levels = 0;
};

/// Sorted, deduplicated split points per numeric variable; level universe per
/// categorical variable. Throws Error(kNonFinite) on NaN/inf thresholds.
VariableSchema extract_schema(std::span<const RawVariable> variables, std::span<const RawTree> trees);

/// Remaps raw thresholds onto `schema` indices. Every threshold must be a
/// split point of the schema.
Tree index_tree(const RawTree& raw, const VariableSchema& schema);

/// extract_schema + index_tree for every tree.
Ensemble build_ensemble(std::span<const RawVariable> variables, std::span<const RawTree> trees);

/// Inverse of index_tree: thresholds restored from the schema.
RawTree to_raw(const Tree& tree, const VariableSchema& schema, double weight);
std::vector<RawVariable> raw_variables(const VariableSchema& schema);

// ---------------------------------------------------------------------------
// Evaluation.

/// Query of split `s` on a raw input; true routes left.
bool evaluate_split(const Node& split, const VariableSchema& schema, std::span<const double> x);

/// Leaf ordinal reached by raw input X. Categorical values must be levels 1..K.
int find_leaf(const Tree& tree, const VariableSchema& schema, std::span<const double> x);

/// sum_t lambda_t f_t(X). Throws Error(kDomain) for categorical values outside
/// 1..K_i or a wrong input length.
double predict(const Ensemble& ensemble, std::span<const double> x);

/// Checks X against the schema domains; throws Error(kDomain).
void check_domain(const VariableSchema& schema, std::span<const double> x);

// ---------------------------------------------------------------------------
// Preprocessing.

/// Fixed raw values and per-variable allowed value sets (grids). For
/// categorical variables grid values are levels 1..K.
struct CollapseOptions {
  std::map<int, double> fixed;
  std::map<int, std::vector<double>> grids;
};

/// Equivalent tree with splits decided by `fixed` replaced by the reachable
/// child and branches that admit no grid value pruned. Predictions of
/// surviving leaves are unchanged. The result uses raw thresholds so the
/// caller can re-extract a smaller schema.
RawTree collapse_tree(const Tree& tree, const VariableSchema& schema, const CollapseOptions& options,
                      double weight = 1.0);

/// collapse_tree applied to every tree followed by schema re-extraction.
/// Variables keep their positions; fixed ones simply no longer appear.
Ensemble collapse_ensemble(const Ensemble& ensemble, const CollapseOptions& options);

}  // namespace treeopt
