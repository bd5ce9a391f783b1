#include "treeopt/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "treeopt/error.hpp"

namespace treeopt {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const json& member(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::kMissingField, path + ": missing member '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "nan" || s == "inf" || s == "-inf" || s == "infinity" || s == "-infinity")
      throw Error(ErrorCode::kNonFinite, path + ": non-finite number");
  }
  if (!v.is_number()) throw Error(ErrorCode::kMissingField, path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::kNonFinite, path + ": non-finite number");
  return d;
}

long long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw Error(ErrorCode::kMissingField, path + ": expected an integer");
  return v.get<long long>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw Error(ErrorCode::kMissingField, path + ": expected an array");
  return v;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

VariableSchema parse_variables(const json& doc) {
  const json& vars = array(member(doc, "variables", "$"), "$.variables");
  std::vector<VariableSpec> specs;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string path = at("$.variables", i);
    const json& v = vars[i];
    if (!v.is_object()) throw Error(ErrorCode::kMissingField, path + ": expected an object");
    VariableSpec spec;
    spec.name = v.contains("name") && v["name"].is_string() ? v["name"].get<std::string>() : "X" + std::to_string(i + 1);
    const json& kind = member(v, "kind", path);
    if (!kind.is_string()) throw Error(ErrorCode::kBadVariableKind, path + ".kind: expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "numeric") {
      spec.kind = VariableKind::kNumeric;
      if (v.contains("levels")) throw Error(ErrorCode::kSchema, path + ": numeric variable with levels");
      if (v.contains("split_points")) {
        const json& points = array(v["split_points"], path + ".split_points");
        for (std::size_t j = 0; j < points.size(); ++j)
          spec.split_points.push_back(number(points[j], at(path + ".split_points", j)));
      }
    } else if (k == "categorical") {
      spec.kind = VariableKind::kCategorical;
      const long long levels = integer(member(v, "levels", path), path + ".levels");
      if (levels < 1 || levels > 64) throw Error(ErrorCode::kSchema, path + ".levels: must be in 1..64");
      if (v.contains("split_points"))
        throw Error(ErrorCode::kSchema, path + ": categorical variable with split points");
      spec.levels = static_cast<int>(levels);
    } else {
      throw Error(ErrorCode::kBadVariableKind, path + ".kind: unknown kind '" + k + "'");
    }
    specs.push_back(std::move(spec));
  }
  try {
    return VariableSchema(std::move(specs));
  } catch (const Error& e) {
    throw Error(e.code(), std::string("$.variables: ") + e.what());
  }
}

Tree parse_tree(const json& t, const VariableSchema& schema, const std::string& path) {
  const json& nodes = array(member(t, "nodes", path), path + ".nodes");
  if (nodes.empty()) throw Error(ErrorCode::kStructure, path + ".nodes: tree has no nodes");

  std::unordered_map<long long, NodeId> index;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string npath = at(path + ".nodes", k);
    if (!nodes[k].is_object()) throw Error(ErrorCode::kMissingField, npath + ": expected an object");
    const long long id = integer(member(nodes[k], "id", npath), npath + ".id");
    if (!index.emplace(id, static_cast<NodeId>(k)).second)
      throw Error(ErrorCode::kBadNodeReference, npath + ".id: duplicate node id " + std::to_string(id));
  }

  std::vector<Node> arena(nodes.size());
  std::vector<int> referenced(nodes.size(), 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string npath = at(path + ".nodes", k);
    const json& n = nodes[k];
    const json& kind = member(n, "kind", npath);
    const std::string kind_s = kind.is_string() ? kind.get<std::string>() : "";
    Node& node = arena[k];
    if (kind_s == "leaf") {
      if (n.contains("left") || n.contains("right"))
        throw Error(ErrorCode::kStructure, npath + ": leaf with children");
      node.value = number(member(n, "value", npath), npath + ".value");
      continue;
    }
    if (kind_s != "split") throw Error(ErrorCode::kStructure, npath + ".kind: expected 'split' or 'leaf'");

    const long long var = integer(member(n, "var", npath), npath + ".var");
    if (var < 0 || static_cast<std::size_t>(var) >= schema.size())
      throw Error(ErrorCode::kUnknownVariable, npath + ".var: no variable " + std::to_string(var));
    node.var = static_cast<int>(var);
    const auto vi = static_cast<std::size_t>(var);
    if (schema.is_numeric(vi)) {
      if (n.contains("level_set")) throw Error(ErrorCode::kBadLevelSet, npath + ": level_set on a numeric variable");
      const double threshold = number(member(n, "threshold", npath), npath + ".threshold");
      node.split_index = schema.find_split_point(vi, threshold);
      if (node.split_index < 0)
        throw Error(ErrorCode::kThresholdNotInSchema,
                    npath + ".threshold: value not among the split points of variable " + std::to_string(var));
    } else {
      if (n.contains("threshold")) throw Error(ErrorCode::kBadLevelSet, npath + ": threshold on a categorical variable");
      const json& set = member(n, "level_set", npath);
      if (!set.is_array()) throw Error(ErrorCode::kBadLevelSet, npath + ".level_set: expected an array");
      std::set<int> levels;
      for (std::size_t j = 0; j < set.size(); ++j) {
        if (!set[j].is_number_integer()) throw Error(ErrorCode::kBadLevelSet, npath + ".level_set: expected integers");
        const long long level = set[j].get<long long>();
        if (level < 1 || level > schema.cardinality(vi) || !levels.insert(static_cast<int>(level) - 1).second)
          throw Error(ErrorCode::kBadLevelSet, npath + ".level_set: bad or repeated level " + std::to_string(level));
      }
      if (levels.empty() || static_cast<int>(levels.size()) == schema.cardinality(vi))
        throw Error(ErrorCode::kBadLevelSet, npath + ".level_set: must be a nonempty proper subset of the levels");
      node.categories.assign(levels.begin(), levels.end());
    }
    for (const char* side : {"left", "right"}) {
      const long long child = integer(member(n, side, npath), npath + "." + side);
      const auto it = index.find(child);
      if (it == index.end())
        throw Error(ErrorCode::kBadNodeReference, npath + "." + side + ": no node with id " + std::to_string(child));
      (std::string_view(side) == "left" ? node.left : node.right) = it->second;
      ++referenced[static_cast<std::size_t>(it->second)];
    }
  }

  NodeId root = kNoNode;
  for (std::size_t k = 0; k < arena.size(); ++k) {
    if (referenced[k] > 0) continue;
    if (root != kNoNode) throw Error(ErrorCode::kStructure, path + ": more than one root");
    root = static_cast<NodeId>(k);
  }
  if (root == kNoNode) throw Error(ErrorCode::kStructure, path + ": no root (every node is a child)");
  try {
    return Tree(std::move(arena), root);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace

Ensemble parse_ensemble_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kMissingField, "$: document must be an object");
  const long long version = integer(member(doc, "schema_version", "$"), "$.schema_version");
  if (version != kEnsembleSchemaVersion)
    throw Error(ErrorCode::kSchemaVersion, "$.schema_version: unsupported version " + std::to_string(version));

  VariableSchema schema = parse_variables(doc);
  const json& trees = array(member(doc, "trees", "$"), "$.trees");
  if (trees.empty()) throw Error(ErrorCode::kNoTrees, "$.trees: ensemble needs at least one tree");
  std::vector<Tree> parsed;
  std::vector<double> weights;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::string path = at("$.trees", t);
    if (!trees[t].is_object()) throw Error(ErrorCode::kMissingField, path + ": expected an object");
    weights.push_back(number(member(trees[t], "weight", path), path + ".weight"));
    parsed.push_back(parse_tree(trees[t], schema, path));
  }
  return Ensemble(std::move(schema), std::move(parsed), std::move(weights));
}

Ensemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_ensemble_json(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string ensemble_to_json(const Ensemble& ensemble) {
  const VariableSchema& schema = ensemble.schema();
  ordered_json doc;
  doc["schema_version"] = kEnsembleSchemaVersion;
  ordered_json vars = ordered_json::array();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const VariableSpec& v = schema.variable(i);
    ordered_json jv;
    jv["name"] = v.name;
    if (v.kind == VariableKind::kNumeric) {
      jv["kind"] = "numeric";
      jv["split_points"] = v.split_points;
    } else {
      jv["kind"] = "categorical";
      jv["levels"] = v.levels;
    }
    vars.push_back(std::move(jv));
  }
  doc["variables"] = std::move(vars);
  ordered_json trees = ordered_json::array();
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const Tree& tree = ensemble.tree(t);
    ordered_json jt;
    jt["weight"] = ensemble.weight(t);
    ordered_json nodes = ordered_json::array();
    for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
      const Node& n = tree.nodes()[k];
      ordered_json jn;
      jn["id"] = k;
      if (n.is_leaf()) {
        jn["kind"] = "leaf";
        jn["value"] = n.value;
      } else {
        jn["kind"] = "split";
        jn["var"] = n.var;
        const auto vi = static_cast<std::size_t>(n.var);
        if (schema.is_numeric(vi)) {
          jn["threshold"] = schema.split_points(vi)[static_cast<std::size_t>(n.split_index)];
        } else {
          ordered_json levels = ordered_json::array();
          for (const int c : n.categories) levels.push_back(c + 1);
          jn["level_set"] = std::move(levels);
        }
        jn["left"] = n.left;
        jn["right"] = n.right;
      }
      nodes.push_back(std::move(jn));
    }
    jt["nodes"] = std::move(nodes);
    trees.push_back(std::move(jt));
  }
  doc["trees"] = std::move(trees);
  return doc.dump(2) + "\n";
}

void save_ensemble(const Ensemble& ensemble, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kParse, "cannot write " + path.string());
  out << ensemble_to_json(ensemble);
}

Ensemble convert_tree_dump(std::istream& in) {
  std::vector<RawVariable> variables;
  std::unordered_map<std::string, int> by_name;
  std::vector<RawTree> trees;
  std::vector<bool> has_weight;
  struct Row {
    long long id, left, right, var;
    double split;
    long long status;
    double prediction;
    int line;
  };
  std::vector<std::vector<Row>> rows;

  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse, "tree dump line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "var") {
      std::string name, kind;
      if (!(ls >> name >> kind)) fail("expected 'var <name> <kind>'");
      RawVariable v{name, VariableKind::kNumeric, 0};
      if (kind == "categorical") {
        v.kind = VariableKind::kCategorical;
        if (!(ls >> v.levels) || v.levels < 1 || v.levels > 31) fail("categorical variable needs 1..31 levels");
      } else if (kind != "numeric") {
        fail("unknown variable kind '" + kind + "'");
      }
      if (!trees.empty()) fail("variables must be declared before the first tree");
      by_name.emplace(name, static_cast<int>(variables.size()));
      variables.push_back(std::move(v));
    } else if (head == "tree") {
      RawTree tree;
      double w = 0.0;
      const bool weighted = static_cast<bool>(ls >> w);
      if (weighted) tree.weight = w;
      trees.push_back(std::move(tree));
      has_weight.push_back(weighted);
      rows.emplace_back();
    } else {
      if (trees.empty()) fail("node row before the first 'tree' line");
      Row r{};
      r.line = line_no;
      std::istringstream full(line);
      if (!(full >> r.id >> r.left >> r.right >> r.var >> r.split >> r.status >> r.prediction))
        fail("expected '<id> <left> <right> <var> <split> <status> <prediction>'");
      rows.back().push_back(r);
    }
  }
  if (trees.empty()) throw Error(ErrorCode::kNoTrees, "tree dump contains no trees");

  for (std::size_t t = 0; t < trees.size(); ++t) {
    RawTree& tree = trees[t];
    if (!has_weight[t]) tree.weight = 1.0 / static_cast<double>(trees.size());
    std::unordered_map<long long, NodeId> index;
    for (std::size_t k = 0; k < rows[t].size(); ++k) {
      line_no = rows[t][k].line;
      if (!index.emplace(rows[t][k].id, static_cast<NodeId>(k)).second) fail("duplicate node id");
    }
    tree.nodes.resize(rows[t].size());
    std::vector<int> referenced(rows[t].size(), 0);
    for (std::size_t k = 0; k < rows[t].size(); ++k) {
      const Row& r = rows[t][k];
      line_no = r.line;
      RawNode& node = tree.nodes[k];
      if (r.left == 0 && r.right == 0) {
        node.value = r.prediction;
        continue;
      }
      const auto l = index.find(r.left);
      const auto rr = index.find(r.right);
      if (l == index.end() || rr == index.end()) fail("child id not found in this tree");
      node.left = l->second;
      node.right = rr->second;
      ++referenced[static_cast<std::size_t>(node.left)];
      ++referenced[static_cast<std::size_t>(node.right)];
      if (r.var < 1) fail("variables are 1-based");
      while (static_cast<long long>(variables.size()) < r.var)
        variables.push_back({"X" + std::to_string(variables.size() + 1), VariableKind::kNumeric, 0});
      node.var = static_cast<int>(r.var - 1);
      const RawVariable& v = variables[static_cast<std::size_t>(node.var)];
      if (v.kind == VariableKind::kNumeric) {
        node.threshold = r.split;
      } else {
        const auto mask = static_cast<long long>(r.split);
        if (static_cast<double>(mask) != r.split || mask < 1) fail("categorical split must be a positive bit mask");
        for (int level = 0; level < v.levels; ++level)
          if ((mask >> level) & 1LL) node.levels.push_back(level);
        if (mask >> v.levels) fail("bit mask references levels beyond the declared count");
      }
    }
    tree.root = kNoNode;
    for (std::size_t k = 0; k < referenced.size(); ++k) {
      if (referenced[k] > 0) continue;
      if (tree.root != kNoNode)
        throw Error(ErrorCode::kStructure, "tree " + std::to_string(t + 1) + " of the dump has more than one root");
      tree.root = static_cast<NodeId>(k);
    }
    if (tree.root == kNoNode) throw Error(ErrorCode::kStructure, "tree " + std::to_string(t + 1) + " has no root");
  }
  return build_ensemble(variables, trees);
}

std::vector<std::vector<double>> read_points_csv(std::istream& in, std::size_t num_variables) {
  std::vector<std::vector<double>> points;
  std::string line;
  int line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first_row) {
        first_row = false;
        continue;
      }
      throw Error(ErrorCode::kParse, "points line " + std::to_string(line_no) + ": non-numeric value");
    }
    first_row = false;
    if (row.size() != num_variables)
      throw Error(ErrorCode::kParse, "points line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(num_variables) + " values, got " + std::to_string(row.size()));
    points.push_back(std::move(row));
  }
  return points;
}

std::string solve_result_json(const SolveResult& result, const Ensemble& ensemble, std::string_view method,
                              const std::map<std::string, double>& extra, std::string_view status) {
  ordered_json doc;
  doc["method"] = method;
  doc["status"] = status.empty() ? to_string(result.status) : status;
  doc["has_incumbent"] = result.has_incumbent;
  doc["objective"] = result.objective;
  doc["bound"] = result.bound;
  doc["gap"] = result.gap;
  doc["true_objective"] = result.true_objective;
  for (const auto& [key, value] : extra) doc[key] = value;
  ordered_json x = ordered_json::array();
  const VariableSchema& schema = ensemble.schema();
  for (std::size_t i = 0; i < result.x.size(); ++i) {
    ordered_json v;
    v["name"] = schema.variable(i).name;
    v["value"] = result.x[i];
    if (i < result.cells.size()) {
      const CellBounds& c = result.cells[i];
      v["lower"] = std::isfinite(c.lower) ? ordered_json(c.lower) : ordered_json(nullptr);
      v["upper"] = std::isfinite(c.upper) ? ordered_json(c.upper) : ordered_json(nullptr);
    }
    x.push_back(std::move(v));
  }
  doc["x"] = std::move(x);
  ordered_json stats;
  stats["nodes"] = result.stats.nodes;
  stats["lp_solves"] = result.stats.lp_solves;
  stats["lp_iterations"] = result.stats.lp_iterations;
  stats["cuts"] = result.stats.cuts;
  stats["wall_ms"] = result.stats.wall_ms;
  if (!result.trace.empty()) stats["trace"] = result.trace;
  doc["stats"] = std::move(stats);
  return doc.dump(2) + "\n";
}

}  // namespace treeopt
