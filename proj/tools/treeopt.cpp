#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treeopt/bench.hpp"
#include "treeopt/benders.hpp"
#include "treeopt/error.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/io.hpp"
#include "treeopt/local_search.hpp"
#include "treeopt/oracle.hpp"
#include "treeopt/solve.hpp"
#include "treeopt/splitgen.hpp"

namespace fs = std::filesystem;
using namespace treeopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLimit = 2;

struct OptimizeArgs {
  std::string ensemble;
  std::string method = "direct";
  double time_limit = 0.0;
  double gap = 1e-6;
  long node_limit = 0;
  std::optional<int> depth;
  int restarts = 10;
  std::uint64_t seed = 0;
  std::optional<double> cap;
  std::string training_points;
  std::string output;
};

struct GenArgs {
  std::string kind;
  InstanceSpec spec;
  std::string edges;
  std::string graph;
  std::string output;
};

struct BenchArgs {
  std::string dir;
  std::string methods;
  std::string csv;
  std::string sidecar;
  std::string depth_csv;
  bool depth_sweep = true;
  double time_limit = 0.0;
  std::uint64_t seed = 0;
  int restarts = 10;
  int workers = 0;
  bool inject_fault = false;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kParse, "cannot write " + path);
  out << text;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

BnbConfig bnb_config(double time_limit, double gap, long node_limit) {
  if (time_limit < 0.0 || gap < 0.0 || node_limit < 0)
    throw Error(ErrorCode::kConfiguration, "time limit, gap and node limit must be nonnegative");
  BnbConfig config;
  config.time_limit = time_limit;
  config.rel_gap = gap;
  config.node_limit = node_limit;
  return config;
}

void print_solution(const Ensemble& e, const SolveResult& r, std::string_view method, std::string_view status) {
  std::cout << "method: " << method << '\n' << "status: " << status << '\n';
  if (!r.has_incumbent) return;
  std::cout << "objective: " << num(r.objective) << '\n'
            << "bound: " << num(r.bound) << '\n'
            << "gap: " << num(r.gap) << '\n'
            << "x:";
  for (std::size_t i = 0; i < r.x.size(); ++i) std::cout << ' ' << e.schema().variable(i).name << '=' << num(r.x[i]);
  std::cout << '\n'
            << "nodes: " << r.stats.nodes << "  lp_iterations: " << r.stats.lp_iterations
            << "  cuts: " << r.stats.total_cuts() << "  time_ms: " << num(r.stats.wall_ms) << '\n';
}

int run_optimize(const OptimizeArgs& a) {
  const Ensemble e = load_ensemble(a.ensemble);
  const BnbConfig config = bnb_config(a.time_limit, a.gap, a.node_limit);
  if (a.depth && a.method != "truncated") throw Error(ErrorCode::kConfiguration, "--depth applies to --method truncated");
  if (a.cap && a.method != "direct") throw Error(ErrorCode::kConfiguration, "--proximity-cap applies to --method direct");
  if (a.cap.has_value() != !a.training_points.empty())
    throw Error(ErrorCode::kConfiguration, "--proximity-cap and --training-points go together");

  SolveResult r;
  std::string status;
  std::map<std::string, double> extra;
  if (a.method == "direct") {
    if (a.cap) {
      std::ifstream in(a.training_points);
      if (!in) throw Error(ErrorCode::kParse, "cannot open " + a.training_points);
      const auto points = read_points_csv(in, e.schema().size());
      MilpModel model = build_full(e);
      add_proximity_constraints(model, e, points, *a.cap);
      r = solve_milp(model, config);
      attach_solution(e, model, r, true);
      double realized = 0.0;
      for (const auto& p : points)
        if (r.has_incumbent) realized = std::max(realized, proximity(e, r.x, p));
      extra["proximity_cap"] = *a.cap;
      extra["max_proximity"] = realized;
    } else {
      r = solve_direct(e, config);
    }
  } else if (a.method == "std-lin") {
    r = solve_standard_linearization(e, config);
  } else if (a.method == "benders") {
    r = solve_benders(e, config);
  } else if (a.method == "splitgen" || a.method == "splitgen-lazy") {
    r = solve_splitgen_lazy(e, config);
  } else if (a.method == "splitgen-iter") {
    r = solve_splitgen_iterative(e, config);
  } else if (a.method == "truncated") {
    if (!a.depth) throw Error(ErrorCode::kConfiguration, "--method truncated needs --depth");
    const Ensemble normalized = normalize_weights(e);
    r = solve_truncated(normalized, *a.depth, config);
    if (r.has_incumbent) r.true_objective = predict(e, r.x);
    const TruncationBound bound = truncation_bound(normalized, *a.depth);
    extra["depth"] = *a.depth;
    extra["ub"] = r.objective;
    extra["actual"] = r.true_objective;
    extra["lb"] = r.objective - bound.total;
  } else if (a.method == "local-search") {
    const LocalSearchResult ls = multi_start(e, a.restarts, a.seed);
    r.has_incumbent = true;
    r.status = SolveStatus::kOptimal;
    r.x = ls.x;
    r.encoding = encode(e.schema(), ls.x);
    r.cells = cell_bounds(e.schema(), r.encoding);
    r.objective = r.true_objective = ls.objective;
    r.bound = std::numeric_limits<double>::quiet_NaN();
    r.gap = std::numeric_limits<double>::quiet_NaN();
    r.stats.wall_ms = ls.wall_ms;
    status = "heuristic";
    extra["restarts"] = a.restarts;
  } else if (a.method == "brute-force") {
    const BruteForceResult bf = brute_force_opt(e);
    r.has_incumbent = true;
    r.status = SolveStatus::kOptimal;
    r.x = bf.x;
    r.encoding = encode(e.schema(), bf.x);
    r.cells = cell_bounds(e.schema(), r.encoding);
    r.objective = r.bound = r.true_objective = bf.objective;
    extra["cells_visited"] = static_cast<double>(bf.visited);
  } else {
    throw Error(ErrorCode::kConfiguration, "unknown method '" + a.method + "'");
  }
  if (status.empty()) status = std::string(to_string(r.status));

  print_solution(e, r, a.method, status);
  if (a.method == "truncated" && r.has_incumbent)
    std::cout << "UB: " << num(extra["ub"]) << "  actual: " << num(extra["actual"]) << "  LB: " << num(extra["lb"])
              << '\n';
  if (extra.contains("max_proximity")) std::cout << "max_proximity: " << num(extra["max_proximity"]) << '\n';
  if (!a.output.empty()) write_text(a.output, solve_result_json(r, e, a.method, extra, status));

  if (r.status == SolveStatus::kInfeasible) {
    std::cerr << "problem is infeasible\n";
    return kExitError;
  }
  if (!r.has_incumbent) std::cerr << "limit reached without a solution\n";
  return r.status == SolveStatus::kLimitReached ? kExitLimit : kExitOk;
}

Graph named_graph(const std::string& name) {
  const auto colon = name.find(':');
  const std::string family = name.substr(0, colon);
  const int n = colon == std::string::npos ? 0 : std::stoi(name.substr(colon + 1));
  if (family == "petersen") return colon == std::string::npos ? petersen_graph() : induced_subgraph(petersen_graph(), n);
  if (n < 1) throw Error(ErrorCode::kConfiguration, "graph '" + name + "' needs a size, e.g. path:5");
  if (family == "path") return path_graph(n);
  if (family == "cycle") return cycle_graph(n);
  if (family == "complete") return complete_graph(n);
  if (family == "star") return star_graph(n);
  throw Error(ErrorCode::kConfiguration, "unknown graph family '" + family + "'");
}

int run_gen(const GenArgs& a) {
  Ensemble e = [&] {
    if (a.kind == "random") return random_instance(a.spec);
    if (a.kind != "vertex-cover") throw Error(ErrorCode::kConfiguration, "gen kind must be random or vertex-cover");
    if (a.edges.empty() == a.graph.empty())
      throw Error(ErrorCode::kConfiguration, "vertex-cover needs exactly one of --edges or --graph");
    if (!a.graph.empty()) return vertex_cover_instance(named_graph(a.graph));
    std::ifstream in(a.edges);
    if (!in) throw Error(ErrorCode::kParse, "cannot open " + a.edges);
    return vertex_cover_instance(read_edge_list(in));
  }();
  write_text(a.output, ensemble_to_json(e));
  return kExitOk;
}

int run_validate(const std::string& path) {
  const Ensemble e = load_ensemble(path);
  std::size_t categorical = 0;
  for (std::size_t i = 0; i < e.schema().size(); ++i) categorical += e.schema().is_numeric(i) ? 0 : 1;
  std::cout << "ok: " << e.size() << " trees, " << e.schema().size() << " variables (" << categorical
            << " categorical), N_Levels " << e.schema().num_bits() << ", N_Leaves " << e.num_leaves()
            << ", max depth " << e.max_depth() << '\n';
  return kExitOk;
}

int run_convert(const std::string& input, const std::string& output) {
  std::ifstream in(input);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + input);
  write_text(output, ensemble_to_json(convert_tree_dump(in)));
  return kExitOk;
}

int run_bench(const BenchArgs& a) {
  if (!fs::is_directory(a.dir)) throw Error(ErrorCode::kConfiguration, a.dir + " is not a directory");
  std::vector<Method> methods;
  if (a.methods.empty()) {
    methods = all_methods();
  } else {
    std::stringstream list(a.methods);
    std::string name;
    while (std::getline(list, name, ',')) {
      const auto m = parse_method(name);
      if (!m) throw Error(ErrorCode::kConfiguration, "unknown method '" + name + "'");
      methods.push_back(*m);
    }
  }

  BenchConfig config;
  config.bnb = bnb_config(a.time_limit, 1e-6, 0);
  config.seed = a.seed;
  config.restarts = a.restarts;
  config.workers = a.workers;
  if (config.workers == 0) {
    const char* env = std::getenv("TREEOPT_WORKERS");
    config.workers = env != nullptr ? std::max(1, std::atoi(env)) : 1;
  }
  if (a.inject_fault) config.tolerance = -1.0;

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<BenchInstance> instances;
  std::vector<std::string> load_failures;
  for (std::size_t k = 0; k < files.size(); ++k) {
    try {
      instances.push_back({files[k].stem().string(), load_ensemble(files[k]), k});
    } catch (const Error& e) {
      load_failures.push_back(files[k].filename().string() + ": " + e.what());
    }
  }

  SweepResult result = run_method_sweep(instances, methods, config);
  result.failures.insert(result.failures.begin(), load_failures.begin(), load_failures.end());

  std::ostringstream depth_rows;
  if (a.depth_sweep) {
    for (const BenchInstance& inst : instances) {
      try {
        const DepthSweepResult sweep = run_depth_sweep(inst.ensemble, 1, 0, config.bnb, config.tolerance);
        write_depth_csv(depth_rows, inst.id, sweep);
        for (const auto& v : sweep.violations) result.violations.push_back(inst.id + " depth sweep " + v);
      } catch (const std::exception& ex) {
        result.failures.push_back(inst.id + " depth sweep: " + ex.what());
      }
    }
  }

  write_text(a.csv, bench_csv(result.records));
  const std::string sidecar = !a.sidecar.empty() ? a.sidecar : (a.csv.empty() || a.csv == "-" ? "" : a.csv + ".json");
  if (!sidecar.empty()) write_text(sidecar, bench_sidecar_json(config, methods, result));
  if (!a.depth_csv.empty()) write_text(a.depth_csv, std::string(kDepthCsvHeader) + "\n" + depth_rows.str());

  if (!result.failures.empty()) {
    std::cerr << "failures:\n";
    for (const auto& f : result.failures) std::cerr << "  " << f << '\n';
  }
  if (!result.violations.empty()) {
    std::cerr << "violations:\n";
    for (const auto& v : result.violations) std::cerr << "  " << v << '\n';
    return kExitError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimization over tree ensembles"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Maximize the prediction of an ensemble");
  optimize->add_option("ensemble", opt.ensemble, "Ensemble JSON file")->required();
  optimize->add_option("-m,--method", opt.method,
                       "direct, std-lin, benders, splitgen, splitgen-iter, truncated, local-search, brute-force")
      ->capture_default_str();
  optimize->add_option("--time-limit", opt.time_limit, "Seconds, 0 for none")->capture_default_str();
  optimize->add_option("--gap", opt.gap, "Relative optimality gap")->capture_default_str();
  optimize->add_option("--node-limit", opt.node_limit, "Branch-and-bound nodes, 0 for none");
  optimize->add_option("--depth", opt.depth, "Truncation depth (truncated)");
  optimize->add_option("--restarts", opt.restarts, "Starting points (local-search)")->capture_default_str();
  optimize->add_option("--seed", opt.seed, "Random seed (local-search)")->capture_default_str();
  optimize->add_option("--proximity-cap", opt.cap, "Maximum proximity to any training point (direct)");
  optimize->add_option("--training-points", opt.training_points, "CSV of training inputs for --proximity-cap");
  optimize->add_option("-o,--output", opt.output, "Write the result as JSON");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an ensemble file");
  gen_cmd->add_option("kind", gen.kind, "random or vertex-cover")->required();
  gen_cmd->add_option("--vars", gen.spec.num_variables, "Variables (random)")->capture_default_str();
  gen_cmd->add_option("--trees", gen.spec.num_trees, "Trees (random)")->capture_default_str();
  gen_cmd->add_option("--depth", gen.spec.max_depth, "Deepest split depth (random)")->capture_default_str();
  gen_cmd->add_option("--categorical-fraction", gen.spec.categorical_fraction, "Share of categorical variables")->capture_default_str();
  gen_cmd->add_option("--max-split-points", gen.spec.max_split_points, "Split points per numeric variable, at most")->capture_default_str();
  gen_cmd->add_option("--max-levels", gen.spec.max_levels, "Levels per categorical variable, at most")->capture_default_str();
  gen_cmd->add_option("--split-probability", gen.spec.split_probability, "Chance a node below the root splits")->capture_default_str();
  gen_cmd->add_option("--seed", gen.spec.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--edges", gen.edges, "Edge list file (vertex-cover)");
  gen_cmd->add_option("--graph", gen.graph, "path:N, cycle:N, complete:N, star:N or petersen[:N] (vertex-cover)");
  gen_cmd->add_option("-o,--output", gen.output, "Output file, standard output if absent");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the method sweep over a directory of ensembles");
  bench_cmd->add_option("dir", bench.dir, "Directory of ensemble JSON files")->required();
  bench_cmd->add_option("--methods", bench.methods, "Comma separated methods, all if absent");
  bench_cmd->add_option("--csv", bench.csv, "CSV output, standard output if absent");
  bench_cmd->add_option("--sidecar", bench.sidecar, "Config sidecar, <csv>.json by default");
  bench_cmd->add_option("--depth-csv", bench.depth_csv, "Depth sweep records");
  bench_cmd->add_flag("!--no-depth-sweep", bench.depth_sweep, "Skip the truncation depth sweep");
  bench_cmd->add_option("--time-limit", bench.time_limit, "Seconds per solve, 0 for none");
  bench_cmd->add_option("--seed", bench.seed, "Random seed mixed into every instance seed")->capture_default_str();
  bench_cmd->add_option("--restarts", bench.restarts, "Local search starting points")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "Concurrent instances, TREEOPT_WORKERS or 1 if absent");
  bench_cmd->add_flag("--inject-fault", bench.inject_fault)->group("");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Load and check an ensemble file");
  validate_cmd->add_option("ensemble", validate_path)->required();

  std::string convert_in;
  std::string convert_out;
  auto* convert_cmd = app.add_subcommand("convert", "Convert a text tree dump to ensemble JSON");
  convert_cmd->add_option("dump", convert_in)->required();
  convert_cmd->add_option("-o,--output", convert_out, "Output file, standard output if absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*optimize) return run_optimize(opt);
    if (*gen_cmd) return run_gen(gen);
    if (*bench_cmd) return run_bench(bench);
    if (*validate_cmd) return run_validate(validate_path);
    if (*convert_cmd) return run_convert(convert_in, convert_out);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
