#include "treeopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "treeopt/benders.hpp"
#include "treeopt/error.hpp"
#include "treeopt/formulation.hpp"
#include "treeopt/local_search.hpp"
#include "treeopt/oracle.hpp"
#include "treeopt/solve.hpp"
#include "treeopt/splitgen.hpp"

namespace treeopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio_pct(double num, double den) { return den == 0.0 ? kNaN : 100.0 * num / den; }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kLimitReached: return "limit";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "error";
}

std::string fmt(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct InstanceOutcome {
  std::vector<BenchRecord> records;
  std::vector<std::string> failures;
  std::vector<std::string> violations;
};

BenchRecord blank(const BenchInstance& inst, Method method) {
  BenchRecord r;
  r.instance_id = inst.id;
  r.method = std::string(to_string(method));
  r.trees = inst.ensemble.size();
  r.n_levels = inst.ensemble.schema().num_bits();
  r.n_leaves = inst.ensemble.num_leaves();
  r.z_lb = r.z_ub = r.gap_pct = kNaN;
  r.g_lo_pct = r.g_stdlin_lo_pct = r.g_stdlin_mio_pct = r.g_ls_pct = kNaN;
  return r;
}

void fill_from(BenchRecord& r, const SolveResult& s) {
  r.status = status_name(s.status);
  if (s.has_incumbent) {
    r.z_lb = s.objective;
    r.gap_pct = 100.0 * s.gap;
  }
  r.z_ub = s.bound;
  r.cuts = s.stats.total_cuts();
  r.nodes = s.stats.nodes;
}

InstanceOutcome run_instance(const BenchInstance& inst, const std::vector<Method>& methods, const BenchConfig& config) {
  InstanceOutcome out;
  const Ensemble& e = inst.ensemble;
  std::vector<std::optional<SolveResult>> solved(methods.size());

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const Method method = methods[k];
    BenchRecord r = blank(inst, method);
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (method) {
        case Method::kDirect: solved[k] = solve_direct(e, config.bnb); break;
        case Method::kStdLin: solved[k] = solve_standard_linearization(e, config.bnb); break;
        case Method::kBenders: solved[k] = solve_benders(e, config.bnb); break;
        case Method::kSplitgenLazy: solved[k] = solve_splitgen_lazy(e, config.bnb); break;
        case Method::kSplitgenIter: solved[k] = solve_splitgen_iterative(e, config.bnb); break;
        case Method::kLocalSearch: {
          const LocalSearchResult ls = multi_start(e, config.restarts, config.seed ^ inst.seed);
          r.z_lb = ls.objective;
          r.status = "heuristic";
          break;
        }
        case Method::kBruteForce: {
          const BruteForceResult bf = brute_force_opt(e, config.enumeration_cap);
          r.z_lb = r.z_ub = bf.objective;
          r.gap_pct = 0.0;
          r.status = "optimal";
          break;
        }
      }
      if (solved[k]) fill_from(r, *solved[k]);
    } catch (const std::exception& ex) {
      r.status = "error";
      out.failures.push_back(inst.id + " " + r.method + ": " + ex.what());
    }
    r.time_ms = elapsed_ms(start);
    out.records.push_back(std::move(r));
  }

  // Reference optimum: the first exact method that finished optimally.
  std::optional<double> z_star;
  for (const BenchRecord& r : out.records) {
    const auto m = parse_method(r.method);
    if (m && is_exact(*m) && r.status == "optimal") {
      z_star = r.z_lb;
      break;
    }
  }

  double z_lo = kNaN;
  double z_stdlin_lo = kNaN;
  try {
    z_lo = lp_relaxation_value(build_full(e), config.bnb.lp);
    z_stdlin_lo = lp_relaxation_value(build_standard_linearization(e), config.bnb.lp);
    if (z_lo > z_stdlin_lo + config.lp_tolerance)
      out.violations.push_back(inst.id + ": relaxation ordering broken, Z_LO = " + fmt(z_lo) +
                               " > Z_StdLin,LO = " + fmt(z_stdlin_lo));
  } catch (const std::exception& ex) {
    out.failures.push_back(inst.id + " relaxations: " + ex.what());
  }

  for (BenchRecord& r : out.records) {
    if (z_star) {
      r.g_lo_pct = g_lo_pct(z_lo, *z_star);
      r.g_stdlin_lo_pct = g_stdlin_lo_pct(z_stdlin_lo, *z_star);
    }
    const auto m = parse_method(r.method);
    if (m == Method::kStdLin && r.status != "error") r.g_stdlin_mio_pct = g_stdlin_mio_pct(r.z_ub, r.z_lb);
    if (m == Method::kLocalSearch && r.status != "error" && z_star) {
      r.g_ls_pct = g_ls_pct(*z_star, r.z_lb);
      if (r.z_lb > *z_star + config.tolerance)
        out.violations.push_back(inst.id + ": local search " + fmt(r.z_lb) + " beats the optimum " + fmt(*z_star));
    }
    if (m && is_exact(*m) && r.status == "optimal" && z_star && !(std::abs(r.z_lb - *z_star) <= config.tolerance))
      out.violations.push_back(inst.id + ": " + r.method + " optimum " + fmt(r.z_lb) + " differs from " +
                               fmt(*z_star));
  }
  return out;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::kDirect: return "direct";
    case Method::kStdLin: return "std-lin";
    case Method::kBenders: return "benders";
    case Method::kSplitgenLazy: return "splitgen-lazy";
    case Method::kSplitgenIter: return "splitgen-iter";
    case Method::kLocalSearch: return "local-search";
    case Method::kBruteForce: return "brute-force";
  }
  return "unknown";
}

std::vector<Method> all_methods() {
  return {Method::kDirect,       Method::kStdLin,      Method::kBenders,   Method::kSplitgenLazy,
          Method::kSplitgenIter, Method::kLocalSearch, Method::kBruteForce};
}

std::optional<Method> parse_method(std::string_view name) {
  for (const Method m : all_methods())
    if (to_string(m) == name) return m;
  return std::nullopt;
}

bool is_exact(Method method) noexcept { return method != Method::kLocalSearch; }

double g_lo_pct(double z_lo, double z_star) { return ratio_pct(z_lo - z_star, z_star); }
double g_stdlin_lo_pct(double z_stdlin_lo, double z_star) { return ratio_pct(z_stdlin_lo - z_star, z_star); }
double g_stdlin_mio_pct(double z_ub, double z_lb) { return ratio_pct(z_ub - z_lb, z_ub); }
double g_ls_pct(double z_star, double z_ls) { return ratio_pct(z_star - z_ls, z_star); }

SweepResult run_method_sweep(const std::vector<BenchInstance>& instances, const std::vector<Method>& methods,
                             const BenchConfig& config) {
  if (config.workers < 1) throw Error(ErrorCode::kConfiguration, "workers must be at least 1");
  std::vector<InstanceOutcome> outcomes(instances.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++)
      outcomes[i] = run_instance(instances[i], methods, config);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), instances.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  SweepResult result;
  for (InstanceOutcome& o : outcomes) {
    std::move(o.records.begin(), o.records.end(), std::back_inserter(result.records));
    std::move(o.failures.begin(), o.failures.end(), std::back_inserter(result.failures));
    std::move(o.violations.begin(), o.violations.end(), std::back_inserter(result.violations));
  }
  return result;
}

DepthSweepResult run_depth_sweep(const Ensemble& original, int d_min, int d_max, const BnbConfig& config,
                                 double tolerance) {
  const Ensemble ensemble = normalize_weights(original);
  if (d_max == 0) d_max = std::max(1, ensemble.max_depth());
  if (d_min < 1 || d_max < d_min) throw Error(ErrorCode::kConfiguration, "depth range must satisfy 1 <= d_min <= d_max");

  DepthSweepResult out;
  const SolveResult exact = solve_direct(ensemble, config);
  if (exact.status != SolveStatus::kOptimal)
    throw Error(ErrorCode::kConfiguration, "depth sweep needs the exact optimum; direct solve ended " +
                                               std::string(to_string(exact.status)));
  out.z_star = exact.objective;

  for (int d = d_min; d <= d_max; ++d) {
    const auto start = std::chrono::steady_clock::now();
    const SolveResult s = solve_truncated(ensemble, d, config);
    DepthRecord r;
    r.depth = d;
    r.time_ms = elapsed_ms(start);
    r.nodes = s.stats.nodes;
    r.ub = s.objective;
    r.actual = s.true_objective;
    r.delta = truncation_bound(ensemble, d).total;
    r.lb = r.ub - r.delta;
    const std::string at = "d = " + std::to_string(d) + ": ";
    if (s.status != SolveStatus::kOptimal) out.violations.push_back(at + "truncated solve not optimal");
    if (r.lb > r.actual + tolerance) out.violations.push_back(at + "LB " + fmt(r.lb) + " > actual " + fmt(r.actual));
    if (r.actual > out.z_star + tolerance)
      out.violations.push_back(at + "actual " + fmt(r.actual) + " > Z* " + fmt(out.z_star));
    if (out.z_star > r.ub + tolerance) out.violations.push_back(at + "Z* " + fmt(out.z_star) + " > UB " + fmt(r.ub));
    if (!out.records.empty() && r.ub > out.records.back().ub + tolerance)
      out.violations.push_back(at + "UB increased to " + fmt(r.ub));
    if (d >= ensemble.max_depth() &&
        (std::abs(r.ub - out.z_star) > tolerance || std::abs(r.actual - out.z_star) > tolerance))
      out.violations.push_back(at + "UB and actual differ from Z* at full depth");
    out.records.push_back(r);
  }
  return out;
}

FrontierResult run_proximity_frontier(const Ensemble& ensemble, const std::vector<std::vector<double>>& points,
                                      std::vector<double> caps, const BnbConfig& config) {
  std::sort(caps.begin(), caps.end());
  FrontierResult out;
  for (const double cap : caps) {
    const auto start = std::chrono::steady_clock::now();
    MilpModel model = build_full(ensemble);
    add_proximity_constraints(model, ensemble, points, cap);
    SolveResult s = solve_milp(model, config);
    attach_solution(ensemble, model, s, true);
    FrontierRecord r;
    r.cap = cap;
    r.time_ms = elapsed_ms(start);
    r.feasible = s.has_incumbent;
    const std::string at = "c = " + fmt(cap) + ": ";
    if (r.feasible) {
      if (s.status != SolveStatus::kOptimal) out.violations.push_back(at + "solve not optimal");
      r.objective = s.objective;
      r.x = s.x;
      for (const auto& p : points) r.max_proximity = std::max(r.max_proximity, proximity(ensemble, r.x, p));
      if (r.max_proximity > cap + 1e-9)
        out.violations.push_back(at + "realized proximity " + fmt(r.max_proximity) + " above the cap");
      const auto prev = std::find_if(out.records.rbegin(), out.records.rend(),
                                     [](const FrontierRecord& f) { return f.feasible; });
      if (prev != out.records.rend() && r.objective < prev->objective - 1e-6)
        out.violations.push_back(at + "objective decreased to " + fmt(r.objective));
    } else {
      for (const FrontierRecord& f : out.records)
        if (f.feasible) out.violations.push_back(at + "infeasible although a smaller cap was feasible");
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kBenchCsvHeader << '\n';
  for (const BenchRecord& r : records) {
    char time[32];
    std::snprintf(time, sizeof time, "%.3f", r.time_ms);
    out << r.instance_id << ',' << r.method << ',' << r.trees << ',' << r.n_levels << ',' << r.n_leaves << ','
        << time << ',' << fmt(r.z_lb) << ',' << fmt(r.z_ub) << ',' << fmt(r.gap_pct) << ',' << fmt(r.g_lo_pct)
        << ',' << fmt(r.g_stdlin_lo_pct) << ',' << fmt(r.g_stdlin_mio_pct) << ',' << fmt(r.g_ls_pct) << ','
        << r.cuts << ',' << r.nodes << '\n';
  }
}

void write_depth_csv(std::ostream& out, std::string_view instance_id, const DepthSweepResult& sweep) {
  for (const DepthRecord& r : sweep.records) {
    char time[32];
    std::snprintf(time, sizeof time, "%.3f", r.time_ms);
    out << instance_id << ',' << r.depth << ',' << fmt(r.ub) << ',' << fmt(r.actual) << ',' << fmt(r.lb) << ','
        << fmt(r.delta) << ',' << time << ',' << r.nodes << '\n';
  }
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  write_bench_csv(out, records);
  return out.str();
}

std::string bench_sidecar_json(const BenchConfig& config, const std::vector<Method>& methods,
                               const SweepResult& result) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json ms = nlohmann::ordered_json::array();
  for (const Method m : methods) ms.push_back(std::string(to_string(m)));
  doc["methods"] = std::move(ms);
  doc["seed"] = config.seed;
  doc["restarts"] = config.restarts;
  doc["workers"] = config.workers;
  doc["enumeration_cap"] = config.enumeration_cap;
  doc["tolerance"] = config.tolerance;
  doc["lp_tolerance"] = config.lp_tolerance;
  doc["rel_gap"] = config.bnb.rel_gap;
  doc["abs_gap"] = config.bnb.abs_gap;
  doc["int_tol"] = config.bnb.int_tol;
  doc["time_limit_s"] = config.bnb.time_limit;
  doc["node_limit"] = config.bnb.node_limit;
  doc["feas_tol"] = config.bnb.lp.feas_tol;
  doc["records"] = result.records.size();
  doc["failures"] = result.failures;
  doc["violations"] = result.violations;
  return doc.dump(2) + "\n";
}

}  // namespace treeopt
