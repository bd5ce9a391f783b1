#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeopt/ensemble.hpp"
#include "treeopt/milp_solver.hpp"

namespace treeopt {

enum class Method { kDirect, kStdLin, kBenders, kSplitgenLazy, kSplitgenIter, kLocalSearch, kBruteForce };

std::string_view to_string(Method method) noexcept;
/// "direct", "std-lin", "benders", "splitgen-lazy", "splitgen-iter",
/// "local-search", "brute-force".
std::optional<Method> parse_method(std::string_view name);
std::vector<Method> all_methods();
/// Methods whose optimal status certifies the global optimum.
bool is_exact(Method method) noexcept;

// Gap metrics in percent. All are NaN when the denominator is zero.
double g_lo_pct(double z_lo, double z_star);               // 100 (Z_LO - Z*) / Z*
double g_stdlin_lo_pct(double z_stdlin_lo, double z_star); // 100 (Z_StdLin,LO - Z*) / Z*
double g_stdlin_mio_pct(double z_ub, double z_lb);         // 100 (Z_UB - Z_LB) / Z_UB
double g_ls_pct(double z_star, double z_ls);               // 100 (Z* - Z_LS) / Z*

struct BenchInstance {
  std::string id;
  Ensemble ensemble;
  std::uint64_t seed = 0;
};

struct BenchConfig {
  BnbConfig bnb;
  int restarts = 10;        // local search
  std::uint64_t seed = 0;   // mixed with the instance seed
  std::uint64_t enumeration_cap = 1'000'000;
  double tolerance = 1e-6;  // cross-method agreement
  double lp_tolerance = 1e-7;  // relaxation ordering
  int workers = 1;
};

/// One CSV row. Metrics that do not apply to the method are NaN.
struct BenchRecord {
  std::string instance_id;
  std::string method;
  std::size_t trees = 0;
  std::size_t n_levels = 0;
  std::size_t n_leaves = 0;
  double time_ms = 0.0;
  double z_lb = 0.0;
  double z_ub = 0.0;
  double gap_pct = 0.0;
  double g_lo_pct = 0.0;
  double g_stdlin_lo_pct = 0.0;
  double g_stdlin_mio_pct = 0.0;
  double g_ls_pct = 0.0;
  long cuts = 0;
  long nodes = 0;
  std::string status;  // optimal, limit, infeasible, heuristic, error
};

struct SweepResult {
  std::vector<BenchRecord> records;
  std::vector<std::string> failures;    // per-record errors
  std::vector<std::string> violations;  // broken invariants
};

/// One record per (instance, method), in instance then method order. Every
/// instance also gets both LP relaxations for the G_LO columns. Checks the
/// relaxation ordering, agreement of exact optima and G_LS >= -tolerance.
SweepResult run_method_sweep(const std::vector<BenchInstance>& instances, const std::vector<Method>& methods,
                             const BenchConfig& config = {});

struct DepthRecord {
  int depth = 1;
  double ub = 0.0;      // Z*_{MIO,d}
  double actual = 0.0;  // Z_d
  double lb = 0.0;      // Z*_{MIO,d} - sum lambda_t Delta_t
  double delta = 0.0;   // sum lambda_t Delta_t
  double time_ms = 0.0;
  long nodes = 0;
};

struct DepthSweepResult {
  double z_star = 0.0;
  std::vector<DepthRecord> records;
  std::vector<std::string> violations;
};

/// Truncated solves for d = d_min..d_max (d_max = 0: deepest split) on the
/// weight-normalized ensemble, checked against the sandwich
/// LB <= Actual <= Z* <= UB, monotone UB, and UB = Actual = Z* at d_max.
DepthSweepResult run_depth_sweep(const Ensemble& ensemble, int d_min = 1, int d_max = 0, const BnbConfig& config = {},
                                 double tolerance = 1e-6);

struct FrontierRecord {
  double cap = 1.0;
  bool feasible = false;
  double objective = 0.0;
  double max_proximity = 0.0;  // recomputed against every training point
  std::vector<double> x;
  double time_ms = 0.0;
};

struct FrontierResult {
  std::vector<FrontierRecord> records;
  std::vector<std::string> violations;
};

/// Maximizes the ensemble under proximity <= c for every cap (sorted
/// ascending). Infeasible caps are recorded as such.
FrontierResult run_proximity_frontier(const Ensemble& ensemble, const std::vector<std::vector<double>>& points,
                                      std::vector<double> caps, const BnbConfig& config = {});

inline constexpr std::string_view kBenchCsvHeader =
    "instance_id,method,T,n_levels,n_leaves,time_ms,z_lb,z_ub,gap_pct,g_lo_pct,g_stdlin_lo_pct,"
    "g_stdlin_mio_pct,g_ls_pct,cuts,nodes";

/// Header plus one line per record. Values use 17 significant digits, NaN is
/// an empty field, time_ms has three decimals.
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::string bench_csv(const std::vector<BenchRecord>& records);

inline constexpr std::string_view kDepthCsvHeader = "instance_id,depth,ub,actual,lb,delta,time_ms,nodes";

/// Rows of one depth sweep, without header.
void write_depth_csv(std::ostream& out, std::string_view instance_id, const DepthSweepResult& sweep);

/// JSON sidecar with the configuration, method list and the failure and
/// violation lists.
std::string bench_sidecar_json(const BenchConfig& config, const std::vector<Method>& methods,
                               const SweepResult& result);

}  // namespace treeopt
