#include "treeopt/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "treeopt/error.hpp"

namespace treeopt {

std::string_view to_string(LpStatus status) noexcept {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

LpSolver::LpSolver(LpOptions options) : options_(options) {}

void LpSolver::load(const MilpModel& model) {
  n_ = static_cast<int>(model.num_variables());
  cost_.assign(static_cast<std::size_t>(n_), 0.0);
  lower_.assign(static_cast<std::size_t>(n_), 0.0);
  upper_.assign(static_cast<std::size_t>(n_), 0.0);
  for (int j = 0; j < n_; ++j) {
    const auto& v = model.variable(j);
    cost_[static_cast<std::size_t>(j)] = -v.objective;
    lower_[static_cast<std::size_t>(j)] = v.lower;
    upper_[static_cast<std::size_t>(j)] = v.upper;
  }
  rows_.clear();
  cols_.assign(static_cast<std::size_t>(n_), {});
  rhs_.clear();
  equality_.clear();
  status_.assign(static_cast<std::size_t>(n_), BasisStatus::kAtLower);
  x_.assign(static_cast<std::size_t>(n_), 0.0);
  d_.assign(static_cast<std::size_t>(n_), 0.0);
  head_.clear();
  pos_.assign(static_cast<std::size_t>(n_), -1);
  for (const auto& row : model.rows()) add_row(row);
  install_slack_basis();
}

void LpSolver::set_bounds(int var, double lower, double upper) {
  lower_.at(static_cast<std::size_t>(var)) = lower;
  upper_.at(static_cast<std::size_t>(var)) = upper;
}

void LpSolver::add_row(const LinearRow& raw) {
  const LinearRow row = normalize_row(raw, static_cast<std::size_t>(n_));
  const int i = static_cast<int>(rhs_.size());
  std::vector<std::pair<int, double>> entries;
  entries.reserve(row.terms.size());
  for (const auto& t : row.terms) {
    entries.emplace_back(t.var, t.coef);
    cols_[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);
  }
  rows_.push_back(std::move(entries));
  rhs_.push_back(row.rhs);
  equality_.push_back(row.sense == RowSense::kEqual ? 1 : 0);
  lower_.push_back(0.0);
  upper_.push_back(0.0);
  status_.push_back(BasisStatus::kBasic);
  x_.push_back(0.0);
  d_.push_back(0.0);
  pos_.push_back(static_cast<int>(head_.size()));
  head_.push_back(n_ + i);
  if (basis_valid_ && etas_.empty()) {
    // A basic slack row extends the factorization without touching the kernel.
    base_slack_pos_.push_back(pos_.back());
    row_in_kernel_.push_back(-1);
  } else {
    basis_valid_ = false;
  }
}

Basis LpSolver::basis() const {
  Basis b;
  b.columns.assign(status_.begin(), status_.begin() + n_);
  b.rows.assign(status_.begin() + n_, status_.end());
  return b;
}

bool LpSolver::install_slack_basis() {
  head_.clear();
  for (int j = 0; j < n_; ++j) {
    status_[static_cast<std::size_t>(j)] = BasisStatus::kAtLower;
    pos_[static_cast<std::size_t>(j)] = -1;
  }
  for (std::size_t i = 0; i < m(); ++i) {
    const std::size_t col = static_cast<std::size_t>(n_) + i;
    status_[col] = BasisStatus::kBasic;
    pos_[col] = static_cast<int>(i);
    head_.push_back(static_cast<int>(col));
  }
  basis_valid_ = false;
  return true;
}

void LpSolver::reset_basis() { install_slack_basis(); }

void LpSolver::set_basis(const Basis& basis) {
  if (basis.columns.size() != static_cast<std::size_t>(n_) || basis.rows.size() > m()) {
    install_slack_basis();
    return;
  }
  bool same = true;
  for (std::size_t col = 0; col < total() && same; ++col) {
    const std::size_t i = col - static_cast<std::size_t>(n_);
    const auto want = col < static_cast<std::size_t>(n_) ? basis.columns[col]
                      : i < basis.rows.size()             ? basis.rows[i]
                                                          : BasisStatus::kBasic;
    same = want == status_[col];
  }
  if (same) return;
  std::size_t basic = 0;
  for (int j = 0; j < n_; ++j) {
    status_[static_cast<std::size_t>(j)] = basis.columns[static_cast<std::size_t>(j)];
    basic += basis.columns[static_cast<std::size_t>(j)] == BasisStatus::kBasic;
  }
  for (std::size_t i = 0; i < m(); ++i) {
    const auto s = i < basis.rows.size() ? basis.rows[i] : BasisStatus::kBasic;
    status_[static_cast<std::size_t>(n_) + i] = s;
    basic += s == BasisStatus::kBasic;
  }
  if (basic != m()) {
    install_slack_basis();
    return;
  }
  head_.clear();
  for (std::size_t col = 0; col < total(); ++col) {
    if (status_[col] == BasisStatus::kBasic) {
      pos_[col] = static_cast<int>(head_.size());
      head_.push_back(static_cast<int>(col));
    } else {
      pos_[col] = -1;
    }
  }
  basis_valid_ = false;
}

void LpSolver::refresh_slack_bounds() {
  for (std::size_t i = 0; i < m(); ++i) {
    const std::size_t col = static_cast<std::size_t>(n_) + i;
    if (equality_[i]) {
      upper_[col] = 0.0;
      continue;
    }
    double min_activity = 0.0;
    for (const auto& [j, a] : rows_[i])
      min_activity += a > 0 ? a * lower_[static_cast<std::size_t>(j)] : a * upper_[static_cast<std::size_t>(j)];
    // Slack values above b - min(a x) are unreachable; the bound only boxes the
    // column. A negative value means the row cannot be satisfied at all.
    upper_[col] = rhs_[i] - min_activity;
  }
}

bool LpSolver::refactor() {
  const std::size_t rows = m();
  kernel_cols_.clear();
  kernel_pos_.clear();
  kernel_rows_.clear();
  row_in_kernel_.assign(rows, -1);
  base_slack_pos_.assign(rows, -1);
  for (std::size_t p = 0; p < rows; ++p) {
    const int col = head_[p];
    if (is_slack(col)) {
      base_slack_pos_[static_cast<std::size_t>(col - n_)] = static_cast<int>(p);
    } else {
      kernel_cols_.push_back(col);
      kernel_pos_.push_back(static_cast<int>(p));
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (base_slack_pos_[i] < 0) {
      row_in_kernel_[i] = static_cast<int>(kernel_rows_.size());
      kernel_rows_.push_back(static_cast<int>(i));
    }
  }
  etas_.clear();
  if (kernel_rows_.size() != kernel_cols_.size()) return false;
  const auto k = static_cast<Eigen::Index>(kernel_cols_.size());
  if (k > 0) {
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index b = 0; b < k; ++b) {
      for (const auto& [i, a] : cols_[static_cast<std::size_t>(kernel_cols_[static_cast<std::size_t>(b)])]) {
        const int r = row_in_kernel_[static_cast<std::size_t>(i)];
        if (r >= 0) kernel(r, b) = a;
      }
    }
    lu_.compute(kernel);
    const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
    const double largest = std::max(1.0, kernel.cwiseAbs().maxCoeff());
    if (!(diag.minCoeff() > 1e-11 * largest)) return false;
  }
  basis_valid_ = true;
  return true;
}

void LpSolver::ftran(std::vector<double>& v) const {
  const std::size_t rows = m();
  std::vector<double> z(rows, 0.0);
  const std::size_t k = kernel_cols_.size();
  std::vector<double> w(rows, 0.0);
  if (k > 0) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) rhs[static_cast<Eigen::Index>(a)] = v[static_cast<std::size_t>(kernel_rows_[a])];
    const Eigen::VectorXd zs = lu_.solve(rhs);
    for (std::size_t b = 0; b < k; ++b) {
      const double val = zs[static_cast<Eigen::Index>(b)];
      z[static_cast<std::size_t>(kernel_pos_[b])] = val;
      if (val == 0.0) continue;
      for (const auto& [i, a] : cols_[static_cast<std::size_t>(kernel_cols_[b])]) w[static_cast<std::size_t>(i)] += a * val;
    }
  }
  for (std::size_t i = 0; i < rows; ++i)
    if (base_slack_pos_[i] >= 0) z[static_cast<std::size_t>(base_slack_pos_[i])] = v[i] - w[i];
  for (const Eta& eta : etas_) {
    const auto p = static_cast<std::size_t>(eta.position);
    const double zr = z[p] / eta.column[p];
    if (zr != 0.0)
      for (std::size_t i = 0; i < rows; ++i) z[i] -= eta.column[i] * zr;
    z[p] = zr;
  }
  v.swap(z);
}

void LpSolver::btran(std::vector<double>& c) const {
  const std::size_t rows = m();
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const auto p = static_cast<std::size_t>(it->position);
    double s = c[p];
    for (std::size_t i = 0; i < rows; ++i)
      if (i != p) s -= it->column[i] * c[i];
    c[p] = s / it->column[p];
  }
  std::vector<double> w(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    if (base_slack_pos_[i] >= 0) w[i] = c[static_cast<std::size_t>(base_slack_pos_[i])];
  const std::size_t k = kernel_cols_.size();
  if (k > 0) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
    for (std::size_t b = 0; b < k; ++b) {
      double r = c[static_cast<std::size_t>(kernel_pos_[b])];
      for (const auto& [i, a] : cols_[static_cast<std::size_t>(kernel_cols_[b])])
        if (row_in_kernel_[static_cast<std::size_t>(i)] < 0) r -= a * w[static_cast<std::size_t>(i)];
      rhs[static_cast<Eigen::Index>(b)] = r;
    }
    const Eigen::VectorXd wr = lu_.transpose().solve(rhs);
    for (std::size_t a = 0; a < k; ++a) w[static_cast<std::size_t>(kernel_rows_[a])] = wr[static_cast<Eigen::Index>(a)];
  }
  c.swap(w);
}

void LpSolver::column(int col, std::vector<double>& out) const {
  out.assign(m(), 0.0);
  if (is_slack(col)) {
    out[static_cast<std::size_t>(col - n_)] = 1.0;
    return;
  }
  for (const auto& [i, a] : cols_[static_cast<std::size_t>(col)]) out[static_cast<std::size_t>(i)] = a;
}

void LpSolver::place_nonbasic_at_bounds() {
  for (std::size_t col = 0; col < total(); ++col) {
    if (status_[col] == BasisStatus::kAtLower) x_[col] = lower_[col];
    else if (status_[col] == BasisStatus::kAtUpper) x_[col] = upper_[col];
  }
}

void LpSolver::compute_primal() {
  std::vector<double> v(rhs_);
  for (int j = 0; j < n_; ++j) {
    const auto col = static_cast<std::size_t>(j);
    if (status_[col] == BasisStatus::kBasic || x_[col] == 0.0) continue;
    for (const auto& [i, a] : cols_[col]) v[static_cast<std::size_t>(i)] -= a * x_[col];
  }
  for (std::size_t i = 0; i < m(); ++i) {
    const std::size_t col = static_cast<std::size_t>(n_) + i;
    if (status_[col] != BasisStatus::kBasic) v[i] -= x_[col];
  }
  ftran(v);
  for (std::size_t p = 0; p < m(); ++p) x_[static_cast<std::size_t>(head_[p])] = v[p];
}

void LpSolver::compute_duals() {
  std::vector<double> y(m(), 0.0);
  for (std::size_t p = 0; p < m(); ++p) {
    const int col = head_[p];
    y[p] = is_slack(col) ? 0.0 : cost_[static_cast<std::size_t>(col)];
  }
  btran(y);
  for (int j = 0; j < n_; ++j) {
    const auto col = static_cast<std::size_t>(j);
    if (status_[col] == BasisStatus::kBasic) {
      d_[col] = 0.0;
      continue;
    }
    double dj = cost_[col];
    for (const auto& [i, a] : cols_[col]) dj -= a * y[static_cast<std::size_t>(i)];
    d_[col] = dj;
  }
  for (std::size_t i = 0; i < m(); ++i) {
    const std::size_t col = static_cast<std::size_t>(n_) + i;
    d_[col] = status_[col] == BasisStatus::kBasic ? 0.0 : -y[i];
  }
}

bool LpSolver::flip_dual_infeasible() {
  bool flipped = false;
  for (std::size_t col = 0; col < total(); ++col) {
    if (status_[col] == BasisStatus::kBasic || upper_[col] <= lower_[col]) continue;
    if (status_[col] == BasisStatus::kAtLower && d_[col] < -options_.opt_tol) {
      status_[col] = BasisStatus::kAtUpper;
      x_[col] = upper_[col];
      flipped = true;
    } else if (status_[col] == BasisStatus::kAtUpper && d_[col] > options_.opt_tol) {
      status_[col] = BasisStatus::kAtLower;
      x_[col] = lower_[col];
      flipped = true;
    }
  }
  return flipped;
}

LpSolution LpSolver::finish(LpStatus status, long iterations) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations;
  sol.primal.assign(x_.begin(), x_.begin() + n_);
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj -= cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  sol.objective = obj;
  if (status != LpStatus::kOptimal) return sol;

  // Duals of the maximization problem: pi = -y, r_j = -d_j.
  std::vector<double> y(m(), 0.0);
  for (std::size_t p = 0; p < m(); ++p) {
    const int col = head_[p];
    y[p] = is_slack(col) ? 0.0 : cost_[static_cast<std::size_t>(col)];
  }
  btran(y);
  sol.duals.resize(m());
  double dual_obj = 0.0;
  // A negative dual on a <= row means its slack sits at the implied upper
  // bound, i.e. the row is at its minimum over the box; the multiplier then
  // moves onto the reduced costs without breaking complementarity.
  for (std::size_t i = 0; i < m(); ++i) {
    sol.duals[i] = equality_[i] ? -y[i] : std::max(0.0, -y[i]);
    dual_obj += sol.duals[i] * rhs_[i];
  }
  sol.reduced_costs.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    const auto col = static_cast<std::size_t>(j);
    double r = -cost_[col];
    for (const auto& [i, a] : cols_[col]) r -= a * sol.duals[static_cast<std::size_t>(i)];
    sol.reduced_costs[col] = r;
    dual_obj += r > 0 ? r * upper_[col] : r * lower_[col];
  }
  sol.dual_objective = dual_obj;
  return sol;
}

LpSolution LpSolver::solve() {
  refresh_slack_bounds();
  for (std::size_t col = 0; col < total(); ++col) {
    if (lower_[col] > upper_[col] + options_.feas_tol) return finish(LpStatus::kInfeasible, 0);
    if (upper_[col] < lower_[col]) upper_[col] = lower_[col];
  }

  auto rebuild = [&](bool force) {
    if ((force || !basis_valid_) && !refactor()) {
      install_slack_basis();
      refactor();
    }
    place_nonbasic_at_bounds();
    compute_duals();
    flip_dual_infeasible();
    compute_primal();
  };
  rebuild(false);

  const std::size_t rows = m();
  const long max_iter = options_.max_iterations > 0 ? options_.max_iterations
                                                    : 50L * static_cast<long>(rows + total()) + 10000L;
  const long degenerate_limit = 10L * static_cast<long>(rows + total());
  long iter = 0;
  long degenerate = 0;
  bool bland = false;
  bool fresh = true;
  std::vector<double> rho, alpha(total(), 0.0), col;

  while (true) {
    if (iter >= max_iter) return finish(LpStatus::kIterationLimit, iter);
    if (static_cast<int>(etas_.size()) >= options_.refactor_interval) {
      rebuild(true);
      fresh = true;
    }

    // Leaving variable: largest bound violation (lowest column under Bland).
    int p = -1;
    double best = 0.0;
    for (std::size_t q = 0; q < rows; ++q) {
      const auto j = static_cast<std::size_t>(head_[q]);
      double infeas = 0.0;
      if (x_[j] < lower_[j] - options_.feas_tol) infeas = lower_[j] - x_[j];
      else if (x_[j] > upper_[j] + options_.feas_tol) infeas = x_[j] - upper_[j];
      if (infeas <= 0.0) continue;
      if (bland ? (p < 0 || head_[q] < head_[static_cast<std::size_t>(p)]) : infeas > best) {
        p = static_cast<int>(q);
        best = infeas;
      }
    }
    if (p < 0) {
      if (!fresh) {
        rebuild(true);
        fresh = true;
        continue;
      }
      if (flip_dual_infeasible()) {
        compute_primal();
        continue;
      }
      return finish(LpStatus::kOptimal, iter);
    }

    const auto leaving = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
    const bool to_lower = x_[leaving] < lower_[leaving];
    const double target = to_lower ? lower_[leaving] : upper_[leaving];
    const double delta = x_[leaving] - target;
    const double sigma = delta > 0 ? 1.0 : -1.0;

    rho.assign(rows, 0.0);
    rho[static_cast<std::size_t>(p)] = 1.0;
    btran(rho);
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      const double r = rho[i];
      if (std::abs(r) < 1e-14) continue;
      for (const auto& [j, a] : rows_[i]) alpha[static_cast<std::size_t>(j)] += r * a;
      alpha[static_cast<std::size_t>(n_) + i] = r;
    }

    // Harris two-pass ratio test over nonbasic, non-fixed columns.
    auto eligible = [&](std::size_t j, double& slack) {
      if (status_[j] == BasisStatus::kBasic || upper_[j] <= lower_[j]) return false;
      const double a = alpha[j];
      if (std::abs(a) < options_.pivot_tol) return false;
      const bool at_lower = status_[j] == BasisStatus::kAtLower;
      if (at_lower ? sigma * a <= 0 : sigma * a >= 0) return false;
      slack = at_lower ? std::max(d_[j], 0.0) : std::max(-d_[j], 0.0);
      return true;
    };
    double theta_max = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < total(); ++j) {
      double s;
      if (!eligible(j, s)) continue;
      any = true;
      theta_max = std::min(theta_max, (bland ? s : s + options_.opt_tol) / std::abs(alpha[j]));
    }
    if (!any) {
      if (!fresh) {
        rebuild(true);
        fresh = true;
        continue;
      }
      return finish(LpStatus::kInfeasible, iter);
    }
    int q = -1;
    double best_pivot = 0.0;
    for (std::size_t j = 0; j < total(); ++j) {
      double s;
      if (!eligible(j, s)) continue;
      const double ratio = s / std::abs(alpha[j]);
      if (bland) {
        if (ratio <= theta_max + 1e-12) {
          q = static_cast<int>(j);
          break;
        }
      } else if (ratio <= theta_max && std::abs(alpha[j]) > best_pivot) {
        best_pivot = std::abs(alpha[j]);
        q = static_cast<int>(j);
      }
    }
    const auto entering = static_cast<std::size_t>(q);

    column(q, col);
    ftran(col);
    const double pivot = col[static_cast<std::size_t>(p)];
    if (std::abs(pivot - alpha[entering]) > 1e-7 * (1.0 + std::abs(pivot)) || std::abs(pivot) < options_.pivot_tol) {
      if (!fresh) {
        rebuild(true);
        fresh = true;
        continue;
      }
    }

    const bool entering_at_lower = status_[entering] == BasisStatus::kAtLower;
    const double dq = entering_at_lower ? std::max(d_[entering], 0.0) : std::min(d_[entering], 0.0);
    const double theta_d = dq / alpha[entering];
    for (std::size_t j = 0; j < total(); ++j)
      if (status_[j] != BasisStatus::kBasic && alpha[j] != 0.0) d_[j] -= theta_d * alpha[j];
    d_[leaving] = -theta_d;
    d_[entering] = 0.0;

    const double theta_p = delta / pivot;
    for (std::size_t i = 0; i < rows; ++i)
      if (col[i] != 0.0) x_[static_cast<std::size_t>(head_[i])] -= theta_p * col[i];
    x_[entering] += theta_p;
    x_[leaving] = target;

    status_[leaving] = to_lower ? BasisStatus::kAtLower : BasisStatus::kAtUpper;
    status_[entering] = BasisStatus::kBasic;
    pos_[entering] = p;
    pos_[leaving] = -1;
    head_[static_cast<std::size_t>(p)] = q;
    etas_.push_back({p, col});
    fresh = false;
    ++iter;

    if (std::abs(theta_d) < 1e-12) {
      if (++degenerate > degenerate_limit) bland = true;
    } else {
      degenerate = 0;
    }
  }
}

LpSolution solve_lp(const MilpModel& model, std::span<const BoundOverride> overrides, LpOptions options) {
  LpSolver solver(options);
  solver.load(model);
  for (const auto& o : overrides) solver.set_bounds(o.var, o.lower, o.upper);
  return solver.solve();
}

}  // namespace treeopt
