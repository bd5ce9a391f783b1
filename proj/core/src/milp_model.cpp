#include "treeopt/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "treeopt/error.hpp"

namespace treeopt {

double LinearRow::activity(std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& t : terms) sum += t.coef * values[static_cast<std::size_t>(t.var)];
  return sum;
}

double LinearRow::violation(std::span<const double> values) const {
  const double lhs = activity(values);
  switch (sense) {
    case RowSense::kLessEqual: return std::max(0.0, lhs - rhs);
    case RowSense::kGreaterEqual: return std::max(0.0, rhs - lhs);
    case RowSense::kEqual: return std::abs(lhs - rhs);
  }
  return 0.0;
}

LinearRow normalize_row(LinearRow row, std::size_t num_variables) {
  std::map<int, double> merged;
  for (const auto& t : row.terms) {
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= num_variables)
      throw Error(ErrorCode::kInternal, "row '" + row.name + "' references undeclared variable " +
                                            std::to_string(t.var));
    if (!std::isfinite(t.coef)) throw Error(ErrorCode::kNonFinite, "row '" + row.name + "' has a non-finite coefficient");
    merged[t.var] += t.coef;
  }
  row.terms.clear();
  for (const auto& [var, coef] : merged)
    if (coef != 0.0) row.terms.push_back({var, coef});
  if (row.sense == RowSense::kGreaterEqual) {
    for (auto& t : row.terms) t.coef = -t.coef;
    row.rhs = -row.rhs;
    row.sense = RowSense::kLessEqual;
  }
  return row;
}

int MilpModel::add_variable(std::string name, VarType type, double lower, double upper, double objective) {
  if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper))
    throw Error(ErrorCode::kInternal, "variable '" + name + "' needs finite bounds lower <= upper");
  const int id = static_cast<int>(variables_.size());
  if (!name.empty()) by_name_.emplace(name, id);
  variables_.push_back({std::move(name), type, lower, upper, objective});
  return id;
}

int MilpModel::add_row(LinearRow row) {
  rows_.push_back(normalize_row(std::move(row), variables_.size()));
  return static_cast<int>(rows_.size() - 1);
}

std::size_t MilpModel::num_binaries() const {
  return static_cast<std::size_t>(
      std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) { return v.type == VarType::kBinary; }));
}

int MilpModel::find_variable(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? -1 : it->second;
}

double MilpModel::objective_value(std::span<const double> values) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) sum += variables_[j].objective * values[j];
  return sum;
}

double MilpModel::max_violation(std::span<const double> values) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, variables_[j].lower - values[j]);
    worst = std::max(worst, values[j] - variables_[j].upper);
  }
  for (const auto& r : rows_) worst = std::max(worst, r.violation(values));
  return worst;
}

namespace {

std::string lp_name(const std::string& name, char prefix, std::size_t index) {
  if (name.empty()) return prefix + std::to_string(index);
  std::string out;
  out.reserve(name.size());
  for (const char c : name) {
    if (c == '[') out += '(';
    else if (c == ']') out += ')';
    else if (c == ' ' || c == ':') out += '_';
    else out += c;
  }
  return out;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ostringstream& os, const std::vector<std::pair<std::string, double>>& terms) {
  if (terms.empty()) {
    os << " 0";
    return;
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double c = terms[k].second;
    os << (c < 0 ? " - " : (k == 0 ? " " : " + ")) << number(std::abs(c)) << ' ' << terms[k].first;
  }
}

}  // namespace

std::string MilpModel::to_lp_format() const {
  std::ostringstream os;
  std::vector<std::string> names;
  names.reserve(variables_.size());
  for (std::size_t j = 0; j < variables_.size(); ++j) names.push_back(lp_name(variables_[j].name, 'v', j));

  os << "Maximize\n obj:";
  std::vector<std::pair<std::string, double>> terms;
  for (std::size_t j = 0; j < variables_.size(); ++j)
    if (variables_[j].objective != 0.0) terms.emplace_back(names[j], variables_[j].objective);
  write_terms(os, terms);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    terms.clear();
    for (const auto& t : rows_[r].terms) terms.emplace_back(names[static_cast<std::size_t>(t.var)], t.coef);
    os << ' ' << lp_name(rows_[r].name, 'c', r) << ':';
    write_terms(os, terms);
    os << (rows_[r].sense == RowSense::kEqual ? " = " : " <= ") << number(rows_[r].rhs) << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < variables_.size(); ++j)
    os << ' ' << number(variables_[j].lower) << " <= " << names[j] << " <= " << number(variables_[j].upper) << '\n';
  bool any_binary = false;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    if (variables_[j].type != VarType::kBinary) continue;
    if (!any_binary) os << "Binaries\n";
    any_binary = true;
    os << ' ' << names[j] << '\n';
  }
  os << "End\n";
  return os.str();
}

}  // namespace treeopt
