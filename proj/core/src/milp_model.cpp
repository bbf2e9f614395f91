#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "gridstack/error.hpp"
#include "gridstack/milp.hpp"

namespace gridstack {

int MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper, double cost) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    throw ModelBuildError("variable " + name + ": lower bound exceeds upper bound");
  if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
    throw ModelBuildError("variable " + name + ": binary bounds must lie within [0, 1]");
  if (!std::isfinite(cost)) throw ModelBuildError("variable " + name + ": non-finite cost");
  vars_.push_back({std::move(name), kind, lower, upper});
  cost_.push_back(cost);
  return static_cast<int>(vars_.size()) - 1;
}

void MilpModel::check_var(int var) const {
  if (var < 0 || var >= num_variables())
    throw ModelBuildError("reference to unknown variable " + std::to_string(var));
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  if (!std::isfinite(rhs)) throw ModelBuildError("constraint " + name + ": non-finite right-hand side");
  for (const Term& t : terms) {
    check_var(t.var);
    if (!std::isfinite(t.coef)) throw ModelBuildError("constraint " + name + ": non-finite coefficient");
  }
  // Merge duplicate references so every row is a proper sparse vector.
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void MilpModel::set_bounds(int var, double lower, double upper) {
  check_var(var);
  Variable& v = vars_[static_cast<std::size_t>(var)];
  if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    throw ModelBuildError("variable " + v.name + ": lower bound exceeds upper bound");
  if (v.kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
    throw ModelBuildError("variable " + v.name + ": binary bounds must lie within [0, 1]");
  v.lower = lower;
  v.upper = upper;
}

void MilpModel::set_cost(int var, double cost) {
  check_var(var);
  cost_[static_cast<std::size_t>(var)] = cost;
}

void MilpModel::add_cost(int var, double cost) {
  check_var(var);
  cost_[static_cast<std::size_t>(var)] += cost;
}

int MilpModel::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                        [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

double MilpModel::evaluate(const std::vector<double>& x) const {
  double f = 0.0;
  for (std::size_t j = 0; j < cost_.size(); ++j) f += cost_[j] * x[j];
  return f;
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const Constraint& r : rows_) {
    double lhs = 0.0;
    for (const Term& t : r.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    const double scale = std::max(1.0, std::abs(r.rhs));
    double v = 0.0;
    switch (r.sense) {
      case Sense::LessEqual: v = lhs - r.rhs; break;
      case Sense::GreaterEqual: v = r.rhs - lhs; break;
      case Sense::Equal: v = std::abs(lhs - r.rhs); break;
    }
    worst = std::max(worst, v / scale);
  }
  return worst;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapReached: return "gap_reached";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

// LP format identifiers may not contain brackets, commas or '='.
std::string lp_name(const std::string& name, const char* prefix, std::size_t index) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      out.push_back(c);
    } else if (c == '[' || c == ',' || c == '=') {
      out.push_back('_');
    }
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.')
    out = prefix + std::to_string(index) + (out.empty() ? "" : "_" + out);
  return out;
}

// Sanitizing can merge distinct names ("d+" and "d-"); later duplicates get
// their index appended.
std::vector<std::string> unique_names(const std::vector<std::string>& raw, const char* prefix) {
  std::vector<std::string> out(raw.size());
  std::unordered_set<std::string> seen;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    std::string n = lp_name(raw[j], prefix, j);
    while (!seen.insert(n).second) n += "_" + std::to_string(j);
    out[j] = std::move(n);
  }
  return out;
}

void write_number(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "+inf" : "-inf");
  } else {
    out << v;
  }
}

void write_terms(std::ostream& out, const std::vector<std::pair<double, std::string>>& terms) {
  int on_line = 0;
  bool first = true;
  for (const auto& [c, n] : terms) {
    if (first) {
      out << (c < 0 ? "- " : "");
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    out << std::abs(c) << ' ' << n;
    first = false;
    if (++on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
  }
  if (first) out << "0";
}

}  // namespace

void write_lp(std::ostream& out, const MilpModel& model) {
  const auto& vars = model.variables();
  std::vector<std::string> raw;
  for (const Variable& v : vars) raw.push_back(v.name);
  const std::vector<std::string> names = unique_names(raw, "x");
  raw.clear();
  for (const Constraint& r : model.constraints()) raw.push_back(r.name);
  const std::vector<std::string> row_names = unique_names(raw, "c");

  const auto prec = out.precision(17);
  out << "\\ gridstack model: " << vars.size() << " variables, " << model.num_constraints() << " rows\n";
  out << "Minimize\n obj: ";
  std::vector<std::pair<double, std::string>> terms;
  for (std::size_t j = 0; j < vars.size(); ++j)
    if (model.objective()[j] != 0.0) terms.emplace_back(model.objective()[j], names[j]);
  write_terms(out, terms);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < model.constraints().size(); ++i) {
    const Constraint& r = model.constraints()[i];
    terms.clear();
    for (const Term& t : r.terms) terms.emplace_back(t.coef, names[static_cast<std::size_t>(t.var)]);
    out << ' ' << row_names[i] << ": ";
    write_terms(out, terms);
    out << (r.sense == Sense::LessEqual ? " <= " : r.sense == Sense::Equal ? " = " : " >= ");
    write_number(out, r.rhs);
    out << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Variable& v = vars[j];
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      out << ' ' << names[j] << " = ";
      write_number(out, v.lower);
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << names[j] << " free";
    } else {
      out << ' ';
      write_number(out, v.lower);
      out << " <= " << names[j] << " <= ";
      write_number(out, v.upper);
    }
    out << '\n';
  }
  bool any_binary = false;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::Binary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    out << ' ' << names[j] << '\n';
  }
  out << "End\n";
  out.precision(prec);
}

}  // namespace gridstack
