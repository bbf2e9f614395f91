#pragma once

// Reference solvers for tests. Deliberately naive: a dense two-phase tableau
// simplex with Bland's rule and exhaustive enumeration of binaries. Shares no
// code with the production engine.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gridstack/milp.hpp"

namespace gridstack::oracle {

struct DenseLp {
  // min c'x  s.t.  rows, 0 <= x <= upper (upper may be +inf)
  std::vector<double> c;
  std::vector<double> upper;
  std::vector<std::vector<double>> a;
  std::vector<Sense> sense;
  std::vector<double> b;
};

/// Optimal objective or nullopt when infeasible. Unbounded returns -inf.
inline std::optional<double> solve_dense(const DenseLp& lp) {
  const std::size_t n = lp.c.size();
  std::vector<std::vector<double>> rows = lp.a;
  std::vector<Sense> sense = lp.sense;
  std::vector<double> rhs = lp.b;
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lp.upper[j])) continue;
    std::vector<double> r(n, 0.0);
    r[j] = 1.0;
    rows.push_back(r);
    sense.push_back(Sense::LessEqual);
    rhs.push_back(lp.upper[j]);
  }
  const std::size_t m = rows.size();
  // Columns: x, one slack per inequality, one artificial per row.
  std::size_t slacks = 0;
  for (Sense s : sense) slacks += s != Sense::Equal;
  const std::size_t cols = n + slacks + m;
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::size_t si = n;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = rows[i][j];
    if (sense[i] != Sense::Equal) t[i][si++] = sense[i] == Sense::LessEqual ? 1.0 : -1.0;
    t[i][cols] = rhs[i];
    if (t[i][cols] < 0) {
      for (double& v : t[i]) v = -v;
    }
    t[i][n + slacks + i] = 1.0;
    basis[i] = n + slacks + i;
  }

  auto pivot = [&](std::size_t r, std::size_t q) {
    const double p = t[r][q];
    for (double& v : t[r]) v /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || t[i][q] == 0.0) continue;
      const double f = t[i][q];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = q;
  };
  // Returns false when unbounded.
  auto run = [&](std::size_t allowed) {
    for (;;) {
      std::size_t q = allowed;
      for (std::size_t j = 0; j < allowed; ++j)
        if (t[m][j] < -1e-10) {
          q = j;
          break;
        }
      if (q == allowed) return true;
      std::size_t r = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][q] <= 1e-10) continue;
        const double ratio = t[i][cols] / t[i][q];
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && r < m && basis[i] < basis[r])) {
          best = ratio;
          r = i;
        }
      }
      if (r == m) return false;
      pivot(r, q);
    }
  };

  // Phase 1: minimize the sum of artificials.
  for (std::size_t j = 0; j <= cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += t[i][j];
    t[m][j] = j >= n + slacks && j < cols ? 0.0 : -s;
  }
  run(cols);
  if (-t[m][cols] > 1e-7) return std::nullopt;
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n + slacks) continue;
    for (std::size_t j = 0; j < n + slacks; ++j)
      if (std::abs(t[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  // Phase 2 over the original columns only.
  std::fill(t[m].begin(), t[m].end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) t[m][j] = lp.c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = basis[i];
    if (k >= n || t[m][k] == 0.0) continue;
    const double f = t[m][k];
    for (std::size_t j = 0; j <= cols; ++j) t[m][j] -= f * t[i][j];
  }
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n + slacks) t[i].assign(cols + 1, 0.0);  // redundant row
  if (!run(n + slacks)) return -std::numeric_limits<double>::infinity();
  return -t[m][cols];
}

/// Brute-force MILP optimum: every binary assignment, each closed by the dense
/// LP. Continuous variables must have lower bound 0. nullopt when infeasible.
inline std::optional<double> enumerate_milp(const MilpModel& model) {
  std::vector<int> bin, cont;
  for (int j = 0; j < model.num_variables(); ++j)
    (model.variables()[static_cast<std::size_t>(j)].kind == VarKind::Binary ? bin : cont).push_back(j);
  std::optional<double> best;
  for (unsigned long mask = 0; mask < (1ul << bin.size()); ++mask) {
    std::vector<double> fixed(static_cast<std::size_t>(model.num_variables()), 0.0);
    double const_cost = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < bin.size(); ++k) {
      const double v = (mask >> k) & 1ul ? 1.0 : 0.0;
      const Variable& var = model.variables()[static_cast<std::size_t>(bin[k])];
      if (v < var.lower || v > var.upper) ok = false;
      fixed[static_cast<std::size_t>(bin[k])] = v;
      const_cost += model.objective()[static_cast<std::size_t>(bin[k])] * v;
    }
    if (!ok) continue;
    DenseLp lp;
    std::vector<int> local(static_cast<std::size_t>(model.num_variables()), -1);
    for (std::size_t k = 0; k < cont.size(); ++k) {
      local[static_cast<std::size_t>(cont[k])] = static_cast<int>(k);
      lp.c.push_back(model.objective()[static_cast<std::size_t>(cont[k])]);
      lp.upper.push_back(model.variables()[static_cast<std::size_t>(cont[k])].upper);
    }
    for (const Constraint& r : model.constraints()) {
      std::vector<double> row(cont.size(), 0.0);
      double rhs = r.rhs;
      for (const Term& t : r.terms) {
        const int l = local[static_cast<std::size_t>(t.var)];
        if (l >= 0) row[static_cast<std::size_t>(l)] += t.coef;
        else rhs -= t.coef * fixed[static_cast<std::size_t>(t.var)];
      }
      lp.a.push_back(row);
      lp.sense.push_back(r.sense);
      lp.b.push_back(rhs);
    }
    const auto v = solve_dense(lp);
    if (!v) continue;
    const double total = *v + const_cost;
    if (!best || total < *best) best = total;
  }
  return best;
}

}  // namespace gridstack::oracle
