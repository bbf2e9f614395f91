#include "simplex.hpp"

#include <algorithm>
#include <cmath>

#include "gridstack/error.hpp"

namespace gridstack::detail {

// ---------------------------------------------------------------------------
// BasisFactor

bool BasisFactor::factorize(int m, const std::vector<Eigen::Triplet<double>>& entries) {
  m_ = m;
  etas_.clear();
  if (m == 0) return true;
  Eigen::SparseMatrix<double> b(m, m);
  b.setFromTriplets(entries.begin(), entries.end());
  b.makeCompressed();
  lu_.analyzePattern(b);
  lu_.factorize(b);
  return lu_.info() == Eigen::Success;
}

void BasisFactor::ftran(std::vector<double>& v) const {
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> in(v.data(), m_);
  Eigen::VectorXd y = lu_.solve(in);
  in = y;
  for (const Eta& e : etas_) {
    const double xr = v[static_cast<std::size_t>(e.row)];
    if (xr == 0.0) continue;
    v[static_cast<std::size_t>(e.row)] = e.pivot * xr;
    for (std::size_t k = 0; k < e.index.size(); ++k) v[static_cast<std::size_t>(e.index[k])] += e.value[k] * xr;
  }
}

void BasisFactor::btran(std::vector<double>& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = it->pivot * v[static_cast<std::size_t>(it->row)];
    for (std::size_t k = 0; k < it->index.size(); ++k) s += it->value[k] * v[static_cast<std::size_t>(it->index[k])];
    v[static_cast<std::size_t>(it->row)] = s;
  }
  Eigen::Map<Eigen::VectorXd> in(v.data(), m_);
  Eigen::VectorXd y = lu_.transpose().solve(in);
  in = y;
}

void BasisFactor::update(int row, const std::vector<double>& alpha) {
  Eta e;
  e.row = row;
  const double ar = alpha[static_cast<std::size_t>(row)];
  e.pivot = 1.0 / ar;
  for (int i = 0; i < m_; ++i) {
    if (i == row) continue;
    const double a = alpha[static_cast<std::size_t>(i)];
    if (std::abs(a) > 1e-13) {
      e.index.push_back(i);
      e.value.push_back(-a / ar);
    }
  }
  etas_.push_back(std::move(e));
}

// ---------------------------------------------------------------------------
// SimplexSolver

namespace {
constexpr double kHuge = 1e30;
}

SimplexSolver::SimplexSolver(const MilpModel& model, SimplexOptions options) : opt_(options) {
  n_ = model.num_variables();
  m_ = model.num_constraints();
  const int total = n_ + m_;

  // Row-major terms transposed into CSC.
  std::vector<int> counts(static_cast<std::size_t>(n_) + 1, 0);
  for (const Constraint& r : model.constraints())
    for (const Term& t : r.terms) ++counts[static_cast<std::size_t>(t.var) + 1];
  col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[static_cast<std::size_t>(j) + 1] = col_start_[static_cast<std::size_t>(j)] + counts[static_cast<std::size_t>(j) + 1];
  row_index_.resize(static_cast<std::size_t>(col_start_.back()));
  value_.resize(row_index_.size());
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : model.constraints()[static_cast<std::size_t>(i)].terms) {
      const int k = fill[static_cast<std::size_t>(t.var)]++;
      row_index_[static_cast<std::size_t>(k)] = i;
      value_[static_cast<std::size_t>(k)] = t.coef;
    }
  }

  lb_.resize(static_cast<std::size_t>(total));
  ub_.resize(static_cast<std::size_t>(total));
  cost_.assign(static_cast<std::size_t>(total), 0.0);
  for (int j = 0; j < n_; ++j) {
    const Variable& v = model.variables()[static_cast<std::size_t>(j)];
    lb_[static_cast<std::size_t>(j)] = v.lower;
    ub_[static_cast<std::size_t>(j)] = v.upper;
    cost_[static_cast<std::size_t>(j)] = model.objective()[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < m_; ++i) {
    const Constraint& r = model.constraints()[static_cast<std::size_t>(i)];
    const auto k = static_cast<std::size_t>(n_ + i);
    switch (r.sense) {
      case Sense::LessEqual: lb_[k] = -kInf; ub_[k] = r.rhs; break;
      case Sense::GreaterEqual: lb_[k] = r.rhs; ub_[k] = kInf; break;
      case Sense::Equal: lb_[k] = r.rhs; ub_[k] = r.rhs; break;
    }
  }
  if (opt_.iteration_limit <= 0) opt_.iteration_limit = std::max<long>(20000, 50L * total);
  x_.assign(static_cast<std::size_t>(total), 0.0);
  d_.assign(static_cast<std::size_t>(total), 0.0);
  reset_basis();
}

template <typename F>
void SimplexSolver::for_each_nz(int j, F&& f) const {
  if (j < n_) {
    for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k)
      f(row_index_[static_cast<std::size_t>(k)], value_[static_cast<std::size_t>(k)]);
  } else {
    f(j - n_, -1.0);
  }
}

double SimplexSolver::dot_column(int j, const std::vector<double>& v) const {
  double s = 0.0;
  for_each_nz(j, [&](int i, double a) { s += a * v[static_cast<std::size_t>(i)]; });
  return s;
}

void SimplexSolver::load_column(int j, std::vector<double>& out) const {
  out.assign(static_cast<std::size_t>(m_), 0.0);
  for_each_nz(j, [&](int i, double a) { out[static_cast<std::size_t>(i)] = a; });
}

void SimplexSolver::place_nonbasic(int j) {
  const auto k = static_cast<std::size_t>(j);
  const bool lo = std::isfinite(lb_[k]);
  const bool hi = std::isfinite(ub_[k]);
  if (lo && hi) {
    status_[k] = (cost_[k] < 0.0 && lb_[k] != ub_[k]) ? VarStatus::AtUpper : VarStatus::AtLower;
  } else if (lo) {
    status_[k] = VarStatus::AtLower;
  } else if (hi) {
    status_[k] = VarStatus::AtUpper;
  } else {
    status_[k] = VarStatus::AtZero;
  }
}

void SimplexSolver::reset_basis() {
  const int total = n_ + m_;
  status_.assign(static_cast<std::size_t>(total), VarStatus::AtLower);
  pos_.assign(static_cast<std::size_t>(total), -1);
  head_.assign(static_cast<std::size_t>(m_), 0);
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  for (int i = 0; i < m_; ++i) {
    head_[static_cast<std::size_t>(i)] = n_ + i;
    status_[static_cast<std::size_t>(n_ + i)] = VarStatus::Basic;
    pos_[static_cast<std::size_t>(n_ + i)] = i;
  }
  dse_.assign(static_cast<std::size_t>(m_), 1.0);
  factor_valid_ = false;
}

void SimplexSolver::set_basis(const Basis& basis) {
  status_ = basis.status;
  head_ = basis.head;
  pos_.assign(status_.size(), -1);
  for (int i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = i;
  // A nonbasic column may sit at a bound that no longer exists.
  for (std::size_t j = 0; j < status_.size(); ++j) {
    if (status_[j] == VarStatus::Basic) continue;
    if ((status_[j] == VarStatus::AtLower && !std::isfinite(lb_[j])) ||
        (status_[j] == VarStatus::AtUpper && !std::isfinite(ub_[j])) ||
        (status_[j] == VarStatus::AtZero && (std::isfinite(lb_[j]) || std::isfinite(ub_[j]))))
      place_nonbasic(static_cast<int>(j));
  }
  dse_.assign(static_cast<std::size_t>(m_), 1.0);
  factor_valid_ = false;
}

void SimplexSolver::set_bounds(int j, double lower, double upper) {
  const auto k = static_cast<std::size_t>(j);
  lb_[k] = lower;
  ub_[k] = upper;
  if (status_[k] == VarStatus::AtLower && !std::isfinite(lower)) place_nonbasic(j);
  if (status_[k] == VarStatus::AtUpper && !std::isfinite(upper)) place_nonbasic(j);
}

void SimplexSolver::refactor() {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(m_) * 3);
  for (int i = 0; i < m_; ++i)
    for_each_nz(head_[static_cast<std::size_t>(i)], [&](int r, double a) { entries.emplace_back(r, i, a); });
  if (!factor_.factorize(m_, entries)) {
    // Singular basis: fall back to the slack basis, which is always regular.
    reset_basis();
    entries.clear();
    for (int i = 0; i < m_; ++i) entries.emplace_back(i, i, -1.0);
    if (!factor_.factorize(m_, entries)) throw NumericalFailure("cannot factorize the slack basis");
  }
  factor_valid_ = true;
}

void SimplexSolver::compute_primal() {
  std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    const auto k = static_cast<std::size_t>(j);
    switch (status_[k]) {
      case VarStatus::Basic: continue;
      case VarStatus::AtLower: x_[k] = lb_[k]; break;
      case VarStatus::AtUpper: x_[k] = ub_[k]; break;
      case VarStatus::AtZero: x_[k] = 0.0; break;
    }
    if (x_[k] != 0.0) for_each_nz(j, [&](int i, double a) { rhs[static_cast<std::size_t>(i)] -= a * x_[k]; });
  }
  factor_.ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = rhs[static_cast<std::size_t>(i)];
}

void SimplexSolver::compute_duals() {
  std::vector<double> y(static_cast<std::size_t>(m_));
  for (int i = 0; i < m_; ++i) y[static_cast<std::size_t>(i)] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
  factor_.btran(y);
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    const auto k = static_cast<std::size_t>(j);
    d_[k] = status_[k] == VarStatus::Basic ? 0.0 : cost_[k] - dot_column(j, y);
  }
}

bool SimplexSolver::dual_feasible() const {
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (lb_[k] == ub_[k]) continue;
    switch (status_[k]) {
      case VarStatus::Basic: break;
      case VarStatus::AtLower: if (d_[k] < -opt_.dual_tol) return false; break;
      case VarStatus::AtUpper: if (d_[k] > opt_.dual_tol) return false; break;
      case VarStatus::AtZero: if (std::abs(d_[k]) > opt_.dual_tol) return false; break;
    }
  }
  return true;
}

double SimplexSolver::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int j : head_) {
    const auto k = static_cast<std::size_t>(j);
    worst = std::max({worst, lb_[k] - x_[k], x_[k] - ub_[k]});
  }
  return worst;
}

void SimplexSolver::tick() {
  ++iterations_;
  if (++solve_iterations_ > opt_.iteration_limit)
    throw NumericalFailure("simplex iteration limit reached (" + std::to_string(opt_.iteration_limit) + ")");
}

LpStatus SimplexSolver::solve() {
  solve_iterations_ = 0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    refactor();
    compute_primal();
    compute_duals();
    LpStatus st;
    if (dual_feasible()) {
      st = dual_loop();
      if (st == LpStatus::Infeasible) return st;
    } else {
      st = primal_loop();
      if (st != LpStatus::Optimal) return st;
    }
    // Verify on a fresh factorization before reporting optimality.
    refactor();
    compute_primal();
    compute_duals();
    if (max_primal_infeasibility() <= 10 * opt_.primal_tol && dual_feasible()) return LpStatus::Optimal;
    if (max_primal_infeasibility() <= 10 * opt_.primal_tol) {
      st = primal_loop();
      if (st != LpStatus::Optimal) return st;
      refactor();
      compute_primal();
      compute_duals();
      if (max_primal_infeasibility() <= 10 * opt_.primal_tol) return LpStatus::Optimal;
    }
  }
  throw NumericalFailure("simplex could not reach a verified optimum");
}

LpStatus SimplexSolver::dual_loop() {
  const int total = n_ + m_;
  std::vector<double> rho, alpha_row(static_cast<std::size_t>(total), 0.0), aq, tau;
  for (;;) {
    tick();
    if (factor_.updates() >= opt_.refactor_interval) {
      refactor();
      compute_primal();
      compute_duals();
    }

    // Leaving row: largest squared infeasibility over the edge weight.
    int r = -1;
    double best = 0.0;
    for (int i = 0; i < m_; ++i) {
      const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
      double infeas = 0.0;
      if (x_[k] < lb_[k] - opt_.primal_tol) {
        infeas = lb_[k] - x_[k];
      } else if (x_[k] > ub_[k] + opt_.primal_tol) {
        infeas = x_[k] - ub_[k];
      } else {
        continue;
      }
      const double score = infeas * infeas / dse_[static_cast<std::size_t>(i)];
      if (score > best) {
        best = score;
        r = i;
      }
    }
    if (r < 0) return LpStatus::Optimal;

    const int p = head_[static_cast<std::size_t>(r)];
    const auto pk = static_cast<std::size_t>(p);
    const bool to_lower = x_[pk] < lb_[pk];

    rho.assign(static_cast<std::size_t>(m_), 0.0);
    rho[static_cast<std::size_t>(r)] = 1.0;
    factor_.btran(rho);

    // Harris two-pass ratio test over the pivot row.
    double theta_max = kHuge;
    for (int j = 0; j < total; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (status_[k] == VarStatus::Basic || lb_[k] == ub_[k]) {
        alpha_row[k] = 0.0;
        continue;
      }
      const double a = dot_column(j, rho);
      alpha_row[k] = a;
      const double ar = to_lower ? -a : a;
      if (std::abs(ar) < opt_.pivot_tol) continue;
      double bound = kHuge;
      if (status_[k] == VarStatus::AtLower && ar > 0) {
        bound = (d_[k] + opt_.dual_tol) / ar;
      } else if (status_[k] == VarStatus::AtUpper && ar < 0) {
        bound = (d_[k] - opt_.dual_tol) / ar;
      } else if (status_[k] == VarStatus::AtZero) {
        bound = (std::abs(d_[k]) + opt_.dual_tol) / std::abs(ar);
      }
      theta_max = std::min(theta_max, bound);
    }
    if (theta_max >= kHuge) return LpStatus::Infeasible;

    int q = -1;
    double best_alpha = 0.0;
    for (int j = 0; j < total; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (status_[k] == VarStatus::Basic || lb_[k] == ub_[k]) continue;
      const double ar = to_lower ? -alpha_row[k] : alpha_row[k];
      if (std::abs(ar) < opt_.pivot_tol) continue;
      double ratio;
      if (status_[k] == VarStatus::AtLower && ar > 0) {
        ratio = d_[k] / ar;
      } else if (status_[k] == VarStatus::AtUpper && ar < 0) {
        ratio = d_[k] / ar;
      } else if (status_[k] == VarStatus::AtZero) {
        ratio = std::abs(d_[k]) / std::abs(ar);
      } else {
        continue;
      }
      if (ratio <= theta_max && std::abs(ar) > best_alpha) {
        best_alpha = std::abs(ar);
        q = j;
      }
    }
    if (q < 0) return LpStatus::Infeasible;
    const auto qk = static_cast<std::size_t>(q);

    load_column(q, aq);
    factor_.ftran(aq);
    const double pivot = aq[static_cast<std::size_t>(r)];
    if (std::abs(pivot) < opt_.pivot_tol ||
        std::abs(pivot - alpha_row[qk]) > 1e-6 * (1.0 + std::abs(pivot))) {
      // Row and column disagree: the eta file has drifted.
      if (factor_.updates() == 0) throw NumericalFailure("unstable pivot in dual simplex");
      refactor();
      compute_primal();
      compute_duals();
      continue;
    }

    tau = rho;
    factor_.ftran(tau);

    // Dual step; a slightly wrong-signed d_q from the Harris pass means no step.
    double theta_d = d_[qk] / pivot;
    if ((to_lower && theta_d > 0) || (!to_lower && theta_d < 0)) theta_d = 0.0;
    for (int j = 0; j < total; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (status_[k] != VarStatus::Basic && alpha_row[k] != 0.0) d_[k] -= theta_d * alpha_row[k];
    }
    d_[pk] = -theta_d;
    d_[qk] = 0.0;

    const double target = to_lower ? lb_[pk] : ub_[pk];
    const double theta_p = (x_[pk] - target) / pivot;
    for (int i = 0; i < m_; ++i) {
      const double a = aq[static_cast<std::size_t>(i)];
      if (a != 0.0) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= theta_p * a;
    }
    x_[qk] += theta_p;
    x_[pk] = target;

    const double wr = dse_[static_cast<std::size_t>(r)];
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double a = aq[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const double ratio = a / pivot;
      auto& w = dse_[static_cast<std::size_t>(i)];
      w = std::max(w - 2.0 * ratio * tau[static_cast<std::size_t>(i)] + ratio * ratio * wr, 1e-6);
    }
    dse_[static_cast<std::size_t>(r)] = std::max(wr / (pivot * pivot), 1e-6);

    status_[pk] = (to_lower || lb_[pk] == ub_[pk]) ? VarStatus::AtLower : VarStatus::AtUpper;
    pos_[pk] = -1;
    head_[static_cast<std::size_t>(r)] = q;
    status_[qk] = VarStatus::Basic;
    pos_[qk] = r;
    factor_.update(r, aq);
  }
}

LpStatus SimplexSolver::primal_loop() {
  const int total = n_ + m_;
  std::vector<double> y, aq;
  dse_.assign(static_cast<std::size_t>(m_), 1.0);
  int degenerate_run = 0;
  for (;;) {
    tick();
    if (factor_.updates() >= opt_.refactor_interval) {
      refactor();
      compute_primal();
    }

    // Composite objective: sum of infeasibilities while any basic is out of
    // bounds, the true costs afterwards.
    y.assign(static_cast<std::size_t>(m_), 0.0);
    bool phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
      if (x_[k] < lb_[k] - opt_.primal_tol) {
        y[static_cast<std::size_t>(i)] = -1.0;
        phase1 = true;
      } else if (x_[k] > ub_[k] + opt_.primal_tol) {
        y[static_cast<std::size_t>(i)] = 1.0;
        phase1 = true;
      }
    }
    if (!phase1)
      for (int i = 0; i < m_; ++i) y[static_cast<std::size_t>(i)] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
    factor_.btran(y);

    // Dantzig pricing; after a long degenerate run fall back to the lowest
    // eligible index, which cannot cycle.
    const bool bland = degenerate_run > 50;
    int q = -1;
    double best = 0.0;
    for (int j = 0; j < total; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (status_[k] == VarStatus::Basic || lb_[k] == ub_[k]) continue;
      const double dj = (phase1 ? 0.0 : cost_[k]) - dot_column(j, y);
      d_[k] = dj;
      bool eligible = false;
      switch (status_[k]) {
        case VarStatus::AtLower: eligible = dj < -opt_.dual_tol; break;
        case VarStatus::AtUpper: eligible = dj > opt_.dual_tol; break;
        case VarStatus::AtZero: eligible = std::abs(dj) > opt_.dual_tol; break;
        case VarStatus::Basic: break;
      }
      if (!eligible) continue;
      if (bland) {
        q = j;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        q = j;
      }
    }
    if (q < 0) {
      if (phase1) return LpStatus::Infeasible;
      compute_duals();
      return LpStatus::Optimal;
    }
    const auto qk = static_cast<std::size_t>(q);
    const double dir = d_[qk] < 0 ? 1.0 : -1.0;

    load_column(q, aq);
    factor_.ftran(aq);

    // Harris ratio test. Basics outside their bounds stop when they reach the
    // violated bound.
    double theta_max = kHuge;
    for (int i = 0; i < m_; ++i) {
      const double a = aq[static_cast<std::size_t>(i)];
      if (std::abs(a) < opt_.pivot_tol) continue;
      const double rate = -dir * a;
      const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
      double limit = kHuge;
      if (x_[k] < lb_[k] - opt_.primal_tol) {
        if (rate > 0) limit = (lb_[k] - x_[k]) / rate;
      } else if (x_[k] > ub_[k] + opt_.primal_tol) {
        if (rate < 0) limit = (x_[k] - ub_[k]) / -rate;
      } else if (rate < 0 && std::isfinite(lb_[k])) {
        limit = (x_[k] - lb_[k] + opt_.primal_tol) / -rate;
      } else if (rate > 0 && std::isfinite(ub_[k])) {
        limit = (ub_[k] - x_[k] + opt_.primal_tol) / rate;
      }
      theta_max = std::min(theta_max, limit);
    }
    const double flip = (std::isfinite(lb_[qk]) && std::isfinite(ub_[qk])) ? ub_[qk] - lb_[qk] : kHuge;
    if (theta_max >= kHuge && flip >= kHuge) {
      if (phase1) throw NumericalFailure("unbounded ray during primal phase 1");
      return LpStatus::Unbounded;
    }

    int r = -1;
    double step = 0.0;
    bool r_to_lower = true;
    if (flip <= theta_max) {
      step = flip;
    } else {
      double best_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = aq[static_cast<std::size_t>(i)];
        if (std::abs(a) < opt_.pivot_tol) continue;
        const double rate = -dir * a;
        const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
        double exact = kHuge;
        bool lower_side = true;
        if (x_[k] < lb_[k] - opt_.primal_tol) {
          if (rate > 0) exact = (lb_[k] - x_[k]) / rate;
        } else if (x_[k] > ub_[k] + opt_.primal_tol) {
          if (rate < 0) {
            exact = (x_[k] - ub_[k]) / -rate;
            lower_side = false;
          }
        } else if (rate < 0 && std::isfinite(lb_[k])) {
          exact = (x_[k] - lb_[k]) / -rate;
        } else if (rate > 0 && std::isfinite(ub_[k])) {
          exact = (ub_[k] - x_[k]) / rate;
          lower_side = false;
        }
        if (exact <= theta_max && std::abs(a) > best_alpha) {
          best_alpha = std::abs(a);
          r = i;
          step = std::max(0.0, exact);
          r_to_lower = lower_side;
        }
      }
      if (r < 0) throw NumericalFailure("primal ratio test found no pivot");
    }

    degenerate_run = step <= opt_.primal_tol ? degenerate_run + 1 : 0;

    for (int i = 0; i < m_; ++i) {
      const double a = aq[static_cast<std::size_t>(i)];
      if (a != 0.0) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= dir * step * a;
    }
    x_[qk] += dir * step;

    if (r < 0) {
      status_[qk] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[qk] = dir > 0 ? ub_[qk] : lb_[qk];
      continue;
    }
    const int p = head_[static_cast<std::size_t>(r)];
    const auto pk = static_cast<std::size_t>(p);
    x_[pk] = r_to_lower ? lb_[pk] : ub_[pk];
    status_[pk] = (r_to_lower || lb_[pk] == ub_[pk]) ? VarStatus::AtLower : VarStatus::AtUpper;
    pos_[pk] = -1;
    head_[static_cast<std::size_t>(r)] = q;
    status_[qk] = VarStatus::Basic;
    pos_[qk] = r;
    factor_.update(r, aq);
  }
}

double SimplexSolver::objective() const {
  double f = 0.0;
  for (int j = 0; j < n_; ++j) f += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  return f;
}

std::vector<double> SimplexSolver::primal() const {
  return {x_.begin(), x_.begin() + n_};
}

}  // namespace gridstack::detail
