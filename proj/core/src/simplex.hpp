#pragma once

// Bounded revised simplex over a sparse LU basis factorization. Used by
// solve_lp and as the node solver inside branch-and-bound.

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "gridstack/milp.hpp"

namespace gridstack::detail {

enum class VarStatus : std::int8_t { Basic, AtLower, AtUpper, AtZero };

struct Basis {
  std::vector<VarStatus> status;  // structurals then row logicals
  std::vector<int> head;          // basic column per row position
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct SimplexOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  double pivot_tol = 1e-9;
  long iteration_limit = 0;  // 0: derived from problem size
  int refactor_interval = 80;
};

/// B^{-1} as a sparse LU of the last refactorized basis plus a product-form
/// eta file for the updates since.
class BasisFactor {
 public:
  bool factorize(int m, const std::vector<Eigen::Triplet<double>>& entries);
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void update(int row, const std::vector<double>& alpha);
  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int row = 0;
    double pivot = 0.0;
    std::vector<int> index;
    std::vector<double> value;
  };

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;  // transpose() is non-const
  std::vector<Eta> etas_;
  int m_ = 0;
};

/// Columns are the structural variables followed by one logical per row:
/// row i reads a_i x - s_i = 0 with s_i bounded by the row sense.
class SimplexSolver {
 public:
  SimplexSolver(const MilpModel& model, SimplexOptions options = {});

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }

  void set_bounds(int j, double lower, double upper);
  double lower(int j) const { return lb_[static_cast<std::size_t>(j)]; }
  double upper(int j) const { return ub_[static_cast<std::size_t>(j)]; }

  /// Solves from the current basis. Dual simplex when the basis is dual
  /// feasible, composite primal simplex otherwise.
  LpStatus solve();

  Basis basis() const { return {status_, head_}; }
  void set_basis(const Basis& basis);
  void reset_basis();

  double objective() const;
  std::vector<double> primal() const;
  double reduced_cost(int j) const { return d_[static_cast<std::size_t>(j)]; }
  long iterations() const { return iterations_; }

 private:
  template <typename F>
  void for_each_nz(int j, F&& f) const;
  double dot_column(int j, const std::vector<double>& v) const;
  void load_column(int j, std::vector<double>& out) const;

  void refactor();
  void compute_primal();
  void compute_duals();
  bool dual_feasible() const;
  double max_primal_infeasibility() const;
  void place_nonbasic(int j);

  LpStatus dual_loop();
  LpStatus primal_loop();
  void tick();

  int n_ = 0;
  int m_ = 0;
  std::vector<int> col_start_;
  std::vector<int> row_index_;
  std::vector<double> value_;

  std::vector<double> lb_, ub_, cost_;
  std::vector<double> x_, d_;
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<double> dse_;

  BasisFactor factor_;
  bool factor_valid_ = false;
  SimplexOptions opt_;
  long iterations_ = 0;
  long solve_iterations_ = 0;
};

}  // namespace gridstack::detail
