#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gridstack {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// Mixed-integer linear program in minimization form. Every mutation checks
/// the invariants (known variable indices, lower <= upper, binaries inside
/// [0, 1]) and throws ModelBuildError when one is violated.
class MilpModel {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper, double cost = 0.0);
  int add_continuous(std::string name, double lower, double upper, double cost = 0.0) {
    return add_variable(std::move(name), VarKind::Continuous, lower, upper, cost);
  }
  int add_binary(std::string name, double cost = 0.0) {
    return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0, cost);
  }

  int add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

  void set_bounds(int var, double lower, double upper);
  void set_cost(int var, double cost);
  void add_cost(int var, double cost);

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return cost_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;

  /// Evaluates the objective at a point.
  double evaluate(const std::vector<double>& x) const;
  /// Largest violation of any row or bound at `x` (0 when feasible).
  double max_violation(const std::vector<double>& x) const;

 private:
  void check_var(int var) const;

  std::vector<Variable> vars_;
  std::vector<double> cost_;
  std::vector<Constraint> rows_;
};

enum class SolveStatus { Optimal, GapReached, Infeasible, Unbounded };

const char* to_string(SolveStatus s);

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> values;
  double relative_gap = 0.0;
  double best_bound = 0.0;
  long nodes = 0;
  long lp_iterations = 0;

  bool has_values() const { return status == SolveStatus::Optimal || status == SolveStatus::GapReached; }
  double value(int var) const { return values.at(static_cast<std::size_t>(var)); }
};

struct SolverOptions {
  double rel_gap = 1e-3;
  long node_limit = 1'000'000;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-6;
  /// Simplex iteration cap per LP; 0 picks a size-dependent default.
  long iteration_limit = 0;
};

/// Solves the LP relaxation (binaries relaxed to [0, 1]). Infeasible and
/// unbounded models come back with the matching status. Throws
/// NumericalFailure when the simplex engine cannot finish.
MilpSolution solve_lp(const MilpModel& model, const SolverOptions& options = {});

/// Branch-and-bound on the binaries until
/// (incumbent - best_bound) / max(|incumbent|, 1) <= rel_gap.
/// Throws InfeasibleError, UnboundedError or NodeLimitExceeded.
MilpSolution solve_milp(const MilpModel& model, const SolverOptions& options = {});
MilpSolution solve_milp(const MilpModel& model, double rel_gap);

/// Suggested values (variable, 0 or 1) for some binaries.
using StartHint = std::vector<std::pair<int, int>>;

/// As above, first trying `start` as an incumbent: hinted binaries are fixed,
/// the rest rounded from the resulting LP. A hint that leads nowhere is
/// ignored.
MilpSolution solve_milp(const MilpModel& model, const SolverOptions& options, const StartHint& start);

/// Writes the model in CPLEX LP text format for cross-checking.
void write_lp(std::ostream& out, const MilpModel& model);

}  // namespace gridstack
