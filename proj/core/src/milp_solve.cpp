#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <vector>

#include "gridstack/error.hpp"
#include "gridstack/milp.hpp"
#include "simplex.hpp"

namespace gridstack {

namespace {

using detail::Basis;
using detail::LpStatus;
using detail::SimplexOptions;
using detail::SimplexSolver;

SimplexOptions simplex_options(const SolverOptions& o) {
  SimplexOptions s;
  s.iteration_limit = o.iteration_limit;
  return s;
}

// One retry from the slack basis before giving up on a numerically stuck LP.
LpStatus robust_solve(SimplexSolver& lp) {
  try {
    return lp.solve();
  } catch (const NumericalFailure&) {
    lp.reset_basis();
    return lp.solve();
  }
}

struct Node {
  long id = 0;
  double bound = 0.0;
  std::vector<std::int8_t> fix;  // per binary: -1 free, 0 or 1 fixed
  std::shared_ptr<const Basis> basis;
  // How this node was created, for pseudocost updates.
  double parent_objective = 0.0;
  int branched = -1;
  int direction = 0;
  double distance = 0.0;
};

struct ByBound {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolverOptions& options, const StartHint& start)
      : model_(model), opt_(options), lp_(model, simplex_options(options)), start_(start) {
    for (int j = 0; j < model.num_variables(); ++j)
      if (model.variables()[static_cast<std::size_t>(j)].kind == VarKind::Binary) binaries_.push_back(j);
    pseudo_.resize(binaries_.size());
  }

  MilpSolution run() {
    Node root;
    root.id = next_id_++;
    root.fix.assign(binaries_.size(), -1);
    // Binaries whose model bounds already pin them.
    for (std::size_t b = 0; b < binaries_.size(); ++b) {
      const Variable& v = model_.variables()[static_cast<std::size_t>(binaries_[b])];
      if (v.lower > 0.5) root.fix[b] = 1;
      else if (v.upper < 0.5) root.fix[b] = 0;
    }
    root.bound = -kInf;

    const LpStatus st = solve_node(root);
    if (st == LpStatus::Infeasible) throw InfeasibleError("model is infeasible (LP relaxation has no solution)");
    if (st == LpStatus::Unbounded) throw UnboundedError("LP relaxation is unbounded");
    root_heuristics(root);
    process(std::move(root));

    long pops = 0;
    while (true) {
      // Best-bound phase: every few pops, plunge depth-first from the node
      // just taken so better incumbents turn up early.
      if (has_incumbent_ && !diving_ && !stack_.empty()) {
        for (Node& n : stack_) heap_.push(std::move(n));
        stack_.clear();
      }
      if (stack_.empty() && heap_.empty()) break;
      if (has_incumbent_ && gap_closed()) {
        stopped_by_gap_ = true;
        break;
      }
      Node node;
      if (!stack_.empty()) {
        node = std::move(stack_.back());
        stack_.pop_back();
      } else {
        node = heap_.top();
        heap_.pop();
        diving_ = has_incumbent_ && ++pops % kPlungeEvery == 0;
      }
      if (has_incumbent_ && prunable(node.bound)) {
        diving_ = false;
        continue;
      }
      if (++nodes_ > opt_.node_limit)
        throw NodeLimitExceeded("branch-and-bound node limit of " + std::to_string(opt_.node_limit) + " reached");
      if (solve_node(node) != LpStatus::Optimal) {
        diving_ = false;
        continue;
      }
      process(std::move(node));
    }

    if (!has_incumbent_) throw InfeasibleError("model is infeasible (no integer-feasible point exists)");
    return finish();
  }

 private:
  bool prunable(double bound) const {
    return bound >= incumbent_obj_ - 1e-9 * std::max(1.0, std::abs(incumbent_obj_));
  }

  double global_bound() const {
    double b = incumbent_obj_;
    if (!heap_.empty()) b = std::min(b, heap_.top().bound);
    for (const Node& n : stack_) b = std::min(b, n.bound);
    return b;
  }

  bool gap_closed() const {
    const double b = global_bound();
    return (incumbent_obj_ - b) / std::max(std::abs(incumbent_obj_), 1.0) <= opt_.rel_gap;
  }

  void apply_fixings(const std::vector<std::int8_t>& fix) {
    for (std::size_t b = 0; b < binaries_.size(); ++b) {
      const int j = binaries_[b];
      const double lo = fix[b] == 1 ? 1.0 : 0.0;
      const double hi = fix[b] == 0 ? 0.0 : 1.0;
      if (lp_.lower(j) != lo || lp_.upper(j) != hi) lp_.set_bounds(j, lo, hi);
    }
  }

  LpStatus solve_node(Node& node) {
    apply_fixings(node.fix);
    if (node.basis) lp_.set_basis(*node.basis);
    const LpStatus st = robust_solve(lp_);
    if (st == LpStatus::Optimal) node.bound = std::max(node.bound, lp_.objective());
    return st;
  }

  // Called with the node's LP solved and optimal in lp_.
  void process(Node node) {
    const double obj = lp_.objective();
    if (has_incumbent_ && prunable(obj)) {
      diving_ = false;
      return;
    }
    learn(node, obj);
    const std::vector<double> x = lp_.primal();

    std::vector<std::size_t> fractional;
    for (std::size_t b = 0; b < binaries_.size(); ++b) {
      const double v = x[static_cast<std::size_t>(binaries_[b])];
      if (std::min(v, 1.0 - v) > opt_.integrality_tol) fractional.push_back(b);
    }
    if (fractional.empty()) {
      offer(x, obj);
      diving_ = false;
      return;
    }

    auto basis = std::make_shared<const Basis>(lp_.basis());
    const Choice choice = choose(node, fractional, x, obj, *basis);
    const std::size_t branch = choice.binary;
    const double v = x[static_cast<std::size_t>(binaries_[branch])];
    const std::int8_t first = v >= 0.5 ? 1 : 0;
    // The rounding direction goes on top of the stack so it is explored next.
    for (std::int8_t dir : {static_cast<std::int8_t>(1 - first), first}) {
      const double child_bound = dir == 1 ? choice.up_bound : choice.down_bound;
      if (has_incumbent_ && prunable(child_bound)) continue;
      Node child;
      child.id = next_id_++;
      child.bound = std::max(obj, child_bound);
      child.parent_objective = obj;
      child.branched = static_cast<int>(branch);
      child.direction = dir;
      child.distance = dir == 1 ? 1.0 - v : v;
      child.fix = node.fix;
      child.fix[branch] = dir;
      child.basis = basis;
      if (!has_incumbent_ || (diving_ && dir == first)) stack_.push_back(std::move(child));
      else heap_.push(std::move(child));
    }
  }

  // Per-unit objective change of branching, averaged over observations.
  struct Pseudocost {
    double sum[2] = {0.0, 0.0};
    int count[2] = {0, 0};
  };

  struct Choice {
    std::size_t binary = 0;
    double down_bound = -kInf;
    double up_bound = -kInf;
  };

  void record(std::size_t b, int dir, double gain, double distance) {
    if (!std::isfinite(gain) || distance <= 0.0) return;
    Pseudocost& pc = pseudo_[b];
    pc.sum[dir] += std::max(gain, 0.0) / distance;
    ++pc.count[dir];
  }

  void learn(const Node& node, double obj) {
    if (node.branched >= 0)
      record(static_cast<std::size_t>(node.branched), node.direction, obj - node.parent_objective, node.distance);
  }

  double estimate(std::size_t b, int dir) const {
    const Pseudocost& pc = pseudo_[b];
    if (pc.count[dir] > 0) return pc.sum[dir] / pc.count[dir];
    double sum = 0.0;
    int n = 0;
    for (const Pseudocost& other : pseudo_)
      if (other.count[dir] > 0) {
        sum += other.sum[dir] / other.count[dir];
        ++n;
      }
    return n > 0 ? sum / n : 1.0;
  }

  static double score(double down, double up) {
    constexpr double eps = 1e-6;
    return std::max(down, eps) * std::max(up, eps);
  }

  // Objective of the LP with binary b pinned to `dir`, from `basis`.
  double probe(std::size_t b, int dir, const Node& node, const Basis& basis) {
    const int j = binaries_[b];
    const double lo = lp_.lower(j), hi = lp_.upper(j);
    lp_.set_bounds(j, dir, dir);
    lp_.set_basis(basis);
    double result = kInf;
    try {
      const LpStatus st = lp_.solve();
      if (st == LpStatus::Optimal) result = lp_.objective();
    } catch (const NumericalFailure&) {
      result = node.bound;  // unknown: no information
    }
    lp_.set_bounds(j, lo, hi);
    return result;
  }

  // Reliability branching: pseudocost scores, with candidates whose history
  // is thin probed by solving both children.
  Choice choose(const Node& node, const std::vector<std::size_t>& fractional, const std::vector<double>& x,
                double obj, const Basis& basis) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t b : fractional) {
      const double v = x[static_cast<std::size_t>(binaries_[b])];
      ranked.emplace_back(score(estimate(b, 0) * v, estimate(b, 1) * (1.0 - v)), b);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    Choice best;
    best.binary = ranked.front().second;
    double best_score = -1.0;
    int probes = 0;
    for (const auto& [pseudo_score, b] : ranked) {
      const Pseudocost& pc = pseudo_[b];
      const bool reliable = std::min(pc.count[0], pc.count[1]) >= kReliable;
      if (reliable || probes >= kMaxProbes) {
        if (pseudo_score > best_score) {
          best_score = pseudo_score;
          best = Choice{b, -kInf, -kInf};
        }
        continue;
      }
      ++probes;
      const double v = x[static_cast<std::size_t>(binaries_[b])];
      const double down = probe(b, 0, node, basis);
      const double up = probe(b, 1, node, basis);
      record(b, 0, down - obj, v);
      record(b, 1, up - obj, 1.0 - v);
      const double sc = score(std::isfinite(down) ? down - obj : 1e12, std::isfinite(up) ? up - obj : 1e12);
      if (sc > best_score) {
        best_score = sc;
        best = Choice{b, down, up};
      }
      // Both sides infeasible: the node is infeasible and either choice prunes it.
      if (!std::isfinite(down) && !std::isfinite(up)) break;
    }
    return best;
  }

  void offer(const std::vector<double>& x, double obj) {
    if (has_incumbent_ && obj >= incumbent_obj_) return;
    incumbent_ = x;
    incumbent_obj_ = obj;
    has_incumbent_ = true;
  }

  // Fixes the hinted binaries, rounds the others from the LP that leaves
  // them free and offers the result.
  void try_start(const Node& root) {
    std::vector<int> position(static_cast<std::size_t>(model_.num_variables()), -1);
    for (std::size_t b = 0; b < binaries_.size(); ++b) position[static_cast<std::size_t>(binaries_[b])] = static_cast<int>(b);
    std::vector<std::int8_t> fix = root.fix;
    for (const auto& [var, value] : start_) {
      if (var < 0 || var >= model_.num_variables()) continue;
      const int b = position[static_cast<std::size_t>(var)];
      if (b >= 0 && fix[static_cast<std::size_t>(b)] < 0) fix[static_cast<std::size_t>(b)] = value ? 1 : 0;
    }
    try {
      apply_fixings(fix);
      if (robust_solve(lp_) != LpStatus::Optimal) return;
      const std::vector<double> x = lp_.primal();
      bool rounded = false;
      for (std::size_t b = 0; b < binaries_.size(); ++b)
        if (fix[b] < 0) {
          fix[b] = x[static_cast<std::size_t>(binaries_[b])] >= 0.5 ? 1 : 0;
          rounded = true;
        }
      if (rounded) {
        apply_fixings(fix);
        if (robust_solve(lp_) != LpStatus::Optimal) return;
      }
      offer(lp_.primal(), lp_.objective());
    } catch (const NumericalFailure&) {
    }
  }

  // Round-and-fix at the root: the start hint, nearest rounding, then
  // rounding up. Each is a single LP over the continuous variables.
  void root_heuristics(const Node& root) {
    if (binaries_.empty()) return;
    const std::vector<double> x = lp_.primal();
    const Basis root_basis = lp_.basis();
    if (!start_.empty()) try_start(root);
    for (int mode = 0; mode < 2; ++mode) {
      std::vector<std::int8_t> fix = root.fix;
      bool integral = true;
      for (std::size_t b = 0; b < binaries_.size(); ++b) {
        const double v = x[static_cast<std::size_t>(binaries_[b])];
        if (std::min(v, 1.0 - v) > opt_.integrality_tol) integral = false;
        if (fix[b] >= 0) continue;
        fix[b] = static_cast<std::int8_t>(mode == 0 ? (v >= 0.5 ? 1 : 0) : (v > opt_.integrality_tol ? 1 : 0));
      }
      if (integral) break;
      apply_fixings(fix);
      try {
        if (robust_solve(lp_) == LpStatus::Optimal) offer(lp_.primal(), lp_.objective());
      } catch (const NumericalFailure&) {
      }
    }
    // Restore the root LP so branching sees it.
    apply_fixings(root.fix);
    lp_.set_basis(root_basis);
    robust_solve(lp_);
  }

  MilpSolution finish() {
    MilpSolution sol;
    const double bound = stopped_by_gap_ ? global_bound() : incumbent_obj_;

    // Polish: pin binaries at the incumbent and re-solve for clean continuous values.
    std::vector<std::int8_t> fix(binaries_.size());
    for (std::size_t b = 0; b < binaries_.size(); ++b)
      fix[b] = incumbent_[static_cast<std::size_t>(binaries_[b])] >= 0.5 ? 1 : 0;
    std::vector<double> values = incumbent_;
    if (!binaries_.empty()) {
      apply_fixings(fix);
      try {
        if (robust_solve(lp_) == LpStatus::Optimal) {
          std::vector<double> polished = lp_.primal();
          if (model_.evaluate(polished) <= incumbent_obj_ + 1e-9 * std::max(1.0, std::abs(incumbent_obj_)))
            values = std::move(polished);
        }
      } catch (const NumericalFailure&) {
      }
    }
    for (std::size_t b = 0; b < binaries_.size(); ++b)
      values[static_cast<std::size_t>(binaries_[b])] = fix[b];
    // Clip tiny bound excursions left by the tolerances.
    for (std::size_t j = 0; j < values.size(); ++j) {
      const Variable& v = model_.variables()[j];
      values[j] = std::clamp(values[j], v.lower, v.upper);
    }

    sol.values = std::move(values);
    sol.objective = model_.evaluate(sol.values);
    sol.best_bound = std::min(bound, sol.objective);
    sol.relative_gap = std::max(0.0, (sol.objective - sol.best_bound) / std::max(std::abs(sol.objective), 1.0));
    sol.status = stopped_by_gap_ && sol.relative_gap > 0.0 ? SolveStatus::GapReached : SolveStatus::Optimal;
    sol.nodes = nodes_;
    sol.lp_iterations = lp_.iterations();
    return sol;
  }

  const MilpModel& model_;
  SolverOptions opt_;
  SimplexSolver lp_;
  StartHint start_;
  std::vector<int> binaries_;

  std::vector<Node> stack_;
  std::priority_queue<Node, std::vector<Node>, ByBound> heap_;
  long next_id_ = 0;
  long nodes_ = 1;

  static constexpr long kPlungeEvery = 16;
  static constexpr int kReliable = 2;
  static constexpr int kMaxProbes = 8;
  std::vector<Pseudocost> pseudo_;
  bool diving_ = false;
  bool has_incumbent_ = false;
  bool stopped_by_gap_ = false;
  double incumbent_obj_ = kInf;
  std::vector<double> incumbent_;
};

}  // namespace

MilpSolution solve_lp(const MilpModel& model, const SolverOptions& options) {
  SimplexSolver lp(model, simplex_options(options));
  MilpSolution sol;
  switch (robust_solve(lp)) {
    case LpStatus::Optimal:
      sol.status = SolveStatus::Optimal;
      sol.values = lp.primal();
      sol.objective = lp.objective();
      sol.best_bound = sol.objective;
      break;
    case LpStatus::Infeasible: sol.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded: sol.status = SolveStatus::Unbounded; break;
  }
  sol.lp_iterations = lp.iterations();
  return sol;
}

MilpSolution solve_milp(const MilpModel& model, const SolverOptions& options) {
  return solve_milp(model, options, StartHint{});
}

MilpSolution solve_milp(const MilpModel& model, const SolverOptions& options, const StartHint& start) {
  if (!(options.rel_gap >= 0.0)) throw ModelBuildError("relative gap must be non-negative");
  BranchAndBound bb(model, options, start);
  return bb.run();
}

MilpSolution solve_milp(const MilpModel& model, double rel_gap) {
  SolverOptions o;
  o.rel_gap = rel_gap;
  return solve_milp(model, o);
}

}  // namespace gridstack
