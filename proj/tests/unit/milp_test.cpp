#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gridstack/error.hpp"
#include "gridstack/milp.hpp"

using namespace gridstack;

namespace {

TEST(Lp, SingleLowerBoundRow) {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf, 1.0);
  m.add_constraint("c", {{x, 1.0}}, Sense::GreaterEqual, 3.0);
  const MilpSolution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 3.0, 1e-9);
  EXPECT_NEAR(s.value(x), 3.0, 1e-9);
}

TEST(Lp, SharedBudget) {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf, -1.0);
  const int y = m.add_continuous("y", 0.0, kInf, -1.0);
  m.add_constraint("c", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 1.0);
  const MilpSolution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -1.0, 1e-9);
}

TEST(Lp, DetectsInfeasibility) {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 1.0, 1.0);
  m.add_constraint("c", {{x, 1.0}}, Sense::GreaterEqual, 2.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Infeasible);
  EXPECT_THROW(solve_milp(m), InfeasibleError);
}

TEST(Lp, DetectsUnboundedness) {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf, -1.0);
  const int y = m.add_continuous("y", 0.0, kInf, 0.0);
  m.add_constraint("c", {{x, 1.0}, {y, -1.0}}, Sense::LessEqual, 1.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Unbounded);
  EXPECT_THROW(solve_milp(m), UnboundedError);
}

TEST(Lp, FreeVariablesAndEqualities) {
  // min x + 2y  s.t. x - y = 1, x + y >= 3, y free
  MilpModel m;
  const int x = m.add_continuous("x", -kInf, kInf, 1.0);
  const int y = m.add_continuous("y", -kInf, kInf, 2.0);
  m.add_constraint("e", {{x, 1.0}, {y, -1.0}}, Sense::Equal, 1.0);
  m.add_constraint("g", {{x, 1.0}, {y, 1.0}}, Sense::GreaterEqual, 3.0);
  const MilpSolution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.value(x), 2.0, 1e-9);
  EXPECT_NEAR(s.value(y), 1.0, 1e-9);
  EXPECT_NEAR(s.objective, 4.0, 1e-9);
}

TEST(Milp, SmallKnapsack) {
  // max 3a + 2b + 4c  s.t. 2a + b + 3c <= 4 ; best is a + c? weight 5 > 4, so b + c = 6
  MilpModel m;
  const int a = m.add_binary("a", -3.0);
  const int b = m.add_binary("b", -2.0);
  const int c = m.add_binary("c", -4.0);
  m.add_constraint("w", {{a, 2.0}, {b, 1.0}, {c, 3.0}}, Sense::LessEqual, 4.0);
  const MilpSolution s = solve_milp(m, 0.0);
  EXPECT_NEAR(s.objective, -6.0, 1e-9);
  EXPECT_EQ(s.value(a), 0.0);
  EXPECT_EQ(s.value(b), 1.0);
  EXPECT_EQ(s.value(c), 1.0);
}

// Independent oracle: enumerate every binary assignment and solve the
// remaining continuous LP, which here has a single variable per row.
TEST(Milp, RandomKnapsacksMatchEnumeration) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> w(1, 20);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 9;
    MilpModel m;
    std::vector<int> value(static_cast<std::size_t>(n)), weight(static_cast<std::size_t>(n));
    std::vector<Term> row;
    for (int i = 0; i < n; ++i) {
      value[static_cast<std::size_t>(i)] = w(rng);
      weight[static_cast<std::size_t>(i)] = w(rng);
      m.add_binary("x" + std::to_string(i), -value[static_cast<std::size_t>(i)]);
      row.push_back({i, static_cast<double>(weight[static_cast<std::size_t>(i)])});
    }
    const int cap = 5 * n;
    m.add_constraint("cap", row, Sense::LessEqual, cap);
    int best = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      int v = 0, wt = 0;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1u) {
          v += value[static_cast<std::size_t>(i)];
          wt += weight[static_cast<std::size_t>(i)];
        }
      if (wt <= cap) best = std::max(best, v);
    }
    const MilpSolution s = solve_milp(m, 0.0);
    EXPECT_NEAR(s.objective, -best, 1e-9) << "trial " << trial;
    EXPECT_LE(m.max_violation(s.values), 1e-9);
  }
}

TEST(Milp, GapIsReportedAndRespected) {
  MilpModel m;
  std::vector<Term> row;
  for (int i = 0; i < 10; ++i) {
    m.add_binary("x" + std::to_string(i), -(10.0 + i));
    row.push_back({i, 7.0 + (i * 3) % 5});
  }
  m.add_constraint("cap", row, Sense::LessEqual, 31.0);
  const MilpSolution loose = solve_milp(m, 0.05);
  const MilpSolution tight = solve_milp(m, 0.0);
  EXPECT_LE(loose.relative_gap, 0.05 + 1e-12);
  EXPECT_GE(loose.objective, tight.objective - 1e-9);
  EXPECT_LE((loose.objective - tight.objective) / std::abs(tight.objective), 0.05 + 1e-12);
}

TEST(Milp, NodeLimitThrows) {
  MilpModel m;
  std::vector<Term> row;
  for (int i = 0; i < 12; ++i) {
    m.add_binary("x" + std::to_string(i), -1.0 - 0.01 * i);
    row.push_back({i, 2.0});
  }
  m.add_constraint("odd", row, Sense::LessEqual, 11.0);
  SolverOptions o;
  o.rel_gap = 0.0;
  o.node_limit = 1;
  EXPECT_THROW(solve_milp(m, o), NodeLimitExceeded);
}

TEST(Model, RejectsBadInput) {
  MilpModel m;
  EXPECT_THROW(m.add_continuous("x", 2.0, 1.0), ModelBuildError);
  EXPECT_THROW(m.add_variable("b", VarKind::Binary, 0.0, 2.0), ModelBuildError);
  EXPECT_THROW(m.add_constraint("c", {{3, 1.0}}, Sense::Equal, 0.0), ModelBuildError);
  const int x = m.add_continuous("x", 0.0, 1.0);
  EXPECT_THROW(m.add_constraint("c", {{x, 1.0}}, Sense::Equal, kInf), ModelBuildError);
}

TEST(Model, MergesDuplicateTerms) {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 10.0);
  m.add_constraint("c", {{x, 1.0}, {x, 2.0}}, Sense::LessEqual, 3.0);
  ASSERT_EQ(m.constraints()[0].terms.size(), 1u);
  EXPECT_EQ(m.constraints()[0].terms[0].coef, 3.0);
}

TEST(Model, WritesLpText) {
  MilpModel m;
  const int x = m.add_continuous("p[0,1]", 0.0, 5.0, 2.0);
  const int u = m.add_binary("u", 1.0);
  m.add_constraint("link", {{x, 1.0}, {u, -5.0}}, Sense::LessEqual, 0.0);
  std::ostringstream out;
  write_lp(out, m);
  const std::string text = out.str();
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("p_0_1"), std::string::npos);
  EXPECT_NE(text.find("Binaries\n u"), std::string::npos);
}

}  // namespace

#include "../support/lp_oracle.hpp"
#include "random_milp.hpp"

namespace {

TEST(Milp, RandomModelsMatchBruteForce) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int nb = 1 + trial % 10;
    const int nc = 2 + (trial * 7) % 25;
    const MilpModel m = gridstack::oracle::random_milp(rng, nb, nc);
    const auto expect = gridstack::oracle::enumerate_milp(m);
    ASSERT_TRUE(expect.has_value()) << "generator guarantees a feasible point";
    const MilpSolution s = solve_milp(m, 0.0);
    EXPECT_NEAR(s.objective, *expect, 1e-6 * std::max(1.0, std::abs(*expect))) << "trial " << trial;
    EXPECT_LE(m.max_violation(s.values), 1e-6) << "trial " << trial;
  }
}

TEST(Lp, RandomRelaxationsMatchDenseOracle) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    MilpModel m = gridstack::oracle::random_milp(rng, 0, 5 + trial % 26);
    const auto expect = gridstack::oracle::enumerate_milp(m);
    const MilpSolution s = solve_lp(m);
    ASSERT_TRUE(expect.has_value());
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, *expect, 1e-6 * std::max(1.0, std::abs(*expect))) << "trial " << trial;
  }
}

}  // namespace
