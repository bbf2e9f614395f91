#include <benchmark/benchmark.h>

#include <random>

#include "gridstack/milp.hpp"
#include "random_milp.hpp"

using namespace gridstack;

namespace {

void BM_LpRelaxation(benchmark::State& state) {
  std::mt19937 rng(11);
  const MilpModel m = oracle::random_milp(rng, 0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(m).objective);
}
BENCHMARK(BM_LpRelaxation)->Arg(10)->Arg(30)->Arg(60);

void BM_RandomMilp(benchmark::State& state) {
  std::mt19937 rng(12);
  const MilpModel m = oracle::random_milp(rng, static_cast<int>(state.range(0)), 30);
  for (auto _ : state) benchmark::DoNotOptimize(solve_milp(m, 0.0).objective);
}
BENCHMARK(BM_RandomMilp)->Arg(4)->Arg(8)->Arg(12);

}  // namespace
