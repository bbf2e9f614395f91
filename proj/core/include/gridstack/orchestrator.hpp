#pragma once

#include <string>
#include <vector>

#include "gridstack/depo.hpp"
#include "gridstack/milp.hpp"
#include "gridstack/model.hpp"
#include "gridstack/protocol.hpp"
#include "gridstack/stages.hpp"

namespace gridstack {

struct RunOptions {
  SolverOptions solver;
  NeedsPolicy needs;
  /// Rolling window length for the hour-ahead run, in intervals.
  int lookahead = 4;
  /// When set, an owner that cannot meet the mitigation needs aborts the run
  /// instead of falling back to the relief schedule.
  bool strict = false;
  /// Independent solves (benchmark runs) may use this many threads.
  int jobs = 1;
};

/// Everything one protocol cycle produced, merged across owners.
struct ExchangeRecord {
  CapacityReport capacity;
  CongestionForecast forecast;
  InitialSchedule proposals;
  MitigationNeeds needs;
  FinalSchedule final;
  /// Storage ids whose owner could not meet the needs; their relief
  /// schedule was used instead.
  std::vector<int> fallbacks;
};

struct DayAheadResult {
  /// The network as TEPO sees it: storage limited to what owners offered.
  NetworkModel tepo_network;
  StageResult stage1, stage2, stage3, stage4;
  ExchangeRecord exchange;
  /// Storage schedule agreed with the owners (input to Stage 4).
  EssSchedule agreed;
  /// One transcript per owner, in storage order.
  std::vector<std::vector<TranscriptEntry>> transcripts;
  std::vector<std::string> log;
  double seconds = 0.0;
};

/// Stage 1, Stage 2, the owner exchange, Stage 3, needs, finalization and
/// Stage 4. Throws StageError when a stage fails and InfeasibleScheduleError
/// in strict mode.
DayAheadResult run_day_ahead(const NetworkModel& net, const Scenario& scen, const std::vector<DepoConfig>& depo,
                             const RunOptions& options = {});

struct HourAheadResult {
  /// First interval of every window, stitched over the day.
  ScheduleSet committed;
  /// Agreed storage schedule of every window (window-local intervals).
  std::vector<EssSchedule> window_agreements;
  std::vector<ExchangeRecord> exchanges;
  std::vector<std::vector<TranscriptEntry>> transcripts;
  std::vector<std::string> log;
  double seconds = 0.0;
};

/// Rolls a window of `options.lookahead` intervals over the day, using the
/// day-ahead outcome as baseline and `scen` as the updated forecast. Only the
/// first interval of each window is committed.
HourAheadResult run_hour_ahead(const NetworkModel& net, const Scenario& scen, const DayAheadResult& day_ahead,
                               const std::vector<DepoConfig>& depo, const RunOptions& options = {});

/// Network with initial conditions taken from the end of interval `begin-1`
/// of `committed` and profiles restricted to [begin, begin + length). With
/// begin == 0 the original initial conditions are kept.
NetworkModel stage_initial_conditions(const NetworkModel& net, const ScheduleSet& committed, int begin, int length);

/// Recomputes generation, curtailment and storage utilization cost and
/// curtailed energy from the schedule quantities.
void price_schedule(const NetworkModel& net, ScheduleSet& s);

/// Total cost used to compare storage benefits: operating cost plus storage
/// utilization at each device's stage-two penalty.
double total_cost(const NetworkModel& net, const ScheduleSet& s);

struct BenchmarkResult {
  double no_storage_cost = 0.0;   // Stage 4 with idle storage
  double multistage_cost = 0.0;   // Stage 4 after the full pipeline
  double ncuc_plus_cost = 0.0;    // co-optimized storage
  double ncuc_plus_zero_cost = 0.0;  // NCUC+ with storage power forced to zero
  double multistage_reduction() const { return no_storage_cost - multistage_cost; }
  double ncuc_plus_reduction() const { return no_storage_cost - ncuc_plus_cost; }
  DayAheadResult day_ahead;
  StageResult ncuc_plus;
  std::vector<std::string> log;
};

/// Runs the multistage pipeline and the co-optimized reference on the same
/// case. Costs include storage utilization.
BenchmarkResult run_benchmark(const NetworkModel& net, const Scenario& scen, const std::vector<DepoConfig>& depo,
                              const RunOptions& options = {});

}  // namespace gridstack
