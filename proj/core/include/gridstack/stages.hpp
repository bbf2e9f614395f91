#pragma once

#include <optional>
#include <string>

#include "gridstack/milp.hpp"
#include "gridstack/model.hpp"
#include "gridstack/schedule.hpp"

namespace gridstack {

enum class StageKind { Stage1, Stage2, Stage3, Stage4, NcucPlus };

/// Tag used in logs, errors and manifests ("stage1" ... "ncuc+").
const char* stage_tag(StageKind kind);

struct StageInputs {
  /// Schedule the relief stages deviate from: Stage 1 output day-ahead, the
  /// agreed day-ahead Stage 4 output hour-ahead.
  ScheduleSet baseline;
  /// Storage schedule the relief stages start from.
  EssSchedule initial;
  bool enforce_flow_limits = true;
  /// Rolling windows that stop short of the last interval of the day carry
  /// SOC bounds only.
  bool enforce_terminal_soc = true;
};

/// A built stage: the MILP plus the variable index maps needed to decode it.
/// Index -1 marks a quantity the stage does not model.
struct StageModel {
  StageKind kind = StageKind::Stage1;
  MilpModel milp;
  NetworkModel network;
  Scenario scenario;

  Series<int> v, y, z, p;             // [unit][t]
  std::vector<Series<int>> pb;        // [unit][block][t]
  Series<int> x;                      // [renewable][t]
  Series<int> flow, angle;            // [line][t], [bus][t]
  Series<int> pc, pd, soc, nu;        // [storage][t]

  // Relief stages only.
  std::vector<Series<int>> dpb_up, dpb_down;
  Series<int> dx_up, dx_down;
  Series<int> dc_up, dc_down, dd_up, dd_down, psi, zeta;

  std::optional<ScheduleSet> baseline;
  /// Storage injections held fixed (Stage 4) or the starting schedule
  /// (relief stages).
  EssSchedule storage_input;
  /// Binary values the solver tries first. Relief stages start from the
  /// baseline commitment.
  StartHint start;
};

/// Adds the commitment of `schedule` (and its storage direction where the
/// device is active) to the start hint of `model`.
void hint_from(StageModel& model, const ScheduleSet& schedule);

/// Pre-mitigation unit commitment: least cost, no flow limits, no storage.
StageModel build_stage1(const NetworkModel& net, const Scenario& scen);

/// Independent congestion relief: weighted l1 deviation from the baseline.
StageModel build_stage2(const NetworkModel& net, const Scenario& scen, const StageInputs& inputs);

/// Coordinated congestion relief: as Stage 2 but storage deviations are
/// priced by the owner's indicator-dependent penalties.
StageModel build_stage3(const NetworkModel& net, const Scenario& scen, const StageInputs& inputs);

/// Post-mitigation network-constrained commitment with storage injections
/// entered as fixed nodal terms.
StageModel build_stage4(const NetworkModel& net, const Scenario& scen, const EssSchedule& fixed,
                        bool enforce_flow_limits = true);

/// Network-constrained commitment with storage as free decisions priced at
/// each device's stage-two penalty.
StageModel build_ncuc_plus(const NetworkModel& net, const Scenario& scen, bool enforce_terminal_soc = true);

struct DecodedStage {
  ScheduleSet schedule;
  std::optional<AdjustmentSet> adjustments;
};

/// Maps a solution back onto schedule quantities. Values within 1e-9 of an
/// integer or of zero are snapped. Throws DecodeError when the solution does
/// not cover the model.
DecodedStage decode(const StageModel& model, const MilpSolution& solution);

struct StageResult {
  ScheduleSet schedule;
  std::optional<AdjustmentSet> adjustments;
  double relative_gap = 0.0;
  long nodes = 0;
  double seconds = 0.0;
};

/// Solves and decodes, converting solver failures into StageError tagged
/// with the stage name.
StageResult solve_stage(const StageModel& model, const SolverOptions& options);

/// Stage 3 storage penalty for one device and interval, evaluated directly
/// from the proposal and the chosen deviations (per MWh of deviation, before
/// multiplying by the step length).
double stage3_storage_penalty(const StorageDevice& device, double proposed_charge, double proposed_discharge,
                              double charge_up, double charge_down, double discharge_up, double discharge_down);

}  // namespace gridstack
