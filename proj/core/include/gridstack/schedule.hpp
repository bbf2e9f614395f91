#pragma once

#include <filesystem>
#include <vector>

#include "gridstack/model.hpp"

namespace gridstack {

template <typename T>
using Series = std::vector<std::vector<T>>;  // [entity][t]

/// Output of one stage solve. Every per-entity series has one entry per
/// interval. Storage series are present for every device; stages without
/// storage decisions leave the devices idle at their initial SOC.
struct ScheduleSet {
  int intervals = 0;
  double step_hours = 1.0;

  Series<int> commitment;  // v_i
  Series<int> startup;     // y_i
  Series<int> shutdown;    // z_i
  Series<double> power;    // p_i
  std::vector<Series<double>> block_power;  // [unit][block][t]
  Series<double> curtailment;  // [renewable][t]
  Series<double> charge;       // [storage][t]
  Series<double> discharge;
  Series<double> soc;          // end-of-interval state of charge
  Series<double> flow;         // [line][t]
  Series<double> angle;        // [bus][t], radians

  double objective = 0.0;         // value the stage minimized
  double generation_cost = 0.0;   // no-load + startup + block energy
  double curtailment_cost = 0.0;
  double storage_cost = 0.0;      // utilization cost, benchmark only
  double curtailed_energy = 0.0;  // MWh

  /// Generation plus curtailment cost: the operating cost of the schedule.
  double operating_cost() const { return generation_cost + curtailment_cost; }

  bool operator==(const ScheduleSet&) const = default;
};

/// Deviations chosen by a congestion relief stage, split into nonnegative
/// up/down parts.
struct AdjustmentSet {
  std::vector<Series<double>> block_up, block_down;  // [unit][block][t]
  Series<double> unit_up, unit_down;
  Series<double> charge_up, charge_down;
  Series<double> discharge_up, discharge_down;
  Series<double> curtail_up, curtail_down;
  Series<int> nu, psi, zeta;  // [storage][t]

  /// Largest absolute entry across every continuous adjustment.
  double max_abs() const;

  bool operator==(const AdjustmentSet&) const = default;
};

/// Storage charge and discharge power per device and interval (MW).
struct EssSchedule {
  Series<double> charge;
  Series<double> discharge;

  static EssSchedule zeros(std::size_t devices, int intervals);
  /// Net injection into the grid: discharge minus charge.
  double net_injection(std::size_t s, int t) const {
    return discharge[s][static_cast<std::size_t>(t)] - charge[s][static_cast<std::size_t>(t)];
  }

  bool operator==(const EssSchedule&) const = default;
};

EssSchedule ess_of(const ScheduleSet& schedule);

/// Intervals [begin, begin + length) of a schedule.
ScheduleSet slice(const ScheduleSet& s, int begin, int length);

/// Integrates the state-of-charge recursion from `initial`.
Profile integrate_soc(const StorageDevice& device, const Profile& charge, const Profile& discharge,
                      double step_hours, double initial);

/// Writes commitment.csv, dispatch.csv, flows.csv and storage.csv into `dir`
/// (created if missing). Columns are the interval index followed by entity
/// ids in ascending order.
void write_schedule_csv(const ScheduleSet& s, const NetworkModel& net, const std::filesystem::path& dir);

}  // namespace gridstack
