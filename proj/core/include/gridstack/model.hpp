#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace gridstack {

using Profile = std::vector<double>;

struct Bus {
  int id = 0;
  bool is_reference = false;

  bool operator==(const Bus&) const = default;
};

struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;  // per unit on the network MVA base
  double flow_max = 0.0;   // MW
  double flow_min = 0.0;   // MW
  bool monitored = false;

  bool operator==(const Line&) const = default;
};

/// One segment of a piecewise-linear cost curve.
struct CostBlock {
  double block_max = 0.0;      // MW
  double marginal_cost = 0.0;  // $/MWh
  /// Incremental penalty on adjusting this block in the congestion relief
  /// stages. Defaults to the marginal cost.
  std::optional<double> penalty;

  double adjustment_penalty() const { return penalty.value_or(marginal_cost); }

  bool operator==(const CostBlock&) const = default;
};

struct ConventionalGenerator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  /// Optional per-interval override of p_max (maintenance, derates).
  Profile p_max_profile;
  std::vector<CostBlock> blocks;
  double no_load_cost = 0.0;  // $ per interval committed
  double startup_cost = 0.0;  // $
  double ramp_up = 0.0;       // MW per interval
  double ramp_down = 0.0;     // MW per interval
  int min_up = 1;             // intervals
  int min_down = 1;           // intervals
  bool initial_commit = false;
  double initial_power = 0.0;
  int initial_up_time = 0;
  int initial_down_time = 0;

  double p_max_at(int t) const {
    return p_max_profile.empty() ? p_max : p_max_profile[static_cast<std::size_t>(t)];
  }

  bool operator==(const ConventionalGenerator&) const = default;
};

struct FixedGenerator {
  int id = 0;
  int bus = 0;
  Profile output;

  bool operator==(const FixedGenerator&) const = default;
};

enum class RenewableKind { Wind, Solar };

struct RenewablePlant {
  int id = 0;
  RenewableKind kind = RenewableKind::Wind;
  int bus = 0;
  double curtail_cost = 0.0;     // $/MWh
  double curtail_penalty = 0.0;  // congestion relief weight, 1/MWh

  bool operator==(const RenewablePlant&) const = default;
};

/// DEPO-owned weights on TEPO deviating from a proposed storage schedule.
struct Stage3Penalties {
  double charge_increase = 1.0;
  double charge_decrease = 1.0;
  double discharge_increase = 1.0;
  double discharge_decrease = 1.0;
  double charge_reversal = 1.0;     // TEPO charges against a proposed discharge
  double discharge_reversal = 1.0;  // TEPO discharges against a proposed charge

  bool operator==(const Stage3Penalties&) const = default;
};

struct StorageDevice {
  int id = 0;
  int bus = 0;
  double charge_max = 0.0;     // MW
  double discharge_max = 0.0;  // MW
  double eta_c = 1.0;
  double eta_d = 1.0;
  Profile soc_min;  // MWh, one entry per interval
  Profile soc_max;  // MWh, one entry per interval
  double soc_initial = 0.0;
  double soc_final_target = 0.0;
  double stage2_penalty = 1.0;
  Stage3Penalties stage3_penalties;
  /// Symmetric penalty used in coordinated relief on intervals where DEPO
  /// proposed no action.
  double default_penalty = 1e-3;

  bool operator==(const StorageDevice&) const = default;
};

struct NetworkModel {
  double mva_base = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ConventionalGenerator> conventional;
  std::vector<FixedGenerator> fixed;
  std::vector<RenewablePlant> renewables;
  std::vector<StorageDevice> storage;

  int reference_bus() const;

  bool operator==(const NetworkModel&) const = default;
};

struct Scenario {
  int intervals = 0;
  double step_hours = 1.0;
  /// demand[bus][t], MW. Buses without load carry a zero profile.
  std::vector<Profile> demand;
  /// availability[renewable][t], MW (wind_avail / solar_avail in files).
  std::vector<Profile> availability;

  bool operator==(const Scenario&) const = default;
};

struct ScenarioData {
  NetworkModel network;
  Scenario scenario;
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return errors.empty(); }
};

/// Checks every model invariant; never throws.
ValidationReport validate(const NetworkModel& net, const Scenario& scen);

/// Parses a document against the scenario schema. Throws ParseError on
/// structural problems. Does not validate invariants.
ScenarioData parse_scenario(const nlohmann::json& doc);

/// Reads, parses and validates a scenario file. Throws ParseError or
/// ValidationError (first error found).
ScenarioData load_scenario(const std::filesystem::path& path);

/// Reads a file as JSON, throwing ParseError on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::json to_json(const NetworkModel& net, const Scenario& scen);

/// Periods the unit must stay up (first) or down (second) at the start of
/// the horizon. At most one is nonzero.
std::pair<int, int> derive_initial_updown(const ConventionalGenerator& gen);

/// Restricts a scenario to intervals [begin, begin + length). Initial
/// conditions are left to the caller.
Scenario slice(const Scenario& scen, int begin, int length);
NetworkModel slice_profiles(const NetworkModel& net, int begin, int length);


}  // namespace gridstack
