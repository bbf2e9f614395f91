#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridstack/model.hpp"
#include "gridstack/protocol.hpp"

namespace gridstack {

/// Private settings of one storage owner.
struct DepoConfig {
  int storage = 0;
  /// Share of power and energy held back for the owner's own use, in [0, 1].
  double local_reserve_fraction = 0.0;
  /// Owner's price forecast ($/MWh). When present the owner fills intervals
  /// without a TEPO preference with a simple arbitrage plan.
  Profile price_profile;
  /// Weights TEPO must apply when it deviates from the owner's proposal.
  std::optional<Stage3Penalties> penalties;
  std::optional<double> default_penalty;
};

/// Reads the optional "depo" array of a scenario document. Devices without
/// an entry get a default config. A price profile must cover
/// "scenario.intervals" when the document has one. Throws ParseError.
std::vector<DepoConfig> parse_depo_configs(const nlohmann::json& doc, const NetworkModel& net);

/// The device as the owner offers it: power and energy limits scaled by
/// (1 - reserve), owner penalties applied.
StorageDevice offered_device(const StorageDevice& device, const DepoConfig& config);

CapacityEntry answer_capacity(const StorageDevice& device, const DepoConfig& config);
/// Capacity entry of an already offered device. SOC limits that vary over
/// time are reported by their tightest value.
CapacityEntry capacity_of(const StorageDevice& offered);

/// Reachable SOC band at the end of each interval: the bounds of the device
/// tightened so that the terminal target can still be met when `terminal`.
struct SocEnvelope {
  Profile lower, upper;
};
SocEnvelope soc_envelope(const StorageDevice& device, int intervals, double step_hours, bool terminal);

struct Proposal {
  ScheduleEntry schedule;
  bool truncated = false;
};

/// Owner's proposal: full offered power in the direction TEPO indicated,
/// `fallback` (or arbitrage on the price profile when no fallback is given)
/// where TEPO has no preference. Actions are cut to stay inside the SOC
/// envelope, and the cut is flagged. The proposal never acts against the
/// indicator unless the terminal target forces it, which is also flagged.
/// Throws InfeasibleScheduleError when the terminal target is out of reach
/// whatever the schedule.
Proposal propose_initial(const ForecastEntry& forecast, const StorageDevice& offered, const DepoConfig& config,
                         double step_hours, bool terminal, const ScheduleEntry* fallback = nullptr);

/// Schedule closest in l1 to `prior` that keeps the bus net load
/// (load - discharge + charge) inside the TEPO bounds while respecting the
/// device. Throws InfeasibleScheduleError.
ScheduleEntry finalize(const NeedsEntry& needs, const Profile& load, const ScheduleEntry& prior,
                       const StorageDevice& offered, double step_hours, bool terminal);

/// A storage owner bound to one device and one protocol session.
class DepoAgent {
 public:
  DepoAgent(StorageDevice device, DepoConfig config);

  const StorageDevice& device() const { return device_; }
  const StorageDevice& offered() const { return offered_; }
  const DepoConfig& config() const { return config_; }
  Session& session() { return session_; }
  const Session& session() const { return session_; }

  /// Structured log lines ("depo=<id> event=... key=value").
  const std::vector<std::string>& log() const { return log_; }
  void note(const std::string& event, const std::string& detail);

 private:
  StorageDevice device_;
  StorageDevice offered_;
  DepoConfig config_;
  Session session_;
  std::vector<std::string> log_;
};

}  // namespace gridstack
