#pragma once

#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridstack/model.hpp"
#include "gridstack/schedule.hpp"

namespace gridstack {

enum class ReportKind { Capacity, CongestionForecast, InitialSchedule, MitigationNeeds, FinalSchedule };

/// Wire name: capacity, congestion_forecast, initial_schedule,
/// mitigation_needs, final_schedule.
const char* to_string(ReportKind kind);
ReportKind report_kind_from_string(const std::string& name);

struct CapacityEntry {
  int storage = 0;
  double charge_max = 0.0;     // MW
  double discharge_max = 0.0;  // MW
  double soc_max = 0.0;        // MWh
  double soc_min = 0.0;        // MWh
  double soc_initial = 0.0;    // MWh
  bool operator==(const CapacityEntry&) const = default;
};

struct CapacityReport {
  std::vector<CapacityEntry> devices;
  bool operator==(const CapacityReport&) const = default;
};

struct ForecastEntry {
  int storage = 0;
  int bus = 0;
  Profile load_forecast;                // raw bus demand, MW
  std::vector<int> charging_indicator;  // +1 charge, -1 discharge, 0 no preference
  bool operator==(const ForecastEntry&) const = default;
};

struct CongestionForecast {
  std::vector<ForecastEntry> devices;
  bool operator==(const CongestionForecast&) const = default;
};

struct ScheduleEntry {
  int storage = 0;
  Profile charge;     // MW
  Profile discharge;  // MW
  bool operator==(const ScheduleEntry&) const = default;
};

struct InitialSchedule {
  std::vector<ScheduleEntry> devices;
  /// Set when the agent had to cut the indicated actions to stay inside the
  /// SOC envelope.
  bool truncated = false;
  bool operator==(const InitialSchedule&) const = default;
};

struct NeedsEntry {
  int storage = 0;
  int bus = 0;
  Profile net_load_min;  // MW
  Profile net_load_max;  // MW
  bool operator==(const NeedsEntry&) const = default;
};

struct MitigationNeeds {
  std::vector<NeedsEntry> devices;
  bool operator==(const MitigationNeeds&) const = default;
};

struct FinalSchedule {
  std::vector<ScheduleEntry> devices;
  bool operator==(const FinalSchedule&) const = default;
};

struct Request {
  ReportKind report = ReportKind::Capacity;
  bool operator==(const Request&) const = default;
};

using Report = std::variant<CapacityReport, CongestionForecast, InitialSchedule, MitigationNeeds, FinalSchedule>;
using Message = std::variant<Request, CapacityReport, CongestionForecast, InitialSchedule, MitigationNeeds, FinalSchedule>;

/// "request" for requests, the report wire name otherwise.
std::string message_kind(const Message& m);

inline constexpr int kProtocolVersion = 1;

struct Envelope {
  int version = kProtocolVersion;
  int cycle = 0;
  Message body;
  bool operator==(const Envelope&) const = default;
};

/// Checks payload invariants (profile lengths, bound ordering, indicator
/// values, nonnegative finite powers). Throws SchemaError.
void check_payload(const Message& m);

/// 4-byte big-endian length followed by a UTF-8 JSON envelope with keys in
/// the order version, kind, cycle, payload. Equal messages give equal bytes.
std::vector<std::uint8_t> serialize(const Envelope& e);
std::vector<std::uint8_t> serialize(const Message& m, int cycle = 0);

/// Inverse of serialize. Throws SchemaError (with the byte offset of the
/// problem where known) on truncation, bad JSON, unknown kinds, missing
/// fields or payload invariant violations.
Envelope deserialize(std::span<const std::uint8_t> bytes);

enum class Phase { Idle, CapacityDone, ForecastSent, InitialReceived, NeedsSent, FinalReceived };
const char* to_string(Phase p);

enum class Direction { TepoToDepo, DepoToTepo };

struct LogicalTime {
  int cycle = 0;
  int step = 0;
  bool operator==(const LogicalTime&) const = default;
};

struct TranscriptEntry {
  Direction direction = Direction::TepoToDepo;
  std::string kind;  // "request:<report>" or "<report>"
  LogicalTime time;
  bool operator==(const TranscriptEntry&) const = default;
};

/// The fixed ten-message exchange of one cycle: capacity (request, reply),
/// congestion forecast (initial-schedule request, forecast request, forecast,
/// initial schedule) and mitigation needs (final-schedule request, needs
/// request, needs, final schedule).
class ExchangeState {
 public:
  explicit ExchangeState(int cycle = 0) : cycle_(cycle) {}

  /// Records a message if it is the next one the exchange allows. Throws
  /// SequenceError otherwise, and SchemaError when a schedule breaks the
  /// reported capacity.
  void apply(Direction dir, const Message& m);

  Phase phase() const { return phase_; }
  int cycle() const { return cycle_; }
  bool complete() const { return phase_ == Phase::FinalReceived; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  /// Next legal message as (direction, kind) or nullopt once complete.
  std::optional<std::pair<Direction, std::string>> expected() const;
  const std::optional<CapacityReport>& capacity() const { return capacity_; }

  /// Starts the next cycle. Only legal once the current one is complete; the
  /// transcript keeps accumulating.
  void next_cycle();

 private:
  int cycle_;
  int step_ = 0;
  Phase phase_ = Phase::Idle;
  std::optional<CapacityReport> capacity_;
  std::vector<TranscriptEntry> transcript_;
};

/// One side of a session. TEPO sends TepoToDepo and receives DepoToTepo;
/// DEPO the reverse. Methods lock the session so sessions can be driven from
/// different threads.
class Session {
 public:
  enum class Side { Tepo, Depo };
  Session(Side side, std::string peer, int cycle = 0) : side_(side), peer_(std::move(peer)), state_(cycle) {}

  /// Validates and records an outgoing message and returns its wire bytes.
  std::vector<std::uint8_t> send(const Message& m);
  /// Decodes and records an incoming message.
  Message receive(std::span<const std::uint8_t> bytes);
  /// In-process variant without the byte round trip.
  void receive(const Message& m);

  Phase phase() const;
  int cycle() const;
  std::vector<TranscriptEntry> transcript() const;
  void next_cycle();
  const std::string& peer() const { return peer_; }
  Side side() const { return side_; }

 private:
  Direction outgoing() const { return side_ == Side::Tepo ? Direction::TepoToDepo : Direction::DepoToTepo; }
  Direction incoming() const { return side_ == Side::Tepo ? Direction::DepoToTepo : Direction::TepoToDepo; }

  Side side_;
  std::string peer_;
  mutable std::mutex mu_;
  ExchangeState state_;
};

struct NeedsPolicy {
  /// Half-width of the net-load band on intervals where the relief schedule
  /// leaves the device idle. Infinite means the full capacity envelope.
  double idle_band = std::numeric_limits<double>::infinity();
  /// Half-width on intervals where the device injects; zero pins the net
  /// load to the scheduled value.
  double active_band = 0.0;
};

/// Net-load bounds at each storage bus around the relief schedule: the
/// scheduled net load is demand minus discharge plus charge, and every band
/// is clipped to what the device can physically reach.
MitigationNeeds make_mitigation_needs(const ScheduleSet& relief, const NetworkModel& net, const Scenario& scen,
                                      const NeedsPolicy& policy = {});

/// Sign of the net charging power per interval: +1 charge, -1 discharge.
std::vector<int> charging_indicator(const Profile& charge, const Profile& discharge, double tol = 1e-6);

}  // namespace gridstack
