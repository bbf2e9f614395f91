#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "gridstack/error.hpp"
#include "gridstack/protocol.hpp"

namespace gridstack {

using ordered = nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 5> kReportNames = {"capacity", "congestion_forecast", "initial_schedule",
                                                     "mitigation_needs", "final_schedule"};

struct Step {
  Direction direction;
  const char* kind;
  Phase after;
};

// One cycle, in order.
constexpr std::array<Step, 10> kScript = {{
    {Direction::TepoToDepo, "request:capacity", Phase::Idle},
    {Direction::DepoToTepo, "capacity", Phase::CapacityDone},
    {Direction::TepoToDepo, "request:initial_schedule", Phase::CapacityDone},
    {Direction::DepoToTepo, "request:congestion_forecast", Phase::CapacityDone},
    {Direction::TepoToDepo, "congestion_forecast", Phase::ForecastSent},
    {Direction::DepoToTepo, "initial_schedule", Phase::InitialReceived},
    {Direction::TepoToDepo, "request:final_schedule", Phase::InitialReceived},
    {Direction::DepoToTepo, "request:mitigation_needs", Phase::InitialReceived},
    {Direction::TepoToDepo, "mitigation_needs", Phase::NeedsSent},
    {Direction::DepoToTepo, "final_schedule", Phase::FinalReceived},
}};

const char* direction_name(Direction d) { return d == Direction::TepoToDepo ? "TEPO->DEPO" : "DEPO->TEPO"; }

std::string transcript_kind(const Message& m) {
  if (const auto* r = std::get_if<Request>(&m)) return std::string("request:") + to_string(r->report);
  return message_kind(m);
}

void require_finite(const Profile& p, const std::string& where) {
  for (double v : p)
    if (!std::isfinite(v)) throw SchemaError(where + ": non-finite value");
}

void require_nonnegative(const Profile& p, const std::string& where) {
  require_finite(p, where);
  for (double v : p)
    if (v < 0.0) throw SchemaError(where + ": negative power");
}

template <typename Entry>
void require_unique_ids(const std::vector<Entry>& entries, const std::string& where) {
  std::set<int> seen;
  for (const auto& e : entries)
    if (!seen.insert(e.storage).second) throw SchemaError(where + ": duplicate storage " + std::to_string(e.storage));
}

void check_schedule_entries(const std::vector<ScheduleEntry>& entries, const std::string& where) {
  require_unique_ids(entries, where);
  for (const auto& e : entries) {
    const std::string w = where + "[" + std::to_string(e.storage) + "]";
    if (e.charge.size() != e.discharge.size()) throw SchemaError(w + ": charge and discharge lengths differ");
    require_nonnegative(e.charge, w + ".charge");
    require_nonnegative(e.discharge, w + ".discharge");
  }
}

// Horizon length carried by a payload, or -1 when it has none.
int horizon_of(const Message& m) {
  auto first = [](const auto& devices) {
    return devices.empty() ? -1 : static_cast<int>(devices.front().charge.size());
  };
  if (const auto* f = std::get_if<CongestionForecast>(&m))
    return f->devices.empty() ? -1 : static_cast<int>(f->devices.front().load_forecast.size());
  if (const auto* s = std::get_if<InitialSchedule>(&m)) return first(s->devices);
  if (const auto* s = std::get_if<FinalSchedule>(&m)) return first(s->devices);
  if (const auto* n = std::get_if<MitigationNeeds>(&m))
    return n->devices.empty() ? -1 : static_cast<int>(n->devices.front().net_load_min.size());
  return -1;
}

ordered schedule_json(const std::vector<ScheduleEntry>& entries) {
  ordered arr = ordered::array();
  for (const auto& e : entries) arr.push_back({{"storage", e.storage}, {"charge", e.charge}, {"discharge", e.discharge}});
  return arr;
}

ordered payload_json(const Message& m) {
  return std::visit(
      [](const auto& body) -> ordered {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Request>) {
          return {{"report", to_string(body.report)}};
        } else if constexpr (std::is_same_v<T, CapacityReport>) {
          ordered arr = ordered::array();
          for (const auto& e : body.devices)
            arr.push_back({{"storage", e.storage},
                           {"charge_max", e.charge_max},
                           {"discharge_max", e.discharge_max},
                           {"soc_max", e.soc_max},
                           {"soc_min", e.soc_min},
                           {"soc_initial", e.soc_initial}});
          return {{"devices", arr}};
        } else if constexpr (std::is_same_v<T, CongestionForecast>) {
          ordered arr = ordered::array();
          for (const auto& e : body.devices)
            arr.push_back({{"storage", e.storage},
                           {"bus", e.bus},
                           {"load_forecast", e.load_forecast},
                           {"charging_indicator", e.charging_indicator}});
          return {{"devices", arr}};
        } else if constexpr (std::is_same_v<T, InitialSchedule>) {
          return {{"truncated", body.truncated}, {"devices", schedule_json(body.devices)}};
        } else if constexpr (std::is_same_v<T, MitigationNeeds>) {
          ordered arr = ordered::array();
          for (const auto& e : body.devices)
            arr.push_back({{"storage", e.storage},
                           {"bus", e.bus},
                           {"net_load_min", e.net_load_min},
                           {"net_load_max", e.net_load_max}});
          return {{"devices", arr}};
        } else {
          return {{"devices", schedule_json(body.devices)}};
        }
      },
      m);
}

// Field access that reports problems as SchemaError at the payload offset.
class Reader {
 public:
  explicit Reader(std::size_t offset) : offset_(offset) {}

  const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) const {
    if (!obj.is_object()) fail(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + ": missing field '" + key + "'");
    return *it;
  }
  double number(const nlohmann::json& obj, const char* key, const std::string& where) const {
    const auto& v = field(obj, key, where);
    if (!v.is_number()) fail(where + "." + key + ": expected a number");
    return v.get<double>();
  }
  int integer(const nlohmann::json& obj, const char* key, const std::string& where) const {
    const auto& v = field(obj, key, where);
    if (!v.is_number_integer()) fail(where + "." + key + ": expected an integer");
    return v.get<int>();
  }
  Profile profile(const nlohmann::json& obj, const char* key, const std::string& where) const {
    const auto& v = field(obj, key, where);
    if (!v.is_array()) fail(where + "." + key + ": expected an array");
    Profile p;
    for (const auto& x : v) {
      if (!x.is_number()) fail(where + "." + key + ": expected numbers");
      p.push_back(x.get<double>());
    }
    return p;
  }
  std::vector<int> ints(const nlohmann::json& obj, const char* key, const std::string& where) const {
    const auto& v = field(obj, key, where);
    if (!v.is_array()) fail(where + "." + key + ": expected an array");
    std::vector<int> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) fail(where + "." + key + ": expected integers");
      out.push_back(x.get<int>());
    }
    return out;
  }
  const nlohmann::json& devices(const nlohmann::json& payload) const {
    const auto& d = field(payload, "devices", "payload");
    if (!d.is_array()) fail("payload.devices: expected an array");
    return d;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(msg, offset_); }

 private:
  std::size_t offset_;
};

std::vector<ScheduleEntry> read_schedule(const Reader& r, const nlohmann::json& payload) {
  std::vector<ScheduleEntry> out;
  for (const auto& d : r.devices(payload))
    out.push_back({r.integer(d, "storage", "device"), r.profile(d, "charge", "device"),
                   r.profile(d, "discharge", "device")});
  return out;
}

Message read_payload(const Reader& r, const std::string& kind, const nlohmann::json& payload) {
  if (kind == "request") {
    const auto& rep = r.field(payload, "report", "payload");
    if (!rep.is_string()) r.fail("payload.report: expected a string");
    try {
      return Request{report_kind_from_string(rep.get<std::string>())};
    } catch (const SchemaError& e) {
      r.fail(e.what());
    }
  }
  if (kind == "capacity") {
    CapacityReport c;
    for (const auto& d : r.devices(payload))
      c.devices.push_back({r.integer(d, "storage", "device"), r.number(d, "charge_max", "device"),
                           r.number(d, "discharge_max", "device"), r.number(d, "soc_max", "device"),
                           r.number(d, "soc_min", "device"), r.number(d, "soc_initial", "device")});
    return c;
  }
  if (kind == "congestion_forecast") {
    CongestionForecast f;
    for (const auto& d : r.devices(payload))
      f.devices.push_back({r.integer(d, "storage", "device"), r.integer(d, "bus", "device"),
                           r.profile(d, "load_forecast", "device"), r.ints(d, "charging_indicator", "device")});
    return f;
  }
  if (kind == "initial_schedule") {
    InitialSchedule s;
    const auto& tr = r.field(payload, "truncated", "payload");
    if (!tr.is_boolean()) r.fail("payload.truncated: expected a boolean");
    s.truncated = tr.get<bool>();
    s.devices = read_schedule(r, payload);
    return s;
  }
  if (kind == "mitigation_needs") {
    MitigationNeeds n;
    for (const auto& d : r.devices(payload))
      n.devices.push_back({r.integer(d, "storage", "device"), r.integer(d, "bus", "device"),
                           r.profile(d, "net_load_min", "device"), r.profile(d, "net_load_max", "device")});
    return n;
  }
  if (kind == "final_schedule") return FinalSchedule{read_schedule(r, payload)};
  r.fail("unknown message kind '" + kind + "'");
}

}  // namespace

const char* to_string(ReportKind kind) { return kReportNames.at(static_cast<std::size_t>(kind)); }

ReportKind report_kind_from_string(const std::string& name) {
  for (std::size_t k = 0; k < kReportNames.size(); ++k)
    if (name == kReportNames[k]) return static_cast<ReportKind>(k);
  throw SchemaError("unknown report kind '" + name + "'");
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "idle";
    case Phase::CapacityDone: return "capacity_done";
    case Phase::ForecastSent: return "forecast_sent";
    case Phase::InitialReceived: return "initial_received";
    case Phase::NeedsSent: return "needs_sent";
    case Phase::FinalReceived: return "final_received";
  }
  return "?";
}

std::string message_kind(const Message& m) {
  if (std::holds_alternative<Request>(m)) return "request";
  return kReportNames.at(m.index() - 1);
}

void check_payload(const Message& m) {
  std::visit(
      [](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, CapacityReport>) {
          require_unique_ids(body.devices, "capacity");
          for (const auto& e : body.devices) {
            const std::string w = "capacity[" + std::to_string(e.storage) + "]";
            require_nonnegative({e.charge_max, e.discharge_max, e.soc_max, e.soc_min, e.soc_initial}, w);
            if (e.soc_min > e.soc_max) throw SchemaError(w + ": soc_min exceeds soc_max");
            if (e.soc_initial < e.soc_min - 1e-9 || e.soc_initial > e.soc_max + 1e-9)
              throw SchemaError(w + ": soc_initial outside [soc_min, soc_max]");
          }
        } else if constexpr (std::is_same_v<T, CongestionForecast>) {
          require_unique_ids(body.devices, "congestion_forecast");
          for (const auto& e : body.devices) {
            const std::string w = "congestion_forecast[" + std::to_string(e.storage) + "]";
            require_finite(e.load_forecast, w + ".load_forecast");
            if (e.charging_indicator.size() != e.load_forecast.size())
              throw SchemaError(w + ": indicator and load lengths differ");
            for (int i : e.charging_indicator)
              if (i < -1 || i > 1) throw SchemaError(w + ": indicator values must be -1, 0 or +1");
          }
        } else if constexpr (std::is_same_v<T, InitialSchedule> || std::is_same_v<T, FinalSchedule>) {
          check_schedule_entries(body.devices, std::is_same_v<T, InitialSchedule> ? "initial_schedule" : "final_schedule");
        } else if constexpr (std::is_same_v<T, MitigationNeeds>) {
          require_unique_ids(body.devices, "mitigation_needs");
          for (const auto& e : body.devices) {
            const std::string w = "mitigation_needs[" + std::to_string(e.storage) + "]";
            if (e.net_load_min.size() != e.net_load_max.size()) throw SchemaError(w + ": bound lengths differ");
            require_finite(e.net_load_min, w + ".net_load_min");
            require_finite(e.net_load_max, w + ".net_load_max");
            for (std::size_t t = 0; t < e.net_load_min.size(); ++t)
              if (e.net_load_min[t] > e.net_load_max[t])
                throw SchemaError(w + ": net_load_min exceeds net_load_max at t=" + std::to_string(t));
          }
        }
      },
      m);
  const int T = horizon_of(m);
  auto same_length = [T](const auto& devices, auto length) {
    for (const auto& e : devices)
      if (static_cast<int>(length(e)) != T) throw SchemaError("devices carry different horizon lengths");
  };
  if (const auto* f = std::get_if<CongestionForecast>(&m))
    same_length(f->devices, [](const ForecastEntry& e) { return e.load_forecast.size(); });
  if (const auto* s = std::get_if<InitialSchedule>(&m))
    same_length(s->devices, [](const ScheduleEntry& e) { return e.charge.size(); });
  if (const auto* s = std::get_if<FinalSchedule>(&m))
    same_length(s->devices, [](const ScheduleEntry& e) { return e.charge.size(); });
  if (const auto* n = std::get_if<MitigationNeeds>(&m))
    same_length(n->devices, [](const NeedsEntry& e) { return e.net_load_min.size(); });
}

std::vector<std::uint8_t> serialize(const Envelope& e) {
  check_payload(e.body);
  ordered doc;
  doc["version"] = e.version;
  doc["kind"] = message_kind(e.body);
  doc["cycle"] = e.cycle;
  doc["payload"] = payload_json(e.body);
  const std::string text = doc.dump();
  const auto n = static_cast<std::uint32_t>(text.size());
  std::vector<std::uint8_t> out;
  out.reserve(text.size() + 4);
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>((n >> shift) & 0xFFu));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

std::vector<std::uint8_t> serialize(const Message& m, int cycle) { return serialize(Envelope{kProtocolVersion, cycle, m}); }

Envelope deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw SchemaError("truncated length prefix", bytes.size());
  std::uint32_t n = 0;
  for (std::size_t k = 0; k < 4; ++k) n = (n << 8) | bytes[k];
  if (bytes.size() - 4 < n) throw SchemaError("truncated message body", bytes.size());
  if (bytes.size() - 4 > n) throw SchemaError("trailing bytes after message", 4 + n);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin() + 4, bytes.begin() + 4 + n);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what(), 4 + (e.byte > 0 ? e.byte - 1 : 0));
  }

  const Reader head(4);
  Envelope env;
  env.version = head.integer(doc, "version", "envelope");
  if (env.version != kProtocolVersion) head.fail("unsupported protocol version " + std::to_string(env.version));
  const auto& kind = head.field(doc, "kind", "envelope");
  if (!kind.is_string()) head.fail("envelope.kind: expected a string");
  env.cycle = head.integer(doc, "cycle", "envelope");

  // Locate the payload so schema errors point into it.
  const std::string text(bytes.begin() + 4, bytes.begin() + 4 + n);
  const auto pos = text.find("\"payload\"");
  const Reader body(4 + (pos == std::string::npos ? 0 : pos));
  env.body = read_payload(body, kind.get<std::string>(), head.field(doc, "payload", "envelope"));
  try {
    check_payload(env.body);
  } catch (const SchemaError& e) {
    body.fail(e.what());
  }
  return env;
}

void ExchangeState::apply(Direction dir, const Message& m) {
  const std::string kind = transcript_kind(m);
  if (complete())
    throw SequenceError("cycle " + std::to_string(cycle_) + " is complete; " + direction_name(dir) + " " + kind +
                        " needs a new cycle");
  const Step& want = kScript[static_cast<std::size_t>(step_)];
  if (dir != want.direction || kind != want.kind)
    throw SequenceError(std::string("in phase ") + to_string(phase_) + " expected " + direction_name(want.direction) +
                        " " + want.kind + ", got " + direction_name(dir) + " " + kind);
  check_payload(m);

  if (const auto* cap = std::get_if<CapacityReport>(&m)) capacity_ = *cap;
  auto within_capacity = [this](const std::vector<ScheduleEntry>& entries, const char* what) {
    for (const auto& e : entries) {
      auto it = std::find_if(capacity_->devices.begin(), capacity_->devices.end(),
                             [&](const CapacityEntry& c) { return c.storage == e.storage; });
      if (it == capacity_->devices.end())
        throw SchemaError(std::string(what) + ": storage " + std::to_string(e.storage) + " was not in the capacity report");
      const double tol = 1e-6 * std::max(1.0, std::max(it->charge_max, it->discharge_max));
      for (std::size_t t = 0; t < e.charge.size(); ++t)
        if (e.charge[t] > it->charge_max + tol || e.discharge[t] > it->discharge_max + tol)
          throw SchemaError(std::string(what) + ": storage " + std::to_string(e.storage) + " exceeds its reported power at t=" +
                            std::to_string(t));
    }
  };
  if (const auto* s = std::get_if<InitialSchedule>(&m)) within_capacity(s->devices, "initial_schedule");
  if (const auto* s = std::get_if<FinalSchedule>(&m)) within_capacity(s->devices, "final_schedule");

  transcript_.push_back({dir, kind, {cycle_, step_}});
  phase_ = want.after;
  ++step_;
}

std::optional<std::pair<Direction, std::string>> ExchangeState::expected() const {
  if (complete()) return std::nullopt;
  const Step& s = kScript[static_cast<std::size_t>(step_)];
  return std::make_pair(s.direction, std::string(s.kind));
}

void ExchangeState::next_cycle() {
  if (!complete()) throw SequenceError(std::string("cannot start a new cycle in phase ") + to_string(phase_));
  ++cycle_;
  step_ = 0;
  phase_ = Phase::Idle;
  capacity_.reset();
}

std::vector<std::uint8_t> Session::send(const Message& m) {
  std::lock_guard lock(mu_);
  state_.apply(outgoing(), m);
  return serialize(m, state_.cycle());
}

Message Session::receive(std::span<const std::uint8_t> bytes) {
  Envelope env = deserialize(bytes);
  std::lock_guard lock(mu_);
  if (env.cycle != state_.cycle())
    throw SequenceError("message for cycle " + std::to_string(env.cycle) + " arrived in cycle " +
                        std::to_string(state_.cycle()));
  state_.apply(incoming(), env.body);
  return std::move(env.body);
}

void Session::receive(const Message& m) {
  std::lock_guard lock(mu_);
  state_.apply(incoming(), m);
}

Phase Session::phase() const {
  std::lock_guard lock(mu_);
  return state_.phase();
}

int Session::cycle() const {
  std::lock_guard lock(mu_);
  return state_.cycle();
}

std::vector<TranscriptEntry> Session::transcript() const {
  std::lock_guard lock(mu_);
  return state_.transcript();
}

void Session::next_cycle() {
  std::lock_guard lock(mu_);
  state_.next_cycle();
}

std::vector<int> charging_indicator(const Profile& charge, const Profile& discharge, double tol) {
  std::vector<int> out(charge.size(), 0);
  for (std::size_t t = 0; t < charge.size(); ++t) {
    const double net = charge[t] - discharge[t];
    out[t] = net > tol ? 1 : (net < -tol ? -1 : 0);
  }
  return out;
}

MitigationNeeds make_mitigation_needs(const ScheduleSet& relief, const NetworkModel& net, const Scenario& scen,
                                      const NeedsPolicy& policy) {
  if (relief.charge.size() != net.storage.size()) throw Error("relief schedule does not match the storage fleet");
  MitigationNeeds needs;
  const auto T = static_cast<std::size_t>(relief.intervals);
  for (std::size_t s = 0; s < net.storage.size(); ++s) {
    const StorageDevice& dev = net.storage[s];
    const Profile& load = scen.demand.at(static_cast<std::size_t>(dev.bus));
    NeedsEntry e{dev.id, dev.bus, Profile(T), Profile(T)};
    for (std::size_t t = 0; t < T; ++t) {
      const double c = relief.charge[s][t];
      const double d = relief.discharge[s][t];
      const double scheduled = load[t] - d + c;
      const double band = (c > 1e-6 || d > 1e-6) ? policy.active_band : policy.idle_band;
      const double lo = load[t] - dev.discharge_max;
      const double hi = load[t] + dev.charge_max;
      e.net_load_min[t] = std::clamp(scheduled - band, lo, hi);
      e.net_load_max[t] = std::clamp(scheduled + band, lo, hi);
    }
    needs.devices.push_back(std::move(e));
  }
  return needs;
}

}  // namespace gridstack
