#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "protocol_cases.hpp"
#include "gridstack/error.hpp"
#include "gridstack/protocol.hpp"

using namespace gridstack;
using namespace gridstack::oracle;

namespace {

const std::vector<std::string> kExpected = {
    "request:capacity",          "capacity",         "request:initial_schedule", "request:congestion_forecast",
    "congestion_forecast",       "initial_schedule", "request:final_schedule",   "request:mitigation_needs",
    "mitigation_needs",          "final_schedule"};

TEST(Exchange, FullCycleFollowsTheScript) {
  ExchangeState st;
  for (const Move& m : legal_cycle()) st.apply(m.dir, m.msg);
  ASSERT_TRUE(st.complete());
  ASSERT_EQ(st.transcript().size(), 10u);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(st.transcript()[k].kind, kExpected[k]);
    EXPECT_EQ(st.transcript()[k].direction, legal_cycle()[k].dir);
    EXPECT_EQ(st.transcript()[k].time, (LogicalTime{0, static_cast<int>(k)}));
  }
  // Three exchanges: each opens with a TEPO request.
  int exchanges = 0;
  for (const auto& e : st.transcript())
    if (e.direction == Direction::TepoToDepo && e.kind.rfind("request:", 0) == 0) ++exchanges;
  EXPECT_EQ(exchanges, 3);
}

TEST(Exchange, CapacityReplyEndsTheIdlePhase) {
  ExchangeState st;
  st.apply(Direction::TepoToDepo, Request{ReportKind::Capacity});
  EXPECT_EQ(st.phase(), Phase::Idle);
  st.apply(Direction::DepoToTepo, capacity());
  EXPECT_EQ(st.phase(), Phase::CapacityDone);
  ASSERT_TRUE(st.capacity().has_value());
  EXPECT_EQ(*st.capacity(), capacity());
}

TEST(Exchange, InitialScheduleWhileIdleIsOutOfOrder) {
  ExchangeState st;
  EXPECT_THROW(st.apply(Direction::DepoToTepo, initial()), SequenceError);
  EXPECT_EQ(st.phase(), Phase::Idle);
  EXPECT_TRUE(st.transcript().empty());
}

TEST(Exchange, EveryOutOfOrderReportIsRejected) {
  // Entry point of each phase, as an index into the legal cycle.
  const std::vector<std::pair<Phase, std::size_t>> entries = {
      {Phase::Idle, 0},           {Phase::CapacityDone, 2}, {Phase::ForecastSent, 5},
      {Phase::InitialReceived, 6}, {Phase::NeedsSent, 9},     {Phase::FinalReceived, 10}};
  const ReportKind kinds[] = {ReportKind::Capacity, ReportKind::CongestionForecast, ReportKind::InitialSchedule,
                              ReportKind::MitigationNeeds, ReportKind::FinalSchedule};
  const auto cycle = legal_cycle();
  int rejected = 0;
  for (const auto& [phase, prefix] : entries) {
    for (ReportKind k : kinds) {
      ExchangeState st;
      for (std::size_t s = 0; s < prefix; ++s) st.apply(cycle[s].dir, cycle[s].msg);
      ASSERT_EQ(st.phase(), phase);
      const auto next = st.expected();
      // A report that is due now is injected from the wrong side.
      Direction dir = sender(k);
      if (next && next->second == to_string(k) && next->first == dir) dir = opposite(dir);
      const std::size_t before = st.transcript().size();
      EXPECT_THROW(st.apply(dir, report_of(k)), SequenceError) << to_string(phase) << " " << to_string(k);
      EXPECT_EQ(st.phase(), phase);
      EXPECT_EQ(st.transcript().size(), before);
      ++rejected;
    }
  }
  EXPECT_EQ(rejected, 30);
}

TEST(Exchange, DuplicateReportIsRejected) {
  ExchangeState st;
  const auto cycle = legal_cycle();
  for (std::size_t s = 0; s < 2; ++s) st.apply(cycle[s].dir, cycle[s].msg);
  EXPECT_THROW(st.apply(Direction::DepoToTepo, capacity()), SequenceError);
}

TEST(Exchange, ScheduleBeyondReportedCapacityIsASchemaError) {
  ExchangeState st;
  const auto cycle = legal_cycle();
  for (std::size_t s = 0; s < 5; ++s) st.apply(cycle[s].dir, cycle[s].msg);
  InitialSchedule big = initial();
  big.devices[0].charge[1] = 2.5;
  EXPECT_THROW(st.apply(Direction::DepoToTepo, big), SchemaError);
  InitialSchedule stranger = initial();
  stranger.devices[0].storage = 9;
  EXPECT_THROW(st.apply(Direction::DepoToTepo, stranger), SchemaError);
}

TEST(Exchange, NextCycleOnlyAfterCompletion) {
  ExchangeState st;
  EXPECT_THROW(st.next_cycle(), SequenceError);
  for (const Move& m : legal_cycle()) st.apply(m.dir, m.msg);
  st.next_cycle();
  EXPECT_EQ(st.cycle(), 1);
  EXPECT_EQ(st.phase(), Phase::Idle);
  st.apply(Direction::TepoToDepo, Request{ReportKind::Capacity});
  EXPECT_EQ(st.transcript().back().time, (LogicalTime{1, 0}));
}

TEST(Wire, CapacityRoundTrip) {
  const Message m = CapacityReport{{CapacityEntry{3, 2.0, 2.0, 1.0, 0.0, 0.5}}};
  const Envelope back = deserialize(serialize(m, 7));
  EXPECT_EQ(back.version, 1);
  EXPECT_EQ(back.cycle, 7);
  EXPECT_EQ(back.body, m);
}

TEST(Wire, EnvelopeLayout) {
  const auto bytes = serialize(Message{Request{ReportKind::MitigationNeeds}}, 2);
  ASSERT_GT(bytes.size(), 4u);
  const std::size_t length = (std::size_t{bytes[0]} << 24) | (std::size_t{bytes[1]} << 16) |
                             (std::size_t{bytes[2]} << 8) | std::size_t{bytes[3]};
  EXPECT_EQ(length, bytes.size() - 4);
  const std::string text(bytes.begin() + 4, bytes.end());
  EXPECT_EQ(text.find("\"version\""), 1u);
  EXPECT_LT(text.find("\"version\""), text.find("\"kind\""));
  EXPECT_LT(text.find("\"kind\""), text.find("\"cycle\""));
  EXPECT_LT(text.find("\"cycle\""), text.find("\"payload\""));
  EXPECT_NE(text.find("\"request\""), std::string::npos);
}

std::vector<std::uint8_t> frame(const std::string& text) {
  std::vector<std::uint8_t> out = {static_cast<std::uint8_t>(text.size() >> 24),
                                   static_cast<std::uint8_t>(text.size() >> 16),
                                   static_cast<std::uint8_t>(text.size() >> 8), static_cast<std::uint8_t>(text.size())};
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

TEST(Wire, EmptyPayloadIsRejected) {
  EXPECT_THROW(deserialize(frame(R"({"version":1,"kind":"capacity","cycle":0,"payload":{}})")), SchemaError);
  EXPECT_THROW(deserialize(frame("")), SchemaError);
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>{}), SchemaError);
}

TEST(Wire, UnknownKindAndVersionAreRejected) {
  EXPECT_THROW(deserialize(frame(R"({"version":1,"kind":"telemetry","cycle":0,"payload":{}})")), SchemaError);
  EXPECT_THROW(deserialize(frame(R"({"version":2,"kind":"request","cycle":0,"payload":{"report":"capacity"}})")),
               SchemaError);
}

TEST(Wire, EveryTruncationIsASchemaError) {
  const auto bytes = serialize(Message{forecast()}, 1);
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    try {
      deserialize(cut);
      ADD_FAILURE() << "accepted " << n << " bytes";
    } catch (const SchemaError& e) {
      EXPECT_LE(e.offset(), bytes.size());
    }
  }
}

TEST(Wire, PayloadViolationReportsAnOffsetInsideThePayload) {
  const std::string text =
      R"({"version":1,"kind":"mitigation_needs","cycle":0,"payload":{"devices":[{"storage":0,"bus":2,)"
      R"("net_load_min":[5],"net_load_max":[4]}]}})";
  try {
    deserialize(frame(text));
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_GE(e.offset(), 4 + text.find("\"payload\""));
    EXPECT_LE(e.offset(), 4 + text.size());
  }
}

TEST(Wire, RandomizedRoundTrips) {
  std::mt19937 rng(20240611);
  for (int i = 0; i < 1000; ++i) {
    const Message m = random_message(rng);
    const int cycle = static_cast<int>(rng() % 1000);
    const auto bytes = serialize(m, cycle);
    const Envelope back = deserialize(bytes);
    ASSERT_EQ(back.body, m) << "case " << i << " kind " << message_kind(m);
    ASSERT_EQ(back.cycle, cycle);
    ASSERT_EQ(serialize(back), bytes) << "case " << i;
  }
}

TEST(Session, BytesCarryTheCycleBetweenPeers) {
  Session tepo(Session::Side::Tepo, "depo-0");
  Session depo(Session::Side::Depo, "tepo");
  for (const Move& m : legal_cycle()) {
    Session& from = m.dir == Direction::TepoToDepo ? tepo : depo;
    Session& to = m.dir == Direction::TepoToDepo ? depo : tepo;
    EXPECT_EQ(to.receive(from.send(m.msg)), m.msg);
  }
  EXPECT_EQ(tepo.phase(), Phase::FinalReceived);
  EXPECT_EQ(depo.transcript(), tepo.transcript());

  tepo.next_cycle();
  const auto stale = serialize(Message{Request{ReportKind::Capacity}}, 0);
  EXPECT_THROW(depo.receive(stale), SequenceError);  // depo is still completing cycle 0
}

TEST(Session, SendingOutOfTurnLeavesStateAlone) {
  Session depo(Session::Side::Depo, "tepo");
  EXPECT_THROW(depo.send(capacity()), SequenceError);
  EXPECT_EQ(depo.phase(), Phase::Idle);
  EXPECT_TRUE(depo.transcript().empty());
}

TEST(Session, ConcurrentSessionsKeepSeparateTranscripts) {
  constexpr int kPairs = 4;
  std::vector<std::unique_ptr<Session>> tepo, depo;
  for (int k = 0; k < kPairs; ++k) {
    tepo.push_back(std::make_unique<Session>(Session::Side::Tepo, "depo-" + std::to_string(k)));
    depo.push_back(std::make_unique<Session>(Session::Side::Depo, "tepo"));
  }
  std::vector<std::thread> threads;
  for (int k = 0; k < kPairs; ++k)
    threads.emplace_back([&, k] {
      for (int cycle = 0; cycle < 3; ++cycle) {
        for (const Move& m : legal_cycle()) {
          Session& from = m.dir == Direction::TepoToDepo ? *tepo[k] : *depo[k];
          Session& to = m.dir == Direction::TepoToDepo ? *depo[k] : *tepo[k];
          to.receive(from.send(m.msg));
        }
        tepo[k]->next_cycle();
        depo[k]->next_cycle();
      }
    });
  for (auto& t : threads) t.join();
  for (int k = 0; k < kPairs; ++k) {
    const auto tr = tepo[k]->transcript();
    ASSERT_EQ(tr.size(), 30u);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      EXPECT_EQ(tr[i].kind, kExpected[i % 10]);
      EXPECT_EQ(tr[i].time, (LogicalTime{static_cast<int>(i / 10), static_cast<int>(i % 10)}));
    }
  }
}

TEST(Indicator, SignOfNetCharging) {
  EXPECT_EQ(charging_indicator({0, 5, 0, 1e-9}, {0, 0, 3, 0}), (std::vector<int>{0, 1, -1, 0}));
}

struct NeedsCase {
  NetworkModel net;
  Scenario scen;
  ScheduleSet relief;
};

NeedsCase needs_case() {
  NeedsCase c;
  auto d = oracle::single_bus(3, 20.0);
  d.network.storage = {oracle::simple_storage(3, 5.0, 10.0)};
  c.net = d.network;
  c.scen = d.scenario;
  c.relief.intervals = 3;
  c.relief.charge = {{0.0, 0.0, 2.0}};
  c.relief.discharge = {{0.0, 5.0, 0.0}};
  return c;
}

TEST(Needs, ActiveIntervalsArePinned) {
  const NeedsCase c = needs_case();
  const MitigationNeeds n = make_mitigation_needs(c.relief, c.net, c.scen);
  ASSERT_EQ(n.devices.size(), 1u);
  const NeedsEntry& e = n.devices[0];
  EXPECT_EQ(e.bus, 0);
  EXPECT_DOUBLE_EQ(e.net_load_min[1], 15.0);
  EXPECT_DOUBLE_EQ(e.net_load_max[1], 15.0);
  EXPECT_DOUBLE_EQ(e.net_load_min[2], 22.0);
  EXPECT_DOUBLE_EQ(e.net_load_max[2], 22.0);
}

TEST(Needs, IdleIntervalsGetTheCapacityEnvelope) {
  const NeedsCase c = needs_case();
  const NeedsEntry e = make_mitigation_needs(c.relief, c.net, c.scen).devices[0];
  EXPECT_DOUBLE_EQ(e.net_load_min[0], 20.0 - 5.0);
  EXPECT_DOUBLE_EQ(e.net_load_max[0], 20.0 + 5.0);
}

TEST(Needs, BandsAlwaysContainTheScheduledNetLoad) {
  const NeedsCase c = needs_case();
  for (double band : {0.0, 1.0, 3.0, 100.0}) {
    NeedsPolicy p;
    p.active_band = band;
    p.idle_band = band;
    const NeedsEntry e = make_mitigation_needs(c.relief, c.net, c.scen, p).devices[0];
    for (std::size_t t = 0; t < 3; ++t) {
      const double scheduled = c.scen.demand[0][t] - c.relief.discharge[0][t] + c.relief.charge[0][t];
      EXPECT_LE(e.net_load_min[t], scheduled);
      EXPECT_GE(e.net_load_max[t], scheduled);
    }
  }
}

}  // namespace
