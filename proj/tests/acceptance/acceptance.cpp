// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gridstack/error.hpp"
#include "gridstack/orchestrator.hpp"
#include "lp_oracle.hpp"
#include "protocol_cases.hpp"
#include "random_milp.hpp"
#include "schedule_checker.hpp"

using namespace gridstack;
using gridstack::oracle::Fixture;
using gridstack::oracle::load_fixture;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "" : "!") + what);
  }
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.notes.push_back(std::string("!exception: ") + e.what());
  }
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ":";
  for (const auto& n : v.notes) std::cout << " " << n << ";";
  std::cout << std::endl;
}

constexpr std::size_t kLine23 = 2;
constexpr double kLimit23 = 25.0;

double peak_abs(const Profile& p) {
  double m = 0.0;
  for (double v : p) m = std::max(m, std::abs(v));
  return m;
}

// Schedules collected along the way for the checker suite.
struct Checked {
  std::string label;
  NetworkModel net;
  Scenario scen;
  ScheduleSet schedule;
  oracle::CheckOptions options;
};
std::vector<Checked> checked;

void collect(const std::string& label, const DayAheadResult& r, const Scenario& scen) {
  oracle::CheckOptions s1;
  s1.flow_limits = false;
  s1.storage = false;
  checked.push_back({label + "/stage1", r.tepo_network, scen, r.stage1.schedule, s1});
  checked.push_back({label + "/stage2", r.tepo_network, scen, r.stage2.schedule, {}});
  checked.push_back({label + "/stage3", r.tepo_network, scen, r.stage3.schedule, {}});
  checked.push_back({label + "/stage4", r.tepo_network, scen, r.stage4.schedule, {}});
}

Verdict milp_oracle() {
  Verdict v;
  std::mt19937 rng(515);
  const int cases = 60;
  int matched = 0;
  double solver_seconds = 0.0;
  const auto start = Clock::now();
  for (int k = 0; k < cases; ++k) {
    const int binaries = 1 + k % 12;
    const int continuous = 1 + (k * 7) % 30;
    const MilpModel m = oracle::random_milp(rng, binaries, continuous);
    const auto expect = oracle::enumerate_milp(m);
    const auto t0 = Clock::now();
    const MilpSolution s = solve_milp(m, 0.0);
    solver_seconds += since(t0);
    if (expect && std::abs(s.objective - *expect) <= 1e-6 * std::max(1.0, std::abs(*expect)) &&
        m.max_violation(s.values) <= 1e-6)
      ++matched;
  }
  const double total = since(start);
  v.require(matched == cases, std::to_string(matched) + "/" + std::to_string(cases) + " match brute force");
  v.require(total < 60.0, fmt("%.2f s total (solver %.2f s)", total, solver_seconds));
  return v;
}

struct BusRuns {
  DayAheadResult none, bus[3];
  double seconds = 0.0;
};

BusRuns& bus_runs() {
  static BusRuns runs = [] {
    BusRuns r;
    const auto start = Clock::now();
    Fixture f = load_fixture("3bus.json");
    Fixture bare = f;
    bare.net.storage.clear();
    bare.depo.clear();
    r.none = run_day_ahead(bare.net, bare.scen, bare.depo);
    for (int b = 0; b < 3; ++b) {
      Fixture placed = f;
      placed.net.storage[0].bus = b;
      r.bus[b] = run_day_ahead(placed.net, placed.scen, placed.depo);
    }
    r.seconds = since(start);
    collect("3bus/no-ess", r.none, f.scen);
    for (int b = 0; b < 3; ++b) collect("3bus/ess-bus" + std::to_string(b + 1), r.bus[b], f.scen);
    return r;
  }();
  return runs;
}

Verdict three_bus() {
  Verdict v;
  BusRuns& r = bus_runs();
  const double cost[] = {r.bus[0].stage4.schedule.operating_cost(), r.bus[1].stage4.schedule.operating_cost(),
                         r.bus[2].stage4.schedule.operating_cost()};
  const double spill[] = {r.bus[0].stage4.schedule.curtailed_energy, r.bus[1].stage4.schedule.curtailed_energy,
                          r.bus[2].stage4.schedule.curtailed_energy};
  const double none_cost = r.none.stage4.schedule.operating_cost();
  const double none_spill = r.none.stage4.schedule.curtailed_energy;

  // The fixture places the device at Bus 3.
  const DayAheadResult& base = r.bus[2];
  v.require(peak_abs(base.stage1.schedule.flow[kLine23]) > kLimit23,
            fmt("(a) stage-1 peak |F23| %.2f MW > 25", peak_abs(base.stage1.schedule.flow[kLine23])));
  double post = 0.0;
  for (const DayAheadResult* d : {&r.none, &r.bus[0], &r.bus[1], &r.bus[2]})
    post = std::max(post, peak_abs(d->stage4.schedule.flow[kLine23]));
  v.require(post <= kLimit23 + 1e-6, fmt("(b) post-mitigation peak |F23| %.4f MW <= 25", post));
  v.require(none_cost > cost[0] && cost[0] >= cost[1] && cost[0] >= cost[2],
            fmt("(c) cost no-ESS %.2f > Bus1 %.2f >= Bus2 %.2f, Bus3 %.2f", none_cost, cost[0], cost[1], cost[2]));
  v.require(cost[2] <= cost[1] && cost[2] <= cost[0], fmt("(c) Bus3 cheapest %.2f", cost[2]));
  v.require(spill[1] <= spill[0] && spill[1] <= spill[2],
            fmt("(c) Bus2 lowest spill %.3f MWh (Bus1 %.3f, Bus3 %.3f)", spill[1], spill[0], spill[2]));
  const double cut = none_spill > 0.0 ? (none_spill - spill[2]) / none_spill : 0.0;
  v.require(cut >= 0.15, fmt("(d) Bus3 curtailment %.3f vs %.3f MWh, cut %.1f%% >= 15%%", spill[2], none_spill,
                             100.0 * cut));
  v.require(r.seconds < 300.0, fmt("runtime %.1f s < 300", r.seconds));
  return v;
}

Verdict benchmark() {
  Verdict v;
  const Fixture f = load_fixture("3bus_benchmark.json");
  RunOptions o;
  o.jobs = 2;
  const BenchmarkResult b = run_benchmark(f.net, f.scen, f.depo, o);
  collect("benchmark", b.day_ahead, f.scen);
  checked.push_back({"benchmark/ncuc+", b.day_ahead.tepo_network, f.scen, b.ncuc_plus.schedule, {}});
  const double ms = b.multistage_reduction();
  const double nc = b.ncuc_plus_reduction();
  const double rel = nc != 0.0 ? std::abs(ms - nc) / std::abs(nc) : std::abs(ms);
  v.require(nc > 0.0, fmt("NCUC+ reduction %.3f > 0", nc));
  v.require(rel <= 0.01, fmt("stage-4 reduction %.3f vs NCUC+ %.3f, gap %.3f%% <= 1%%", ms, nc, 100.0 * rel));
  const double zero_rel = std::abs(b.ncuc_plus_zero_cost - b.no_storage_cost) / std::max(1.0, b.no_storage_cost);
  v.require(zero_rel <= 1e-3, fmt("NCUC+ zero storage %.3f vs stage-4 no storage %.3f, diff %.4f%% <= 0.1%%",
                                  b.ncuc_plus_zero_cost, b.no_storage_cost, 100.0 * zero_rel));
  return v;
}

struct HourAheadRuns {
  Fixture base;
  Scenario ramp;
  HourAheadResult unchanged, ramped;
};

HourAheadRuns& hour_ahead_runs() {
  static HourAheadRuns h = [] {
    HourAheadRuns r;
    r.base = load_fixture("3bus.json");
    r.ramp = load_fixture("3bus_wind_ramp.json").scen;
    const DayAheadResult& da = bus_runs().bus[2];
    r.unchanged = run_hour_ahead(r.base.net, r.base.scen, da, r.base.depo);
    r.ramped = run_hour_ahead(r.base.net, r.ramp, da, r.base.depo);
    checked.push_back({"hour-ahead/unchanged", da.tepo_network, r.base.scen, r.unchanged.committed, {}});
    checked.push_back({"hour-ahead/wind-ramp", da.tepo_network, r.ramp, r.ramped.committed, {}});
    return r;
  }();
  return h;
}

Verdict protocol() {
  Verdict v;
  const std::vector<std::string> script = {
      "request:capacity",    "capacity",         "request:initial_schedule", "request:congestion_forecast",
      "congestion_forecast", "initial_schedule", "request:final_schedule",   "request:mitigation_needs",
      "mitigation_needs",    "final_schedule"};
  const auto& tr = bus_runs().bus[2].transcripts.at(0);
  bool same = tr.size() == script.size();
  int exchanges = 0;
  for (std::size_t k = 0; same && k < tr.size(); ++k) {
    same = tr[k].kind == script[k] && tr[k].time == LogicalTime{0, static_cast<int>(k)};
    if (tr[k].direction == Direction::TepoToDepo && tr[k].kind.rfind("request:", 0) == 0) ++exchanges;
  }
  v.require(same && exchanges == 3,
            std::to_string(tr.size()) + " messages, " + std::to_string(exchanges) + " exchanges in the day-ahead cycle");

  const std::vector<std::pair<Phase, std::size_t>> entries = {
      {Phase::Idle, 0},            {Phase::CapacityDone, 2}, {Phase::ForecastSent, 5},
      {Phase::InitialReceived, 6}, {Phase::NeedsSent, 9},    {Phase::FinalReceived, 10}};
  const ReportKind kinds[] = {ReportKind::Capacity, ReportKind::CongestionForecast, ReportKind::InitialSchedule,
                              ReportKind::MitigationNeeds, ReportKind::FinalSchedule};
  const auto cycle = oracle::legal_cycle();
  int injected = 0, rejected = 0;
  for (const auto& [phase, prefix] : entries)
    for (ReportKind k : kinds) {
      ExchangeState st;
      for (std::size_t s = 0; s < prefix; ++s) st.apply(cycle[s].dir, cycle[s].msg);
      Direction dir = oracle::sender(k);
      const auto next = st.expected();
      if (next && next->second == to_string(k) && next->first == dir) dir = oracle::opposite(dir);
      ++injected;
      try {
        st.apply(dir, oracle::report_of(k));
      } catch (const SequenceError&) {
        if (st.phase() == phase && st.transcript().size() == prefix) ++rejected;
      }
    }
  v.require(injected == 30 && rejected == injected,
            std::to_string(rejected) + "/" + std::to_string(injected) + " out-of-order injections rejected");

  std::mt19937 rng(20240611);
  int round_trips = 0;
  for (int i = 0; i < 1000; ++i) {
    const Message m = oracle::random_message(rng);
    const int cycle_no = static_cast<int>(rng() % 1000);
    const auto bytes = serialize(m, cycle_no);
    const Envelope back = deserialize(bytes);
    if (back.body == m && back.cycle == cycle_no && serialize(back) == bytes) ++round_trips;
  }
  v.require(round_trips == 1000, std::to_string(round_trips) + "/1000 serialization round-trips");
  return v;
}

Verdict hour_ahead() {
  Verdict v;
  HourAheadRuns& h = hour_ahead_runs();
  const DayAheadResult& da = bus_runs().bus[2];
  const double gap = RunOptions{}.solver.rel_gap;
  const double da_cost = da.stage4.schedule.operating_cost();
  const double ha_cost = h.unchanged.committed.operating_cost();
  v.require(std::abs(ha_cost - da_cost) <= gap * std::abs(da_cost),
            fmt("unchanged forecast: hour-ahead %.3f vs day-ahead %.3f (gap %.0e)", ha_cost, da_cost, gap));
  double moved = 0.0;
  for (std::size_t t = 0; t < h.ramp.availability[0].size(); ++t) {
    if (h.ramp.availability[0][t] == h.base.scen.availability[0][t]) continue;
    moved += std::abs(h.ramped.committed.charge[0][t] - da.agreed.charge[0][t]) +
             std::abs(h.ramped.committed.discharge[0][t] - da.agreed.discharge[0][t]);
  }
  v.require(moved > 1e-3, fmt("wind ramp: ESS moves %.3f MW over the ramp intervals", moved));
  const double end = h.ramped.committed.soc[0].back();
  const double target = h.base.net.storage[0].soc_final_target;
  v.require(std::abs(end - target) <= 1e-6, fmt("terminal SOC %.6f = target %.6f", end, target));
  return v;
}

Verdict checker_suite() {
  Verdict v;
  for (const char* name : {"3bus_wind_ramp.json", "two_depo.json"}) {
    const Fixture f = load_fixture(name);
    const DayAheadResult r = run_day_ahead(f.net, f.scen, f.depo);
    collect(name, r, f.scen);
  }
  hour_ahead_runs();
  int clean = 0;
  for (const Checked& c : checked) {
    const auto rep = oracle::check_schedule(c.net, c.scen, c.schedule, c.options);
    if (oracle::clean(rep, 1e-6, c.scen.intervals))
      ++clean;
    else
      v.require(false, c.label + " " + rep.summary());
  }
  v.require(clean == static_cast<int>(checked.size()),
            std::to_string(clean) + "/" + std::to_string(checked.size()) + " schedules clean");
  return v;
}

Verdict null_congestion() {
  Verdict v;
  for (const char* name : {"3bus.json", "two_depo.json"}) {
    Fixture f = load_fixture(name);
    for (Line& l : f.net.lines) l.monitored = false;
    for (DepoConfig& c : f.depo) c.price_profile.clear();
    const DayAheadResult r = run_day_ahead(f.net, f.scen, f.depo);
    const double a2 = r.stage2.adjustments ? r.stage2.adjustments->max_abs() : -1.0;
    const double a3 = r.stage3.adjustments ? r.stage3.adjustments->max_abs() : -1.0;
    v.require(a2 == 0.0 && a3 == 0.0, std::string(name) + fmt(" max |adjustment| stage2 %g stage3 %g", a2, a3));
  }
  return v;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  report(1, "milp-oracle", milp_oracle);
  report(2, "three-bus", three_bus);
  report(3, "benchmark", benchmark);
  report(4, "checker", checker_suite);
  report(5, "protocol", protocol);
  report(6, "hour-ahead", hour_ahead);
  report(7, "null-congestion", null_congestion);
  std::cout << failures << " of 7 criteria failed" << fmt(", %.1f s", since(start)) << std::endl;
  return failures == 0 ? 0 : 1;
}
