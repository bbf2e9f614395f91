#include "gridstack/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <memory>

#include "gridstack/error.hpp"

namespace gridstack {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string stage_line(const std::string& label, int window, const StageResult& r) {
  std::string line = "stage=" + label;
  if (window >= 0) line += " window=" + std::to_string(window);
  line += " objective=" + num(r.schedule.objective) + " operating_cost=" + num(r.schedule.operating_cost()) +
          " gap=" + num(r.relative_gap) + " nodes=" + std::to_string(r.nodes) + " seconds=" + num(r.seconds);
  return line;
}

// Owners plus the TEPO end of each session. Every message crosses the wire
// format so both ends validate it.
class Exchange {
 public:
  Exchange(const NetworkModel& net, const std::vector<DepoConfig>& configs) {
    for (const auto& dev : net.storage) {
      auto it = std::find_if(configs.begin(), configs.end(), [&](const DepoConfig& c) { return c.storage == dev.id; });
      DepoConfig cfg = it != configs.end() ? *it : DepoConfig{dev.id, 0.0, {}, std::nullopt, std::nullopt};
      agents_.push_back(std::make_unique<DepoAgent>(dev, std::move(cfg)));
      tepo_.push_back(std::make_unique<Session>(Session::Side::Tepo, "depo-" + std::to_string(dev.id)));
    }
  }

  std::size_t size() const { return agents_.size(); }
  DepoAgent& agent(std::size_t k) { return *agents_[k]; }

  Message to_depo(std::size_t k, const Message& m) { return agents_[k]->session().receive(tepo_[k]->send(m)); }
  Message to_tepo(std::size_t k, const Message& m) { return tepo_[k]->receive(agents_[k]->session().send(m)); }

  void next_cycle() {
    for (std::size_t k = 0; k < size(); ++k) {
      tepo_[k]->next_cycle();
      agents_[k]->session().next_cycle();
    }
  }

  std::vector<std::vector<TranscriptEntry>> transcripts() const {
    std::vector<std::vector<TranscriptEntry>> out;
    for (const auto& s : tepo_) out.push_back(s->transcript());
    return out;
  }

  std::vector<std::string> logs() const {
    std::vector<std::string> out;
    for (const auto& a : agents_) out.insert(out.end(), a->log().begin(), a->log().end());
    return out;
  }

  // Storage as TEPO may use it: what each owner offers.
  NetworkModel tepo_view(const NetworkModel& net) const {
    NetworkModel out = net;
    for (std::size_t k = 0; k < agents_.size(); ++k) out.storage[k] = agents_[k]->offered();
    return out;
  }

 private:
  std::vector<std::unique_ptr<DepoAgent>> agents_;
  std::vector<std::unique_ptr<Session>> tepo_;
};

struct CycleInputs {
  const NetworkModel& net;  // window network, storage as offered
  const Scenario& scen;
  ScheduleSet baseline;
  EssSchedule initial;
  bool terminal = true;
  /// Agreed day-ahead storage schedule over the window (hour-ahead only).
  const EssSchedule* prior = nullptr;
  int window = -1;
};

struct CycleOutputs {
  StageResult stage2, stage3, stage4;
  ExchangeRecord exchange;
  EssSchedule agreed;
};

CycleOutputs run_cycle(Exchange& ex, const CycleInputs& in, const RunOptions& opts, std::vector<std::string>& log) {
  const std::size_t S = in.net.storage.size();
  const double dt = in.scen.step_hours;
  const int T = in.scen.intervals;
  CycleOutputs out;
  ExchangeRecord& rec = out.exchange;

  for (std::size_t k = 0; k < S; ++k) {
    ex.to_depo(k, Request{ReportKind::Capacity});
    const CapacityEntry cap = capacity_of(in.net.storage[k]);
    ex.agent(k).note("capacity", "charge_max=" + num(cap.charge_max) + " soc_max=" + num(cap.soc_max));
    ex.to_tepo(k, CapacityReport{{cap}});
    rec.capacity.devices.push_back(cap);
  }

  StageInputs s2in{in.baseline, in.initial, true, in.terminal};
  out.stage2 = solve_stage(build_stage2(in.net, in.scen, s2in), opts.solver);
  log.push_back(stage_line(stage_tag(StageKind::Stage2), in.window, out.stage2));

  EssSchedule proposals = EssSchedule::zeros(S, T);
  for (std::size_t k = 0; k < S; ++k) {
    const StorageDevice& dev = in.net.storage[k];
    ex.to_depo(k, Request{ReportKind::InitialSchedule});
    ex.to_tepo(k, Request{ReportKind::CongestionForecast});
    ForecastEntry fc{dev.id, dev.bus, in.scen.demand.at(static_cast<std::size_t>(dev.bus)),
                     charging_indicator(out.stage2.schedule.charge[k], out.stage2.schedule.discharge[k])};
    ex.to_depo(k, CongestionForecast{{fc}});
    rec.forecast.devices.push_back(fc);

    std::optional<ScheduleEntry> fallback;
    if (in.prior) fallback = ScheduleEntry{dev.id, in.prior->charge[k], in.prior->discharge[k]};
    Proposal p = propose_initial(fc, dev, ex.agent(k).config(), dt, in.terminal, fallback ? &*fallback : nullptr);
    ex.agent(k).note("proposal", std::string("truncated=") + (p.truncated ? "true" : "false"));
    ex.to_tepo(k, InitialSchedule{{p.schedule}, p.truncated});
    rec.proposals.devices.push_back(p.schedule);
    rec.proposals.truncated = rec.proposals.truncated || p.truncated;
    proposals.charge[k] = p.schedule.charge;
    proposals.discharge[k] = p.schedule.discharge;
  }

  StageInputs s3in{in.baseline, proposals, true, in.terminal};
  out.stage3 = solve_stage(build_stage3(in.net, in.scen, s3in), opts.solver);
  log.push_back(stage_line(stage_tag(StageKind::Stage3), in.window, out.stage3));

  rec.needs = make_mitigation_needs(out.stage3.schedule, in.net, in.scen, opts.needs);
  out.agreed = EssSchedule::zeros(S, T);
  for (std::size_t k = 0; k < S; ++k) {
    const StorageDevice& dev = in.net.storage[k];
    ex.to_depo(k, Request{ReportKind::FinalSchedule});
    ex.to_tepo(k, Request{ReportKind::MitigationNeeds});
    ex.to_depo(k, MitigationNeeds{{rec.needs.devices[k]}});
    ScheduleEntry fin;
    try {
      fin = finalize(rec.needs.devices[k], in.scen.demand.at(static_cast<std::size_t>(dev.bus)),
                     rec.proposals.devices[k], dev, dt, in.terminal);
      ex.agent(k).note("final", "status=ok");
    } catch (const InfeasibleScheduleError& e) {
      ex.agent(k).note("final", std::string("status=fallback reason=\"") + e.what() + "\"");
      if (opts.strict) throw;
      fin = ScheduleEntry{dev.id, out.stage3.schedule.charge[k], out.stage3.schedule.discharge[k]};
      rec.fallbacks.push_back(dev.id);
    }
    ex.to_tepo(k, FinalSchedule{{fin}});
    rec.final.devices.push_back(fin);
    out.agreed.charge[k] = fin.charge;
    out.agreed.discharge[k] = fin.discharge;
  }

  StageModel stage4 = build_stage4(in.net, in.scen, out.agreed);
  hint_from(stage4, out.stage3.schedule);
  out.stage4 = solve_stage(stage4, opts.solver);
  log.push_back(stage_line(stage_tag(StageKind::Stage4), in.window, out.stage4));
  return out;
}

// Copies interval `t` of `src` onto the end of `dst`.
void append_interval(ScheduleSet& dst, const ScheduleSet& src, int t) {
  const auto ts = static_cast<std::size_t>(t);
  auto push = [ts](auto& d, const auto& s) {
    d.resize(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) d[a].push_back(s[a][ts]);
  };
  push(dst.commitment, src.commitment);
  push(dst.startup, src.startup);
  push(dst.shutdown, src.shutdown);
  push(dst.power, src.power);
  dst.block_power.resize(src.block_power.size());
  for (std::size_t i = 0; i < src.block_power.size(); ++i) push(dst.block_power[i], src.block_power[i]);
  push(dst.curtailment, src.curtailment);
  push(dst.charge, src.charge);
  push(dst.discharge, src.discharge);
  push(dst.soc, src.soc);
  push(dst.flow, src.flow);
  push(dst.angle, src.angle);
  dst.step_hours = src.step_hours;
  ++dst.intervals;
}

EssSchedule slice_ess(const EssSchedule& e, int begin, int length) {
  EssSchedule out;
  for (const auto& row : e.charge) out.charge.emplace_back(row.begin() + begin, row.begin() + begin + length);
  for (const auto& row : e.discharge) out.discharge.emplace_back(row.begin() + begin, row.begin() + begin + length);
  return out;
}

}  // namespace

NetworkModel stage_initial_conditions(const NetworkModel& net, const ScheduleSet& committed, int begin, int length) {
  NetworkModel out = slice_profiles(net, begin, length);
  if (begin == 0) return out;
  if (committed.intervals < begin) throw Error("committed schedule is shorter than the window start");
  const auto last = static_cast<std::size_t>(begin - 1);
  for (std::size_t i = 0; i < out.conventional.size(); ++i) {
    ConventionalGenerator& g = out.conventional[i];
    const int state = committed.commitment[i][last];
    int run = 0;
    for (int t = begin - 1; t >= 0 && committed.commitment[i][static_cast<std::size_t>(t)] == state; --t) ++run;
    if (run == begin && (g.initial_commit ? 1 : 0) == state) run += state ? g.initial_up_time : g.initial_down_time;
    g.initial_commit = state == 1;
    g.initial_up_time = state ? run : 0;
    g.initial_down_time = state ? 0 : run;
    g.initial_power = committed.power[i][last];
  }
  for (std::size_t k = 0; k < out.storage.size(); ++k) out.storage[k].soc_initial = committed.soc[k][last];
  return out;
}

void price_schedule(const NetworkModel& net, ScheduleSet& s) {
  const double dt = s.step_hours;
  s.generation_cost = s.curtailment_cost = s.storage_cost = s.curtailed_energy = 0.0;
  for (std::size_t i = 0; i < net.conventional.size(); ++i) {
    const ConventionalGenerator& g = net.conventional[i];
    for (std::size_t t = 0; t < static_cast<std::size_t>(s.intervals); ++t) {
      s.generation_cost += g.no_load_cost * s.commitment[i][t] + g.startup_cost * s.startup[i][t];
      for (std::size_t b = 0; b < g.blocks.size(); ++b)
        s.generation_cost += g.blocks[b].marginal_cost * s.block_power[i][b][t] * dt;
    }
  }
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (double x : s.curtailment[r]) {
      s.curtailment_cost += net.renewables[r].curtail_cost * x * dt;
      s.curtailed_energy += x * dt;
    }
  for (std::size_t k = 0; k < net.storage.size(); ++k)
    for (std::size_t t = 0; t < static_cast<std::size_t>(s.intervals); ++t)
      s.storage_cost += net.storage[k].stage2_penalty * dt * (s.charge[k][t] + s.discharge[k][t]);
}

double total_cost(const NetworkModel& net, const ScheduleSet& s) {
  ScheduleSet priced = s;
  price_schedule(net, priced);
  return priced.operating_cost() + priced.storage_cost;
}

DayAheadResult run_day_ahead(const NetworkModel& net, const Scenario& scen, const std::vector<DepoConfig>& depo,
                             const RunOptions& options) {
  const auto start = Clock::now();
  DayAheadResult out;
  Exchange ex(net, depo);
  out.tepo_network = ex.tepo_view(net);

  out.stage1 = solve_stage(build_stage1(out.tepo_network, scen), options.solver);
  out.log.push_back(stage_line(stage_tag(StageKind::Stage1), -1, out.stage1));

  const std::size_t S = net.storage.size();
  CycleInputs in{out.tepo_network, scen, out.stage1.schedule, EssSchedule::zeros(S, scen.intervals)};
  CycleOutputs cyc = run_cycle(ex, in, options, out.log);
  out.stage2 = std::move(cyc.stage2);
  out.stage3 = std::move(cyc.stage3);
  out.stage4 = std::move(cyc.stage4);
  out.exchange = std::move(cyc.exchange);
  out.agreed = std::move(cyc.agreed);
  out.transcripts = ex.transcripts();
  for (auto& line : ex.logs()) out.log.push_back(std::move(line));
  out.seconds = seconds_since(start);
  return out;
}

HourAheadResult run_hour_ahead(const NetworkModel& net, const Scenario& scen, const DayAheadResult& day_ahead,
                               const std::vector<DepoConfig>& depo, const RunOptions& options) {
  const auto start = Clock::now();
  const int T = scen.intervals;
  if (day_ahead.stage4.schedule.intervals != T) throw Error("day-ahead schedule does not cover the horizon");
  if (options.lookahead < 1) throw Error("lookahead must be at least one interval");

  HourAheadResult out;
  Exchange ex(net, depo);
  const NetworkModel tepo = ex.tepo_view(net);
  ScheduleSet& committed = out.committed;
  committed.step_hours = scen.step_hours;

  for (int tau = 0; tau < T; ++tau) {
    const int len = std::min(options.lookahead, T - tau);
    if (tau > 0) ex.next_cycle();
    const NetworkModel wnet = stage_initial_conditions(tepo, committed, tau, len);
    const Scenario wscen = slice(scen, tau, len);
    const EssSchedule prior = slice_ess(day_ahead.agreed, tau, len);
    CycleInputs in{wnet, wscen, slice(day_ahead.stage4.schedule, tau, len), prior, tau + len == T, &prior, tau};
    CycleOutputs cyc = run_cycle(ex, in, options, out.log);
    append_interval(committed, cyc.stage4.schedule, 0);
    out.window_agreements.push_back(std::move(cyc.agreed));
    out.exchanges.push_back(std::move(cyc.exchange));
  }
  price_schedule(tepo, committed);
  committed.objective = committed.operating_cost();
  out.transcripts = ex.transcripts();
  for (auto& line : ex.logs()) out.log.push_back(std::move(line));
  out.seconds = seconds_since(start);
  return out;
}

BenchmarkResult run_benchmark(const NetworkModel& net, const Scenario& scen, const std::vector<DepoConfig>& depo,
                              const RunOptions& options) {
  BenchmarkResult out;
  const std::size_t S = net.storage.size();
  const auto launch = options.jobs > 1 ? std::launch::async : std::launch::deferred;

  // The co-optimized runs see the same offered storage as the pipeline.
  NetworkModel offered = net;
  for (std::size_t k = 0; k < S; ++k) {
    auto it = std::find_if(depo.begin(), depo.end(), [&](const DepoConfig& c) { return c.storage == net.storage[k].id; });
    if (it != depo.end()) offered.storage[k] = offered_device(net.storage[k], *it);
  }
  NetworkModel idle = offered;
  for (auto& d : idle.storage) d.charge_max = d.discharge_max = 0.0;

  // Each co-optimized run starts from the schedule it is compared against,
  // which is feasible for it, so a gap stop can never leave it worse.
  auto with_storage = std::async(launch, [&] {
    DayAheadResult da = run_day_ahead(net, scen, depo, options);
    StageModel model = build_ncuc_plus(offered, scen);
    hint_from(model, da.stage4.schedule);
    StageResult ncuc = solve_stage(model, options.solver);
    return std::make_pair(std::move(da), std::move(ncuc));
  });
  auto without_storage = std::async(launch, [&] {
    StageResult none = solve_stage(build_stage4(offered, scen, EssSchedule::zeros(S, scen.intervals)), options.solver);
    StageModel model = build_ncuc_plus(idle, scen);
    hint_from(model, none.schedule);
    StageResult zero = solve_stage(model, options.solver);
    return std::make_pair(std::move(none), std::move(zero));
  });

  auto [da, ncuc] = with_storage.get();
  auto [none, zero] = without_storage.get();
  out.day_ahead = std::move(da);
  out.ncuc_plus = std::move(ncuc);

  out.no_storage_cost = total_cost(offered, none.schedule);
  out.multistage_cost = total_cost(offered, out.day_ahead.stage4.schedule);
  out.ncuc_plus_cost = total_cost(offered, out.ncuc_plus.schedule);
  out.ncuc_plus_zero_cost = total_cost(idle, zero.schedule);
  out.log = out.day_ahead.log;
  out.log.push_back(stage_line("stage4-idle", -1, none));
  out.log.push_back(stage_line(stage_tag(StageKind::NcucPlus), -1, out.ncuc_plus));
  out.log.push_back(stage_line("ncuc+-idle", -1, zero));
  return out;
}

}  // namespace gridstack
