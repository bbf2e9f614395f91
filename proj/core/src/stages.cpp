#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>

#include "gridstack/error.hpp"
#include "gridstack/stages.hpp"

namespace gridstack {

const char* stage_tag(StageKind kind) {
  switch (kind) {
    case StageKind::Stage1: return "stage1";
    case StageKind::Stage2: return "stage2";
    case StageKind::Stage3: return "stage3";
    case StageKind::Stage4: return "stage4";
    case StageKind::NcucPlus: return "ncuc+";
  }
  return "stage";
}

double stage3_storage_penalty(const StorageDevice& device, double proposed_charge, double proposed_discharge,
                              double charge_up, double charge_down, double discharge_up, double discharge_down) {
  const Stage3Penalties& r = device.stage3_penalties;
  const bool chi_c = proposed_charge > 0.0;
  const bool chi_d = proposed_discharge > 0.0;
  if (!chi_c && !chi_d)
    return device.default_penalty * (charge_up + charge_down + discharge_up + discharge_down);
  double pen = 0.0;
  if (chi_c) pen += r.charge_increase * charge_up + r.charge_decrease * charge_down + r.discharge_reversal * discharge_up;
  if (chi_d) pen += r.discharge_increase * discharge_up + r.discharge_decrease * discharge_down + r.charge_reversal * charge_up;
  return pen;
}

namespace {

std::string idx(const char* base, std::size_t a, int t) {
  return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(t) + "]";
}

std::string idx(const char* base, std::size_t a, std::size_t b, int t) {
  return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(t) + "]";
}

Series<int> grid(std::size_t n, int T) { return Series<int>(n, std::vector<int>(static_cast<std::size_t>(T), -1)); }

// Shared machinery for every stage. Each stage is the unit commitment core
// plus some mix of flow limits, storage terms and objective.
class Builder {
 public:
  Builder(StageKind kind, const NetworkModel& net, const Scenario& scen)
      : net_(net), scen_(scen), T_(scen.intervals), dt_(scen.step_hours) {
    if (T_ <= 0) throw ModelBuildError("scenario has no intervals");
    if (scen.demand.size() != net.buses.size()) throw ModelBuildError("demand profiles do not match the bus count");
    if (scen.availability.size() != net.renewables.size())
      throw ModelBuildError("availability profiles do not match the renewable count");
    for (const auto& d : scen.demand)
      if (static_cast<int>(d.size()) != T_) throw ModelBuildError("demand profile length differs from the horizon");
    for (const auto& a : scen.availability)
      if (static_cast<int>(a.size()) != T_) throw ModelBuildError("availability profile length differs from the horizon");
    for (const auto& f : net.fixed)
      if (static_cast<int>(f.output.size()) != T_) throw ModelBuildError("fixed generation profile length differs");
    m_.kind = kind;
    m_.network = net;
    m_.scenario = scen;
    const std::size_t I = net.conventional.size(), R = net.renewables.size(), S = net.storage.size();
    m_.v = m_.y = m_.z = m_.p = grid(I, T_);
    m_.pb.resize(I);
    for (std::size_t i = 0; i < I; ++i) m_.pb[i] = grid(net.conventional[i].blocks.size(), T_);
    m_.x = grid(R, T_);
    m_.flow = grid(net.lines.size(), T_);
    m_.angle = grid(net.buses.size(), T_);
    m_.pc = m_.pd = m_.soc = m_.nu = grid(S, T_);
    m_.dpb_up.resize(I);
    m_.dpb_down.resize(I);
    m_.dx_up = m_.dx_down = grid(R, T_);
    m_.dc_up = m_.dc_down = m_.dd_up = m_.dd_down = m_.psi = m_.zeta = grid(S, T_);
    m_.storage_input = EssSchedule::zeros(S, T_);
  }

  MilpModel& milp() { return m_.milp; }

  // Binary logic, minimum up/down times and commitment costs.
  void commitment() {
    for (std::size_t i = 0; i < net_.conventional.size(); ++i) {
      const ConventionalGenerator& g = net_.conventional[i];
      const auto [must_up, must_down] = derive_initial_updown(g);
      const int pinned = must_up + must_down;
      const double v0 = g.initial_commit ? 1.0 : 0.0;
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const int v = milp().add_binary(idx("v", i, t), g.no_load_cost);
        const int y = milp().add_binary(idx("y", i, t), g.startup_cost);
        const int z = milp().add_binary(idx("z", i, t));
        m_.v[i][ts] = v;
        m_.y[i][ts] = y;
        m_.z[i][ts] = z;
        if (t < pinned) milp().set_bounds(v, v0, v0);
        if (t == 0) {
          milp().add_constraint(idx("logic", i, t), {{y, 1.0}, {z, -1.0}, {v, -1.0}}, Sense::Equal, -v0);
        } else {
          milp().add_constraint(idx("logic", i, t), {{y, 1.0}, {z, -1.0}, {v, -1.0}, {m_.v[i][ts - 1], 1.0}},
                                Sense::Equal, 0.0);
        }
        milp().add_constraint(idx("onoff", i, t), {{y, 1.0}, {z, 1.0}}, Sense::LessEqual, 1.0);
      }
      // A window of one is implied by the logic rows.
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        if (g.min_up > 1) {
          std::vector<Term> terms{{m_.v[i][ts], -1.0}};
          for (int tau = std::max(0, t - g.min_up + 1); tau <= t; ++tau)
            terms.push_back({m_.y[i][static_cast<std::size_t>(tau)], 1.0});
          milp().add_constraint(idx("minup", i, t), std::move(terms), Sense::LessEqual, 0.0);
        }
        if (g.min_down > 1) {
          std::vector<Term> terms{{m_.v[i][ts], 1.0}};
          for (int tau = std::max(0, t - g.min_down + 1); tau <= t; ++tau)
            terms.push_back({m_.z[i][static_cast<std::size_t>(tau)], 1.0});
          milp().add_constraint(idx("mindown", i, t), std::move(terms), Sense::LessEqual, 1.0);
        }
      }
    }
  }

  // Block and unit output with their commitment-coupled bounds. Block energy
  // is priced when `priced`.
  void generation(bool priced) {
    for (std::size_t i = 0; i < net_.conventional.size(); ++i) {
      const ConventionalGenerator& g = net_.conventional[i];
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const int v = m_.v[i][ts];
        const double pmax = g.p_max_at(t);
        const int p = milp().add_continuous(idx("p", i, t), 0.0, std::max(pmax, 0.0));
        m_.p[i][ts] = p;
        std::vector<Term> sum{{p, 1.0}};
        for (std::size_t b = 0; b < g.blocks.size(); ++b) {
          const CostBlock& blk = g.blocks[b];
          const int pb = milp().add_continuous(idx("pb", i, b, t), 0.0, blk.block_max,
                                               priced ? blk.marginal_cost * dt_ : 0.0);
          m_.pb[i][b][ts] = pb;
          milp().add_constraint(idx("block", i, b, t), {{pb, 1.0}, {v, -blk.block_max}}, Sense::LessEqual, 0.0);
          sum.push_back({pb, -1.0});
        }
        milp().add_constraint(idx("blocksum", i, t), std::move(sum), Sense::Equal, 0.0);
        milp().add_constraint(idx("pmin", i, t), {{p, 1.0}, {v, -g.p_min}}, Sense::GreaterEqual, 0.0);
        milp().add_constraint(idx("pmax", i, t), {{p, 1.0}, {v, -pmax}}, Sense::LessEqual, 0.0);
      }
      // Ramp rows cannot bind when the limit covers the full output range.
      double top = g.p_max;
      for (double v : g.p_max_profile) top = std::max(top, v);
      const bool up = g.ramp_up < top;
      const bool down = g.ramp_down < top;
      for (int t = 0; t < T_ && (up || down); ++t) {
        const auto ts = static_cast<std::size_t>(t);
        std::vector<Term> terms{{m_.p[i][ts], 1.0}};
        double shift = 0.0;
        if (t == 0) {
          shift = g.initial_power;
        } else {
          terms.push_back({m_.p[i][ts - 1], -1.0});
        }
        if (up) milp().add_constraint(idx("rampup", i, t), terms, Sense::LessEqual, g.ramp_up + shift);
        if (down) milp().add_constraint(idx("rampdown", i, t), terms, Sense::GreaterEqual, -g.ramp_down + shift);
      }
    }
  }

  void renewables(bool priced) {
    for (std::size_t r = 0; r < net_.renewables.size(); ++r) {
      const RenewablePlant& w = net_.renewables[r];
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        m_.x[r][ts] = milp().add_continuous(idx("x", r, t), 0.0, scen_.availability[r][ts],
                                            priced ? w.curtail_cost * dt_ : 0.0);
      }
    }
  }

  void network(bool limits) {
    const int ref = net_.reference_bus();
    for (std::size_t n = 0; n < net_.buses.size(); ++n)
      for (int t = 0; t < T_; ++t) {
        const bool is_ref = static_cast<int>(n) == ref;
        m_.angle[n][static_cast<std::size_t>(t)] =
            milp().add_continuous(idx("theta", n, t), is_ref ? 0.0 : -std::numbers::pi, is_ref ? 0.0 : std::numbers::pi);
      }
    for (std::size_t l = 0; l < net_.lines.size(); ++l) {
      const Line& line = net_.lines[l];
      const bool bounded = limits && line.monitored;
      const double susceptance = net_.mva_base / line.reactance;
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const int f = milp().add_continuous(idx("F", l, t), bounded ? line.flow_min : -kInf,
                                            bounded ? line.flow_max : kInf);
        m_.flow[l][ts] = f;
        milp().add_constraint(idx("dcflow", l, t),
                              {{f, 1.0},
                               {m_.angle[static_cast<std::size_t>(line.from_bus)][ts], -susceptance},
                               {m_.angle[static_cast<std::size_t>(line.to_bus)][ts], susceptance}},
                              Sense::Equal, 0.0);
      }
    }
  }

  // Charge, discharge and SOC as decisions. `utilization` prices throughput.
  void storage(bool terminal, bool utilization) {
    for (std::size_t s = 0; s < net_.storage.size(); ++s) {
      const StorageDevice& d = net_.storage[s];
      const double cost = utilization ? d.stage2_penalty * dt_ : 0.0;
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const int pc = milp().add_continuous(idx("pc", s, t), 0.0, d.charge_max, cost);
        const int pd = milp().add_continuous(idx("pd", s, t), 0.0, d.discharge_max, cost);
        const int nu = milp().add_binary(idx("nu", s, t));
        m_.pc[s][ts] = pc;
        m_.pd[s][ts] = pd;
        m_.nu[s][ts] = nu;
        milp().add_constraint(idx("chargecap", s, t), {{pc, 1.0}, {nu, -d.charge_max}}, Sense::LessEqual, 0.0);
        milp().add_constraint(idx("dischargecap", s, t), {{pd, 1.0}, {nu, d.discharge_max}}, Sense::LessEqual,
                              d.discharge_max);
        double lo = d.soc_min[ts], hi = d.soc_max[ts];
        if (terminal && t == T_ - 1) {
          if (d.soc_final_target < lo - 1e-9 || d.soc_final_target > hi + 1e-9)
            throw ModelBuildError("storage " + std::to_string(d.id) + ": final SOC target outside the envelope");
          lo = hi = d.soc_final_target;
        }
        const int e = milp().add_continuous(idx("E", s, t), lo, hi);
        m_.soc[s][ts] = e;
        std::vector<Term> terms{{e, 1.0}, {pc, -dt_ * d.eta_c}, {pd, dt_ / d.eta_d}};
        double rhs = d.soc_initial;
        if (t > 0) {
          terms.push_back({m_.soc[s][ts - 1], -1.0});
          rhs = 0.0;
        }
        milp().add_constraint(idx("soc", s, t), std::move(terms), Sense::Equal, rhs);
      }
    }
  }

  // Nodal balance. `fixed` supplies storage injections held as constants;
  // otherwise the storage variables enter when present.
  void balance(const EssSchedule* fixed) {
    for (std::size_t n = 0; n < net_.buses.size(); ++n) {
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        std::vector<Term> terms;
        double rhs = scen_.demand[n][ts];
        for (std::size_t i = 0; i < net_.conventional.size(); ++i)
          if (static_cast<std::size_t>(net_.conventional[i].bus) == n) terms.push_back({m_.p[i][ts], 1.0});
        for (const FixedGenerator& f : net_.fixed)
          if (static_cast<std::size_t>(f.bus) == n) rhs -= f.output[ts];
        for (std::size_t r = 0; r < net_.renewables.size(); ++r)
          if (static_cast<std::size_t>(net_.renewables[r].bus) == n) {
            rhs -= scen_.availability[r][ts];
            terms.push_back({m_.x[r][ts], -1.0});
          }
        for (std::size_t l = 0; l < net_.lines.size(); ++l) {
          if (static_cast<std::size_t>(net_.lines[l].from_bus) == n) terms.push_back({m_.flow[l][ts], -1.0});
          if (static_cast<std::size_t>(net_.lines[l].to_bus) == n) terms.push_back({m_.flow[l][ts], 1.0});
        }
        for (std::size_t s = 0; s < net_.storage.size(); ++s) {
          if (static_cast<std::size_t>(net_.storage[s].bus) != n) continue;
          if (fixed) {
            rhs -= fixed->discharge[s][ts] - fixed->charge[s][ts];
          } else if (m_.pc[s][ts] >= 0) {
            terms.push_back({m_.pd[s][ts], 1.0});
            terms.push_back({m_.pc[s][ts], -1.0});
          }
        }
        milp().add_constraint(idx("balance", n, t), std::move(terms), Sense::Equal, rhs);
      }
    }
  }

  // Deviation pairs tying adjusted generation and curtailment to the
  // baseline, priced at the relief penalties.
  void relief_deviations(const ScheduleSet& base) {
    check_baseline(base);
    for (std::size_t i = 0; i < net_.conventional.size(); ++i) {
      const ConventionalGenerator& g = net_.conventional[i];
      m_.dpb_up[i] = grid(g.blocks.size(), T_);
      m_.dpb_down[i] = grid(g.blocks.size(), T_);
      for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        const double rho = g.blocks[b].adjustment_penalty() * dt_;
        for (int t = 0; t < T_; ++t) {
          const auto ts = static_cast<std::size_t>(t);
          const double p0 = base.block_power[i][b][ts];
          const int up = milp().add_continuous(idx("dpb+", i, b, t), 0.0,
                                               std::max(0.0, g.blocks[b].block_max - p0), rho);
          const int dn = milp().add_continuous(idx("dpb-", i, b, t), 0.0, std::max(0.0, p0), rho);
          m_.dpb_up[i][b][ts] = up;
          m_.dpb_down[i][b][ts] = dn;
          milp().add_constraint(idx("dpbdef", i, b, t), {{m_.pb[i][b][ts], 1.0}, {up, -1.0}, {dn, 1.0}},
                                Sense::Equal, p0);
        }
      }
    }
    for (std::size_t r = 0; r < net_.renewables.size(); ++r) {
      const double rho = net_.renewables[r].curtail_penalty * dt_;
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const double x0 = base.curtailment[r][ts];
        const double avail = scen_.availability[r][ts];
        const int up = milp().add_continuous(idx("dx+", r, t), 0.0, std::max(0.0, avail - x0), rho);
        const int dn = milp().add_continuous(idx("dx-", r, t), 0.0, std::max(0.0, x0), rho);
        m_.dx_up[r][ts] = up;
        m_.dx_down[r][ts] = dn;
        milp().add_constraint(idx("dxdef", r, t), {{m_.x[r][ts], 1.0}, {up, -1.0}, {dn, 1.0}}, Sense::Equal, x0);
      }
    }
    m_.baseline = base;
  }

  // Storage deviations around the initial schedule with the psi/zeta
  // direction binaries. `penalty(s, t, which)` gives the weight of each of
  // the four deviation variables.
  template <typename Penalty>
  void storage_deviations(const EssSchedule& initial, Penalty&& penalty) {
    check_initial(initial);
    m_.storage_input = initial;
    for (std::size_t s = 0; s < net_.storage.size(); ++s) {
      const StorageDevice& d = net_.storage[s];
      for (int t = 0; t < T_; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const double c0 = initial.charge[s][ts];
        const double d0 = initial.discharge[s][ts];
        const auto w = penalty(s, t);
        const int cu = milp().add_continuous(idx("dpc+", s, t), 0.0, std::max(0.0, d.charge_max - c0), w[0] * dt_);
        const int cd = milp().add_continuous(idx("dpc-", s, t), 0.0, c0, w[1] * dt_);
        const int du = milp().add_continuous(idx("dpd+", s, t), 0.0, std::max(0.0, d.discharge_max - d0), w[2] * dt_);
        const int dd = milp().add_continuous(idx("dpd-", s, t), 0.0, d0, w[3] * dt_);
        m_.dc_up[s][ts] = cu;
        m_.dc_down[s][ts] = cd;
        m_.dd_up[s][ts] = du;
        m_.dd_down[s][ts] = dd;
        milp().add_constraint(idx("pcdef", s, t), {{m_.pc[s][ts], 1.0}, {cu, -1.0}, {cd, 1.0}}, Sense::Equal, c0);
        milp().add_constraint(idx("pddef", s, t), {{m_.pd[s][ts], 1.0}, {du, -1.0}, {dd, 1.0}}, Sense::Equal, d0);
        // With nothing proposed the decrease side is pinned at zero and the
        // direction binary has nothing to exclude.
        if (c0 > 0.0) {
          const int psi = milp().add_binary(idx("psi", s, t));
          m_.psi[s][ts] = psi;
          milp().add_constraint(idx("psiup", s, t), {{cu, 1.0}, {psi, -(d.charge_max - c0)}}, Sense::LessEqual, 0.0);
          milp().add_constraint(idx("psidn", s, t), {{cd, 1.0}, {psi, c0}}, Sense::LessEqual, c0);
        }
        if (d0 > 0.0) {
          const int zeta = milp().add_binary(idx("zeta", s, t));
          m_.zeta[s][ts] = zeta;
          milp().add_constraint(idx("zetaup", s, t), {{du, 1.0}, {zeta, -(d.discharge_max - d0)}}, Sense::LessEqual,
                                0.0);
          milp().add_constraint(idx("zetadn", s, t), {{dd, 1.0}, {zeta, d0}}, Sense::LessEqual, d0);
        }
      }
    }
  }

  StageModel take() { return std::move(m_); }
  StageModel& model() { return m_; }

 private:
  void check_baseline(const ScheduleSet& base) const {
    if (base.intervals != T_) throw ModelBuildError("baseline schedule length differs from the horizon");
    if (base.block_power.size() != net_.conventional.size() || base.curtailment.size() != net_.renewables.size())
      throw ModelBuildError("baseline schedule does not match the network");
    for (std::size_t i = 0; i < net_.conventional.size(); ++i)
      if (base.block_power[i].size() != net_.conventional[i].blocks.size())
        throw ModelBuildError("baseline block dispatch does not match unit " + std::to_string(i));
  }

  void check_initial(const EssSchedule& e) const {
    if (e.charge.size() != net_.storage.size() || e.discharge.size() != net_.storage.size())
      throw ModelBuildError("initial storage schedule does not match the device count");
    for (std::size_t s = 0; s < net_.storage.size(); ++s) {
      const StorageDevice& d = net_.storage[s];
      if (static_cast<int>(e.charge[s].size()) != T_ || static_cast<int>(e.discharge[s].size()) != T_)
        throw ModelBuildError("initial storage schedule length differs from the horizon");
      for (int t = 0; t < T_; ++t) {
        const double c = e.charge[s][static_cast<std::size_t>(t)];
        const double q = e.discharge[s][static_cast<std::size_t>(t)];
        if (!(c >= 0.0 && c <= d.charge_max + 1e-9 && q >= 0.0 && q <= d.discharge_max + 1e-9))
          throw ModelBuildError("initial storage schedule outside device limits for storage " + std::to_string(d.id));
      }
    }
  }

  const NetworkModel& net_;
  const Scenario& scen_;
  int T_;
  double dt_;
  StageModel m_;
};

void hint_storage(StageModel& m, const EssSchedule& ess) {
  for (std::size_t s = 0; s < m.nu.size() && s < ess.charge.size(); ++s)
    for (std::size_t t = 0; t < m.nu[s].size() && t < ess.charge[s].size(); ++t) {
      if (ess.charge[s][t] > 0.0) m.start.emplace_back(m.nu[s][t], 1);
      else if (ess.discharge[s][t] > 0.0) m.start.emplace_back(m.nu[s][t], 0);
    }
}

StageModel build_relief(StageKind kind, const NetworkModel& net, const Scenario& scen, const StageInputs& in) {
  Builder b(kind, net, scen);
  b.commitment();
  b.generation(false);
  b.renewables(false);
  b.network(in.enforce_flow_limits);
  b.storage(in.enforce_terminal_soc, false);
  b.balance(nullptr);
  b.relief_deviations(in.baseline);
  hint_from(b.model(), in.baseline);
  hint_storage(b.model(), in.initial);
  if (kind == StageKind::Stage2) {
    b.storage_deviations(in.initial, [&](std::size_t s, int) {
      const double r = net.storage[s].stage2_penalty;
      return std::array<double, 4>{r, r, r, r};
    });
  } else {
    b.storage_deviations(in.initial, [&](std::size_t s, int t) {
      const StorageDevice& d = net.storage[s];
      const auto ts = static_cast<std::size_t>(t);
      const double c0 = in.initial.charge[s][ts], d0 = in.initial.discharge[s][ts];
      // The penalty is linear in each deviation, so its weights are the
      // penalty of a unit step in that deviation alone.
      return std::array<double, 4>{stage3_storage_penalty(d, c0, d0, 1, 0, 0, 0),
                                   stage3_storage_penalty(d, c0, d0, 0, 1, 0, 0),
                                   stage3_storage_penalty(d, c0, d0, 0, 0, 1, 0),
                                   stage3_storage_penalty(d, c0, d0, 0, 0, 0, 1)};
    });
  }
  return b.take();
}

double snap(double v) {
  if (std::abs(v) < 1e-9) return 0.0;
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-9) return r;
  return v;
}

}  // namespace

void hint_from(StageModel& model, const ScheduleSet& schedule) {
  const auto add = [&](const Series<int>& vars, const Series<int>& values) {
    for (std::size_t i = 0; i < vars.size() && i < values.size(); ++i)
      for (std::size_t t = 0; t < vars[i].size() && t < values[i].size(); ++t)
        if (vars[i][t] >= 0) model.start.emplace_back(vars[i][t], values[i][t]);
  };
  add(model.v, schedule.commitment);
  add(model.y, schedule.startup);
  add(model.z, schedule.shutdown);
  if (!model.nu.empty()) hint_storage(model, ess_of(schedule));
}

StageModel build_stage1(const NetworkModel& net, const Scenario& scen) {
  Builder b(StageKind::Stage1, net, scen);
  b.commitment();
  b.generation(true);
  b.renewables(true);
  b.network(false);
  b.balance(nullptr);
  return b.take();
}

StageModel build_stage2(const NetworkModel& net, const Scenario& scen, const StageInputs& inputs) {
  return build_relief(StageKind::Stage2, net, scen, inputs);
}

StageModel build_stage3(const NetworkModel& net, const Scenario& scen, const StageInputs& inputs) {
  return build_relief(StageKind::Stage3, net, scen, inputs);
}

StageModel build_stage4(const NetworkModel& net, const Scenario& scen, const EssSchedule& fixed,
                        bool enforce_flow_limits) {
  Builder b(StageKind::Stage4, net, scen);
  if (fixed.charge.size() != net.storage.size() || fixed.discharge.size() != net.storage.size())
    throw ModelBuildError("fixed storage schedule does not match the device count");
  for (std::size_t s = 0; s < net.storage.size(); ++s)
    if (static_cast<int>(fixed.charge[s].size()) != scen.intervals ||
        static_cast<int>(fixed.discharge[s].size()) != scen.intervals)
      throw ModelBuildError("fixed storage schedule length differs from the horizon");
  b.commitment();
  b.generation(true);
  b.renewables(true);
  b.network(enforce_flow_limits);
  b.balance(&fixed);
  b.model().storage_input = fixed;
  return b.take();
}

StageModel build_ncuc_plus(const NetworkModel& net, const Scenario& scen, bool enforce_terminal_soc) {
  Builder b(StageKind::NcucPlus, net, scen);
  b.commitment();
  b.generation(true);
  b.renewables(true);
  b.network(true);
  b.storage(enforce_terminal_soc, true);
  b.balance(nullptr);
  return b.take();
}

DecodedStage decode(const StageModel& m, const MilpSolution& sol) {
  if (!sol.has_values()) throw DecodeError("solution carries no values");
  if (static_cast<int>(sol.values.size()) != m.milp.num_variables())
    throw DecodeError("solution size does not match the model");
  const NetworkModel& net = m.network;
  const int T = m.scenario.intervals;
  const double dt = m.scenario.step_hours;
  auto val = [&](int var) -> double {
    if (var < 0) throw DecodeError("variable missing from the model");
    return snap(sol.values[static_cast<std::size_t>(var)]);
  };
  auto read = [&](const Series<int>& ix) {
    Series<double> out(ix.size(), std::vector<double>(static_cast<std::size_t>(T)));
    for (std::size_t a = 0; a < ix.size(); ++a)
      for (int t = 0; t < T; ++t) out[a][static_cast<std::size_t>(t)] = val(ix[a][static_cast<std::size_t>(t)]);
    return out;
  };
  auto read_int = [&](const Series<int>& ix) {
    Series<int> out(ix.size(), std::vector<int>(static_cast<std::size_t>(T)));
    for (std::size_t a = 0; a < ix.size(); ++a)
      for (int t = 0; t < T; ++t)
        out[a][static_cast<std::size_t>(t)] = val(ix[a][static_cast<std::size_t>(t)]) >= 0.5 ? 1 : 0;
    return out;
  };

  DecodedStage out;
  ScheduleSet& s = out.schedule;
  s.intervals = T;
  s.step_hours = dt;
  s.commitment = read_int(m.v);
  s.startup = read_int(m.y);
  s.shutdown = read_int(m.z);
  s.power = read(m.p);
  for (const auto& blocks : m.pb) s.block_power.push_back(read(blocks));
  s.curtailment = read(m.x);
  s.flow = read(m.flow);
  s.angle = read(m.angle);

  const bool storage_vars = !net.storage.empty() && m.pc[0][0] >= 0;
  if (storage_vars) {
    s.charge = read(m.pc);
    s.discharge = read(m.pd);
    s.soc = read(m.soc);
  } else {
    s.charge = m.storage_input.charge;
    s.discharge = m.storage_input.discharge;
    for (std::size_t k = 0; k < net.storage.size(); ++k)
      s.soc.push_back(integrate_soc(net.storage[k], s.charge[k], s.discharge[k], dt, net.storage[k].soc_initial));
  }

  for (std::size_t i = 0; i < net.conventional.size(); ++i) {
    const ConventionalGenerator& g = net.conventional[i];
    for (int t = 0; t < T; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      s.generation_cost += g.no_load_cost * s.commitment[i][ts] + g.startup_cost * s.startup[i][ts];
      for (std::size_t b = 0; b < g.blocks.size(); ++b)
        s.generation_cost += g.blocks[b].marginal_cost * s.block_power[i][b][ts] * dt;
    }
  }
  for (std::size_t r = 0; r < net.renewables.size(); ++r)
    for (int t = 0; t < T; ++t) {
      const double x = s.curtailment[r][static_cast<std::size_t>(t)];
      s.curtailment_cost += net.renewables[r].curtail_cost * x * dt;
      s.curtailed_energy += x * dt;
    }
  if (m.kind == StageKind::NcucPlus)
    for (std::size_t k = 0; k < net.storage.size(); ++k)
      for (int t = 0; t < T; ++t)
        s.storage_cost += net.storage[k].stage2_penalty * dt *
                          (s.charge[k][static_cast<std::size_t>(t)] + s.discharge[k][static_cast<std::size_t>(t)]);
  s.objective = sol.objective;

  if (m.kind == StageKind::Stage2 || m.kind == StageKind::Stage3) {
    AdjustmentSet a;
    for (const auto& blocks : m.dpb_up) a.block_up.push_back(read(blocks));
    for (const auto& blocks : m.dpb_down) a.block_down.push_back(read(blocks));
    const ScheduleSet& base = *m.baseline;
    a.unit_up = a.unit_down = Series<double>(net.conventional.size(), Profile(static_cast<std::size_t>(T), 0.0));
    for (std::size_t i = 0; i < net.conventional.size(); ++i)
      for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        double base_p = 0.0;
        for (const Profile& blk : base.block_power[i]) base_p += blk[ts];
        const double delta = snap(s.power[i][ts] - base_p);
        a.unit_up[i][ts] = std::max(0.0, delta);
        a.unit_down[i][ts] = std::max(0.0, -delta);
      }
    a.curtail_up = read(m.dx_up);
    a.curtail_down = read(m.dx_down);
    a.charge_up = read(m.dc_up);
    a.charge_down = read(m.dc_down);
    a.discharge_up = read(m.dd_up);
    a.discharge_down = read(m.dd_down);
    a.nu = read_int(m.nu);
    a.psi = a.zeta = Series<int>(net.storage.size(), std::vector<int>(static_cast<std::size_t>(T), 0));
    for (std::size_t k = 0; k < net.storage.size(); ++k)
      for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        a.psi[k][ts] = m.psi[k][ts] >= 0 ? (val(m.psi[k][ts]) >= 0.5 ? 1 : 0) : (a.charge_up[k][ts] > 0.0 ? 1 : 0);
        a.zeta[k][ts] =
            m.zeta[k][ts] >= 0 ? (val(m.zeta[k][ts]) >= 0.5 ? 1 : 0) : (a.discharge_up[k][ts] > 0.0 ? 1 : 0);
      }
    out.adjustments = std::move(a);
  }
  return out;
}

StageResult solve_stage(const StageModel& model, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const char* tag = stage_tag(model.kind);
  MilpSolution sol;
  try {
    sol = solve_milp(model.milp, options, model.start);
  } catch (const InfeasibleError& e) {
    throw StageError(tag, std::string("infeasible: ") + e.what());
  } catch (const SolveError& e) {
    throw StageError(tag, e.what());
  } catch (const NumericalFailure& e) {
    throw StageError(tag, std::string("numerical failure: ") + e.what());
  }
  DecodedStage d = decode(model, sol);
  StageResult r;
  r.schedule = std::move(d.schedule);
  r.adjustments = std::move(d.adjustments);
  r.relative_gap = sol.relative_gap;
  r.nodes = sol.nodes;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace gridstack
