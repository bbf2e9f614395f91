#include "gridstack/depo.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "gridstack/error.hpp"
#include "gridstack/milp.hpp"

namespace gridstack {

namespace {

using nlohmann::json;

double number_or(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ParseError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

Profile profile_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
  Profile p;
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(where + ": expected an array of numbers");
    p.push_back(x.get<double>());
  }
  return p;
}

double snap(double v) { return std::abs(v) < 1e-9 ? 0.0 : v; }

// Arbitrage plan on intervals where `free` is set. Interval pairs are taken
// in order of falling price spread while the spread beats the round-trip
// loss and the SOC path, including the actions already in `desired`, stays
// inside the device bounds. Each pair moves the same energy in and out.
Profile arbitrage_plan(const Profile& price, const std::vector<bool>& free, const Profile& desired,
                       const StorageDevice& dev, double dt) {
  const std::size_t T = free.size();
  Profile plan(T, 0.0);
  if (price.size() != T) return plan;
  const double energy = dt * std::min(dev.charge_max * dev.eta_c, dev.discharge_max / dev.eta_d);
  if (!(energy > 0.0)) return plan;

  Profile soc(T);
  double e = dev.soc_initial;
  for (std::size_t t = 0; t < T; ++t) {
    const double c = std::max(desired[t], 0.0), d = std::max(-desired[t], 0.0);
    e += dt * (dev.eta_c * c - d / dev.eta_d);
    soc[t] = e;
  }

  struct Pair {
    std::size_t buy, sell;
    double spread;
  };
  std::vector<Pair> pairs;
  const double round_trip = dev.eta_c * dev.eta_d;
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t j = 0; j < T; ++j)
      if (i != j && free[i] && free[j] && price[j] * round_trip > price[i] + 1e-9)
        pairs.push_back({i, j, price[j] * round_trip - price[i]});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.spread > b.spread; });

  std::vector<bool> used(T, false);
  for (const Pair& p : pairs) {
    if (used[p.buy] || used[p.sell]) continue;
    // Buying first lifts the SOC between the two intervals, selling first
    // lowers it.
    const double shift = p.buy < p.sell ? energy : -energy;
    const std::size_t from = std::min(p.buy, p.sell), to = std::max(p.buy, p.sell);
    bool fits = true;
    for (std::size_t t = from; t < to && fits; ++t)
      fits = soc[t] + shift <= dev.soc_max[t] + 1e-9 && soc[t] + shift >= dev.soc_min[t] - 1e-9;
    if (!fits) continue;
    for (std::size_t t = from; t < to; ++t) soc[t] += shift;
    used[p.buy] = used[p.sell] = true;
    plan[p.buy] = energy / (dt * dev.eta_c);
    plan[p.sell] = -energy * dev.eta_d / dt;
  }
  return plan;
}

}  // namespace

std::vector<DepoConfig> parse_depo_configs(const json& doc, const NetworkModel& net) {
  std::vector<DepoConfig> out;
  for (const auto& dev : net.storage) out.push_back(DepoConfig{dev.id, 0.0, {}, std::nullopt, std::nullopt});
  if (!doc.is_object() || !doc.contains("depo")) return out;
  const json& arr = doc.at("depo");
  if (!arr.is_array()) throw ParseError("depo: expected an array");
  std::optional<std::size_t> horizon;
  if (doc.contains("scenario") && doc.at("scenario").is_object() && doc.at("scenario").contains("intervals") &&
      doc.at("scenario").at("intervals").is_number_unsigned())
    horizon = doc.at("scenario").at("intervals").get<std::size_t>();
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string w = "depo[" + std::to_string(k) + "]";
    const json& e = arr[k];
    if (!e.is_object() || !e.contains("storage") || !e.at("storage").is_number_integer())
      throw ParseError(w + ".storage: expected an integer");
    const int id = e.at("storage").get<int>();
    auto it = std::find_if(out.begin(), out.end(), [id](const DepoConfig& c) { return c.storage == id; });
    if (it == out.end()) throw ParseError(w + ".storage: no such storage device");
    DepoConfig& c = *it;
    c.local_reserve_fraction = number_or(e, "local_reserve_fraction", w, 0.0);
    if (c.local_reserve_fraction < 0.0 || c.local_reserve_fraction > 1.0)
      throw ParseError(w + ".local_reserve_fraction: must lie in [0, 1]");
    if (e.contains("price_profile")) {
      c.price_profile = profile_of(e.at("price_profile"), w + ".price_profile");
      if (horizon && c.price_profile.size() != *horizon)
        throw ParseError(w + ".price_profile: expected " + std::to_string(*horizon) + " entries");
    }
    if (e.contains("penalties")) {
      const json& pj = e.at("penalties");
      const std::string wp = w + ".penalties";
      Stage3Penalties p;
      p.charge_increase = number_or(pj, "charge_increase", wp, p.charge_increase);
      p.charge_decrease = number_or(pj, "charge_decrease", wp, p.charge_decrease);
      p.discharge_increase = number_or(pj, "discharge_increase", wp, p.discharge_increase);
      p.discharge_decrease = number_or(pj, "discharge_decrease", wp, p.discharge_decrease);
      p.charge_reversal = number_or(pj, "charge_reversal", wp, p.charge_reversal);
      p.discharge_reversal = number_or(pj, "discharge_reversal", wp, p.discharge_reversal);
      for (double v : {p.charge_increase, p.charge_decrease, p.discharge_increase, p.discharge_decrease,
                       p.charge_reversal, p.discharge_reversal})
        if (v < 0.0) throw ParseError(wp + ": penalties must be nonnegative");
      c.penalties = p;
    }
    if (e.contains("default_penalty")) c.default_penalty = number_or(e, "default_penalty", w, 0.0);
  }
  return out;
}

StorageDevice offered_device(const StorageDevice& device, const DepoConfig& config) {
  const double share = 1.0 - config.local_reserve_fraction;
  StorageDevice d = device;
  d.charge_max *= share;
  d.discharge_max *= share;
  for (double& v : d.soc_min) v *= share;
  for (double& v : d.soc_max) v *= share;
  d.soc_initial *= share;
  d.soc_final_target *= share;
  if (config.penalties) d.stage3_penalties = *config.penalties;
  if (config.default_penalty) d.default_penalty = *config.default_penalty;
  return d;
}

CapacityEntry answer_capacity(const StorageDevice& device, const DepoConfig& config) {
  return capacity_of(offered_device(device, config));
}

CapacityEntry capacity_of(const StorageDevice& d) {
  const double soc_max = d.soc_max.empty() ? 0.0 : *std::min_element(d.soc_max.begin(), d.soc_max.end());
  const double soc_min = d.soc_min.empty() ? 0.0 : *std::max_element(d.soc_min.begin(), d.soc_min.end());
  return {d.id, d.charge_max, d.discharge_max, soc_max, std::min(soc_min, soc_max),
          std::clamp(d.soc_initial, std::min(soc_min, soc_max), soc_max)};
}

SocEnvelope soc_envelope(const StorageDevice& dev, int intervals, double dt, bool terminal) {
  const auto T = static_cast<std::size_t>(intervals);
  if (dev.soc_min.size() < T || dev.soc_max.size() < T) throw InfeasibleScheduleError("SOC bounds shorter than horizon");
  SocEnvelope env{Profile(T), Profile(T)};
  if (T == 0) return env;
  const double up = dt * dev.eta_c * dev.charge_max;
  const double down = dt * dev.discharge_max / dev.eta_d;
  env.lower[T - 1] = terminal ? std::max(dev.soc_min[T - 1], dev.soc_final_target) : dev.soc_min[T - 1];
  env.upper[T - 1] = terminal ? std::min(dev.soc_max[T - 1], dev.soc_final_target) : dev.soc_max[T - 1];
  for (std::size_t t = T - 1; t-- > 0;) {
    env.lower[t] = std::max(dev.soc_min[t], env.lower[t + 1] - up);
    env.upper[t] = std::min(dev.soc_max[t], env.upper[t + 1] + down);
  }
  const double tol = 1e-9;
  for (std::size_t t = 0; t < T; ++t)
    if (env.lower[t] > env.upper[t] + tol)
      throw InfeasibleScheduleError("storage " + std::to_string(dev.id) + ": empty SOC envelope at t=" +
                                    std::to_string(t));
  if (dev.soc_initial + up < env.lower[0] - tol || dev.soc_initial - down > env.upper[0] + tol)
    throw InfeasibleScheduleError("storage " + std::to_string(dev.id) +
                                  ": terminal SOC target unreachable from the initial SOC");
  return env;
}

namespace {

// SOC change allowed in interval t: never against the indicator.
std::pair<double, double> step_range(const StorageDevice& dev, int indicator, double dt) {
  const double up = dt * dev.eta_c * dev.charge_max;
  const double down = dt * dev.discharge_max / dev.eta_d;
  return {indicator > 0 ? 0.0 : -down, indicator < 0 ? 0.0 : up};
}

// Envelope tightened by the indicator signs, or nullopt when the target
// cannot be met without opposing the indicator somewhere.
std::optional<SocEnvelope> directed_envelope(const StorageDevice& dev, const SocEnvelope& base,
                                             const std::vector<int>& indicator, double dt) {
  const std::size_t T = indicator.size();
  SocEnvelope env = base;
  const double tol = 1e-9;
  for (std::size_t t = T - 1; t-- > 0;) {
    const auto [lo, hi] = step_range(dev, indicator[t + 1], dt);
    env.lower[t] = std::max(env.lower[t], env.lower[t + 1] - hi);
    env.upper[t] = std::min(env.upper[t], env.upper[t + 1] - lo);
    if (env.lower[t] > env.upper[t] + tol) return std::nullopt;
  }
  const auto [lo, hi] = step_range(dev, indicator[0], dt);
  if (dev.soc_initial + hi < env.lower[0] - tol || dev.soc_initial + lo > env.upper[0] + tol) return std::nullopt;
  return env;
}

}  // namespace

Proposal propose_initial(const ForecastEntry& forecast, const StorageDevice& dev, const DepoConfig& config,
                         double dt, bool terminal, const ScheduleEntry* fallback) {
  const std::size_t T = forecast.charging_indicator.size();
  SocEnvelope env = soc_envelope(dev, static_cast<int>(T), dt, terminal);
  // Follow the indicator's direction whenever the target allows it; otherwise
  // fall back to the plain envelope and flag the proposal.
  const auto directed = T ? directed_envelope(dev, env, forecast.charging_indicator, dt) : std::optional<SocEnvelope>{};
  const bool opposed = T && !directed;
  if (directed) env = *directed;

  // Desired signed power, positive when charging.
  Profile desired(T, 0.0);
  std::vector<bool> free(T, false);
  for (std::size_t t = 0; t < T; ++t) {
    const int ind = forecast.charging_indicator[t];
    if (fallback) {
      const double prior = fallback->charge.at(t) - fallback->discharge.at(t);
      const int prior_sign = prior > 1e-6 ? 1 : (prior < -1e-6 ? -1 : 0);
      if (ind == prior_sign)
        desired[t] = prior;
      else
        desired[t] = ind > 0 ? dev.charge_max : (ind < 0 ? -dev.discharge_max : 0.0);
    } else if (ind > 0) {
      desired[t] = dev.charge_max;
    } else if (ind < 0) {
      desired[t] = -dev.discharge_max;
    } else {
      free[t] = true;
    }
  }
  if (!fallback && !config.price_profile.empty()) {
    if (config.price_profile.size() != T)
      throw InfeasibleScheduleError("storage " + std::to_string(dev.id) + ": price profile length differs from horizon");
    Profile plan = arbitrage_plan(config.price_profile, free, desired, dev, dt);
    for (std::size_t t = 0; t < T; ++t)
      if (free[t]) desired[t] = plan[t];
  }

  Proposal out;
  out.truncated = opposed;
  out.schedule.storage = dev.id;
  out.schedule.charge.assign(T, 0.0);
  out.schedule.discharge.assign(T, 0.0);
  double e = dev.soc_initial;
  for (std::size_t t = 0; t < T; ++t) {
    const double c = std::max(desired[t], 0.0);
    const double d = std::max(-desired[t], 0.0);
    double next = e + dt * (dev.eta_c * c - d / dev.eta_d);
    const auto [step_lo, step_hi] = step_range(dev, opposed ? 0 : forecast.charging_indicator[t], dt);
    const double lo = std::max(env.lower[t], e + step_lo);
    const double hi = std::min(env.upper[t], e + step_hi);
    next = std::clamp(next, lo, std::max(lo, hi));
    double ac = 0.0;
    double ad = 0.0;
    if (next >= e)
      ac = std::min(dev.charge_max, (next - e) / (dt * dev.eta_c));
    else
      ad = std::min(dev.discharge_max, (e - next) * dev.eta_d / dt);
    ac = snap(ac);
    ad = snap(ad);
    out.schedule.charge[t] = ac;
    out.schedule.discharge[t] = ad;
    if (forecast.charging_indicator[t] != 0 && std::abs((ac - ad) - desired[t]) > 1e-6) out.truncated = true;
    e += dt * (dev.eta_c * ac - ad / dev.eta_d);
  }
  return out;
}

ScheduleEntry finalize(const NeedsEntry& needs, const Profile& load, const ScheduleEntry& prior,
                       const StorageDevice& dev, double dt, bool terminal) {
  const std::size_t T = needs.net_load_min.size();
  const std::string who = "storage " + std::to_string(dev.id);
  if (load.size() != T || prior.charge.size() != T || prior.discharge.size() != T)
    throw InfeasibleScheduleError(who + ": needs, load and prior lengths differ");
  if (dev.soc_min.size() < T || dev.soc_max.size() < T)
    throw InfeasibleScheduleError(who + ": SOC bounds shorter than horizon");

  MilpModel m;
  std::vector<int> c(T), d(T);
  int prev_soc = -1;
  for (std::size_t t = 0; t < T; ++t) {
    const std::string ts = std::to_string(t);
    c[t] = m.add_continuous("c_" + ts, 0.0, dev.charge_max);
    d[t] = m.add_continuous("d_" + ts, 0.0, dev.discharge_max);
    double lo = dev.soc_min[t];
    double hi = dev.soc_max[t];
    if (terminal && t + 1 == T) lo = hi = dev.soc_final_target;
    const int e = m.add_continuous("e_" + ts, lo, hi);
    const int nu = m.add_binary("nu_" + ts);
    std::vector<Term> soc = {{e, 1.0}, {c[t], -dt * dev.eta_c}, {d[t], dt / dev.eta_d}};
    if (prev_soc >= 0) soc.push_back({prev_soc, -1.0});
    m.add_constraint("soc_" + ts, std::move(soc), Sense::Equal, prev_soc >= 0 ? 0.0 : dev.soc_initial);
    prev_soc = e;
    m.add_constraint("chg_" + ts, {{c[t], 1.0}, {nu, -dev.charge_max}}, Sense::LessEqual, 0.0);
    m.add_constraint("dis_" + ts, {{d[t], 1.0}, {nu, dev.discharge_max}}, Sense::LessEqual, dev.discharge_max);
    m.add_constraint("net_lo_" + ts, {{c[t], 1.0}, {d[t], -1.0}}, Sense::GreaterEqual, needs.net_load_min[t] - load[t]);
    m.add_constraint("net_hi_" + ts, {{c[t], 1.0}, {d[t], -1.0}}, Sense::LessEqual, needs.net_load_max[t] - load[t]);
    const int cu = m.add_continuous("cu_" + ts, 0.0, kInf, 1.0);
    const int cl = m.add_continuous("cl_" + ts, 0.0, kInf, 1.0);
    const int du = m.add_continuous("du_" + ts, 0.0, kInf, 1.0);
    const int dl = m.add_continuous("dl_" + ts, 0.0, kInf, 1.0);
    m.add_constraint("dev_c_" + ts, {{c[t], 1.0}, {cu, -1.0}, {cl, 1.0}}, Sense::Equal, prior.charge[t]);
    m.add_constraint("dev_d_" + ts, {{d[t], 1.0}, {du, -1.0}, {dl, 1.0}}, Sense::Equal, prior.discharge[t]);
  }

  MilpSolution sol;
  try {
    SolverOptions opts;
    opts.rel_gap = 0.0;
    sol = solve_milp(m, opts);
  } catch (const SolveError& e) {
    throw InfeasibleScheduleError(who + ": no schedule meets the mitigation needs (" + e.what() + ")");
  } catch (const NumericalFailure& e) {
    throw InfeasibleScheduleError(who + ": schedule solve failed (" + e.what() + ")");
  }
  ScheduleEntry out{dev.id, Profile(T), Profile(T)};
  for (std::size_t t = 0; t < T; ++t) {
    out.charge[t] = std::clamp(snap(sol.value(c[t])), 0.0, dev.charge_max);
    out.discharge[t] = std::clamp(snap(sol.value(d[t])), 0.0, dev.discharge_max);
  }
  return out;
}

DepoAgent::DepoAgent(StorageDevice device, DepoConfig config)
    : device_(std::move(device)),
      offered_(offered_device(device_, config)),
      config_(std::move(config)),
      session_(Session::Side::Depo, "tepo") {}

void DepoAgent::note(const std::string& event, const std::string& detail) {
  log_.push_back("depo=" + std::to_string(device_.id) + " event=" + event + (detail.empty() ? "" : " " + detail));
}

}  // namespace gridstack
