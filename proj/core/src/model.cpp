#include "gridstack/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridstack/error.hpp"

namespace gridstack {

namespace {

using nlohmann::json;

std::string at(const std::string& base, std::size_t index) {
  return base + "[" + std::to_string(index) + "]";
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "." + key + ": missing");
  return *it;
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj, key, where);
}

int get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

int get_int_or(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  return get_int(obj, key, where);
}

bool get_bool_or(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ParseError(where + "." + key + ": expected a boolean");
  return v.get<bool>();
}

Profile get_profile(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
  Profile out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ParseError(at(where, k) + ": expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

/// A scalar is broadcast to `length` entries.
Profile get_profile_or_scalar(const json& obj, const char* key, const std::string& where,
                              int length) {
  const json& v = require(obj, key, where);
  if (v.is_number()) return Profile(static_cast<std::size_t>(std::max(length, 0)), v.get<double>());
  return get_profile(v, where + "." + key);
}

const json& require_array(const json& doc, const char* key) {
  const json& v = require(doc, key, "$");
  if (!v.is_array()) throw ParseError(std::string(key) + ": expected an array");
  return v;
}

/// Maps an object keyed by entity id ("0", "1", ...) into a dense table.
std::vector<Profile> keyed_profiles(const json& obj, const std::string& where, std::size_t count,
                                    int length, bool fill_missing) {
  std::vector<Profile> out(count);
  if (!obj.is_object()) throw ParseError(where + ": expected an object keyed by id");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    std::size_t pos = 0;
    int id = -1;
    try {
      id = std::stoi(it.key(), &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != it.key().size() || id < 0)
      throw ParseError(where + "." + it.key() + ": key is not an entity id");
    if (static_cast<std::size_t>(id) >= count)
      throw ParseError(where + "." + it.key() + ": no such entity");
    out[static_cast<std::size_t>(id)] = get_profile(it.value(), where + "." + it.key());
  }
  if (fill_missing) {
    for (auto& p : out)
      if (p.empty()) p.assign(static_cast<std::size_t>(std::max(length, 0)), 0.0);
  }
  return out;
}

const char* kind_name(RenewableKind k) { return k == RenewableKind::Wind ? "wind" : "solar"; }

bool finite_profile(const Profile& p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

int NetworkModel::reference_bus() const {
  for (const auto& b : buses)
    if (b.is_reference) return b.id;
  return -1;
}

ScenarioData parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ParseError("$: expected a JSON object");
  ScenarioData data;
  NetworkModel& net = data.network;
  Scenario& scen = data.scenario;

  const json& sj = require(doc, "scenario", "$");
  scen.intervals = get_int(sj, "intervals", "scenario");
  scen.step_hours = get_number_or(sj, "step_hours", "scenario", 1.0);
  const int T = scen.intervals;

  net.mva_base = get_number_or(doc, "mva_base", "$", 100.0);

  const json& buses = require_array(doc, "buses");
  for (std::size_t k = 0; k < buses.size(); ++k) {
    const std::string w = at("buses", k);
    net.buses.push_back({get_int(buses[k], "id", w), get_bool_or(buses[k], "is_reference", w, false)});
  }

  const json& lines = require_array(doc, "lines");
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string w = at("lines", k);
    const json& lj = lines[k];
    Line l;
    l.id = get_int(lj, "id", w);
    l.from_bus = get_int(lj, "from_bus", w);
    l.to_bus = get_int(lj, "to_bus", w);
    l.reactance = get_number(lj, "reactance", w);
    l.flow_max = get_number(lj, "flow_max", w);
    l.flow_min = get_number_or(lj, "flow_min", w, -l.flow_max);
    l.monitored = get_bool_or(lj, "monitored", w, false);
    net.lines.push_back(l);
  }

  const json& conv = require_array(doc, "conventional");
  for (std::size_t k = 0; k < conv.size(); ++k) {
    const std::string w = at("conventional", k);
    const json& gj = conv[k];
    ConventionalGenerator g;
    g.id = get_int(gj, "id", w);
    g.bus = get_int(gj, "bus", w);
    g.p_min = get_number(gj, "p_min", w);
    g.p_max = get_number(gj, "p_max", w);
    if (gj.contains("p_max_profile")) g.p_max_profile = get_profile(gj.at("p_max_profile"), w + ".p_max_profile");
    const json& blocks = require(gj, "blocks", w);
    if (!blocks.is_array()) throw ParseError(w + ".blocks: expected an array");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string wb = at(w + ".blocks", b);
      CostBlock cb;
      cb.block_max = get_number(blocks[b], "block_max", wb);
      cb.marginal_cost = get_number(blocks[b], "marginal_cost", wb);
      if (blocks[b].contains("penalty")) cb.penalty = get_number(blocks[b], "penalty", wb);
      g.blocks.push_back(cb);
    }
    g.no_load_cost = get_number_or(gj, "no_load_cost", w, 0.0);
    g.startup_cost = get_number_or(gj, "startup_cost", w, 0.0);
    g.ramp_up = get_number_or(gj, "ramp_up", w, g.p_max);
    g.ramp_down = get_number_or(gj, "ramp_down", w, g.p_max);
    g.min_up = get_int_or(gj, "min_up", w, 1);
    g.min_down = get_int_or(gj, "min_down", w, 1);
    g.initial_commit = get_bool_or(gj, "initial_commit", w, false);
    g.initial_power = get_number_or(gj, "initial_power", w, 0.0);
    g.initial_up_time = get_int_or(gj, "initial_up_time", w, 0);
    g.initial_down_time = get_int_or(gj, "initial_down_time", w, 0);
    net.conventional.push_back(std::move(g));
  }

  const json& fixed = require_array(doc, "fixed");
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const std::string w = at("fixed", k);
    FixedGenerator f;
    f.id = get_int(fixed[k], "id", w);
    f.bus = get_int(fixed[k], "bus", w);
    f.output = get_profile(require(fixed[k], "output", w), w + ".output");
    net.fixed.push_back(std::move(f));
  }

  const json& ren = require_array(doc, "renewables");
  for (std::size_t k = 0; k < ren.size(); ++k) {
    const std::string w = at("renewables", k);
    RenewablePlant r;
    r.id = get_int(ren[k], "id", w);
    const json& kind = require(ren[k], "kind", w);
    if (kind == "wind") {
      r.kind = RenewableKind::Wind;
    } else if (kind == "solar") {
      r.kind = RenewableKind::Solar;
    } else {
      throw ParseError(w + ".kind: expected \"wind\" or \"solar\"");
    }
    r.bus = get_int(ren[k], "bus", w);
    r.curtail_cost = get_number(ren[k], "curtail_cost", w);
    r.curtail_penalty = get_number_or(ren[k], "curtail_penalty", w, r.curtail_cost);
    net.renewables.push_back(r);
  }

  const json& stor = require_array(doc, "storage");
  for (std::size_t k = 0; k < stor.size(); ++k) {
    const std::string w = at("storage", k);
    const json& sj2 = stor[k];
    StorageDevice s;
    s.id = get_int(sj2, "id", w);
    s.bus = get_int(sj2, "bus", w);
    s.charge_max = get_number(sj2, "charge_max", w);
    s.discharge_max = get_number(sj2, "discharge_max", w);
    s.eta_c = get_number(sj2, "eta_c", w);
    s.eta_d = get_number(sj2, "eta_d", w);
    s.soc_min = get_profile_or_scalar(sj2, "soc_min", w, T);
    s.soc_max = get_profile_or_scalar(sj2, "soc_max", w, T);
    s.soc_initial = get_number(sj2, "soc_initial", w);
    s.soc_final_target = get_number_or(sj2, "soc_final_target", w, s.soc_initial);
    s.stage2_penalty = get_number_or(sj2, "stage2_penalty", w, 1.0);
    if (sj2.contains("stage3_penalties")) {
      const json& pj = sj2.at("stage3_penalties");
      const std::string wp = w + ".stage3_penalties";
      Stage3Penalties& p = s.stage3_penalties;
      p.charge_increase = get_number_or(pj, "charge_increase", wp, p.charge_increase);
      p.charge_decrease = get_number_or(pj, "charge_decrease", wp, p.charge_decrease);
      p.discharge_increase = get_number_or(pj, "discharge_increase", wp, p.discharge_increase);
      p.discharge_decrease = get_number_or(pj, "discharge_decrease", wp, p.discharge_decrease);
      p.charge_reversal = get_number_or(pj, "charge_reversal", wp, p.charge_reversal);
      p.discharge_reversal = get_number_or(pj, "discharge_reversal", wp, p.discharge_reversal);
    }
    s.default_penalty = get_number_or(sj2, "default_penalty", w, s.default_penalty);
    net.storage.push_back(std::move(s));
  }

  // Profiles keyed by id. Missing demand means no load at that bus; every
  // renewable needs its availability.
  scen.demand = keyed_profiles(require(sj, "demand", "scenario"), "scenario.demand",
                               net.buses.size(), T, true);
  scen.availability.assign(net.renewables.size(), Profile{});
  for (const char* key : {"wind_avail", "solar_avail"}) {
    if (!sj.contains(key)) continue;
    auto avail = keyed_profiles(sj.at(key), std::string("scenario.") + key, net.renewables.size(), T,
                                false);
    const RenewableKind kind = std::string(key) == "wind_avail" ? RenewableKind::Wind : RenewableKind::Solar;
    for (std::size_t r = 0; r < avail.size(); ++r) {
      if (avail[r].empty()) continue;
      if (net.renewables[r].kind != kind)
        throw ParseError(std::string("scenario.") + key + "." + std::to_string(r) + ": renewable is " +
                         kind_name(net.renewables[r].kind));
      scen.availability[r] = std::move(avail[r]);
    }
  }
  return data;
}

ValidationReport validate(const NetworkModel& net, const Scenario& scen) {
  ValidationReport rep;
  auto error = [&](std::string field, std::string msg) { rep.errors.push_back({std::move(field), std::move(msg)}); };
  auto warn = [&](std::string field, std::string msg) { rep.warnings.push_back({std::move(field), std::move(msg)}); };
  const int T = scen.intervals;
  const auto nbus = static_cast<int>(net.buses.size());
  auto bus_ok = [&](int b) { return b >= 0 && b < nbus; };
  auto check_len = [&](const Profile& p, const std::string& field) {
    if (static_cast<int>(p.size()) != T) {
      error(field, "profile has length " + std::to_string(p.size()) + ", expected " + std::to_string(T));
      return false;
    }
    if (!finite_profile(p)) {
      error(field, "profile contains non-finite values");
      return false;
    }
    return true;
  };

  if (T <= 0) error("scenario.intervals", "must be positive");
  if (!(scen.step_hours > 0.0)) error("scenario.step_hours", "must be positive");
  if (!(net.mva_base > 0.0)) error("mva_base", "must be positive");

  if (net.buses.empty()) error("buses", "at least one bus is required");
  int refs = 0;
  for (std::size_t k = 0; k < net.buses.size(); ++k) {
    if (net.buses[k].id != static_cast<int>(k)) error(at("buses", k) + ".id", "ids must be dense from 0 in order");
    refs += net.buses[k].is_reference ? 1 : 0;
  }
  if (!net.buses.empty() && refs != 1) error("buses", "exactly one reference bus is required, found " + std::to_string(refs));

  for (std::size_t k = 0; k < net.lines.size(); ++k) {
    const Line& l = net.lines[k];
    const std::string w = at("lines", k);
    if (l.id != static_cast<int>(k)) error(w + ".id", "ids must be dense from 0 in order");
    if (!bus_ok(l.from_bus)) error(w + ".from_bus", "unknown bus");
    if (!bus_ok(l.to_bus)) error(w + ".to_bus", "unknown bus");
    if (l.from_bus == l.to_bus) error(w + ".to_bus", "line endpoints must differ");
    if (!(l.reactance > 0.0)) error(w + ".reactance", "must be positive");
    if (!(l.flow_min <= 0.0 && 0.0 <= l.flow_max)) error(w + ".flow_max", "limits must satisfy flow_min <= 0 <= flow_max");
  }

  for (std::size_t k = 0; k < net.conventional.size(); ++k) {
    const ConventionalGenerator& g = net.conventional[k];
    const std::string w = at("conventional", k);
    if (g.id != static_cast<int>(k)) error(w + ".id", "ids must be dense from 0 in order");
    if (!bus_ok(g.bus)) error(w + ".bus", "unknown bus");
    if (g.p_min < 0.0) error(w + ".p_min", "must be nonnegative");
    if (g.p_min > g.p_max) error(w + ".p_max", "p_min exceeds p_max");
    if (!g.p_max_profile.empty() && check_len(g.p_max_profile, w + ".p_max_profile")) {
      for (double v : g.p_max_profile)
        if (v < g.p_min) {
          error(w + ".p_max_profile", "entry below p_min");
          break;
        }
    }
    if (g.blocks.empty()) error(w + ".blocks", "at least one cost block is required");
    double cap = 0.0;
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
      if (g.blocks[b].block_max < 0.0) error(at(w + ".blocks", b) + ".block_max", "must be nonnegative");
      if (g.blocks[b].adjustment_penalty() < 0.0) error(at(w + ".blocks", b) + ".penalty", "must be nonnegative");
      cap += g.blocks[b].block_max;
      if (b > 0 && g.blocks[b].marginal_cost < g.blocks[b - 1].marginal_cost)
        warn(at(w + ".blocks", b) + ".marginal_cost", "marginal costs are not monotonically nondecreasing");
    }
    if (!g.blocks.empty() && cap + 1e-9 < g.p_max - g.p_min)
      error(w + ".blocks", "block capacity is below p_max - p_min");
    if (!g.blocks.empty() && cap + 1e-9 < g.p_min) error(w + ".blocks", "block capacity is below p_min");
    if (g.ramp_up < 0.0) error(w + ".ramp_up", "must be nonnegative");
    if (g.ramp_down < 0.0) error(w + ".ramp_down", "must be nonnegative");
    if (g.min_up < 0) error(w + ".min_up", "must be nonnegative");
    if (g.min_down < 0) error(w + ".min_down", "must be nonnegative");
    if (g.initial_up_time < 0) error(w + ".initial_up_time", "must be nonnegative");
    if (g.initial_down_time < 0) error(w + ".initial_down_time", "must be nonnegative");
    if (g.initial_commit && g.initial_down_time > 0) error(w + ".initial_down_time", "unit is initially committed");
    if (!g.initial_commit && g.initial_up_time > 0) error(w + ".initial_up_time", "unit is initially off");
    if (!g.initial_commit && g.initial_power != 0.0) error(w + ".initial_power", "unit is initially off");
    if (g.initial_commit && (g.initial_power < g.p_min - 1e-9 || g.initial_power > g.p_max + 1e-9))
      error(w + ".initial_power", "outside [p_min, p_max]");
    if (g.no_load_cost < 0.0) error(w + ".no_load_cost", "must be nonnegative");
    if (g.startup_cost < 0.0) error(w + ".startup_cost", "must be nonnegative");
  }

  for (std::size_t k = 0; k < net.fixed.size(); ++k) {
    const FixedGenerator& f = net.fixed[k];
    const std::string w = at("fixed", k);
    if (f.id != static_cast<int>(k)) error(w + ".id", "ids must be dense from 0 in order");
    if (!bus_ok(f.bus)) error(w + ".bus", "unknown bus");
    if (check_len(f.output, w + ".output"))
      for (double v : f.output)
        if (v < 0.0) {
          error(w + ".output", "must be nonnegative");
          break;
        }
  }

  for (std::size_t k = 0; k < net.renewables.size(); ++k) {
    const RenewablePlant& r = net.renewables[k];
    const std::string w = at("renewables", k);
    if (r.id != static_cast<int>(k)) error(w + ".id", "ids must be dense from 0 in order");
    if (!bus_ok(r.bus)) error(w + ".bus", "unknown bus");
    if (r.curtail_cost < 0.0) error(w + ".curtail_cost", "must be nonnegative");
    if (r.curtail_penalty < 0.0) error(w + ".curtail_penalty", "must be nonnegative");
    const std::string avail = std::string("scenario.") + (r.kind == RenewableKind::Wind ? "wind_avail." : "solar_avail.") +
                              std::to_string(k);
    if (k >= scen.availability.size() || scen.availability[k].empty()) {
      error(avail, "missing availability profile");
    } else if (check_len(scen.availability[k], avail)) {
      for (double v : scen.availability[k])
        if (v < 0.0) {
          error(avail, "must be nonnegative");
          break;
        }
    }
  }

  for (std::size_t k = 0; k < net.storage.size(); ++k) {
    const StorageDevice& s = net.storage[k];
    const std::string w = at("storage", k);
    if (s.id != static_cast<int>(k)) error(w + ".id", "ids must be dense from 0 in order");
    if (!bus_ok(s.bus)) error(w + ".bus", "unknown bus");
    if (s.charge_max < 0.0) error(w + ".charge_max", "must be nonnegative");
    if (s.discharge_max < 0.0) error(w + ".discharge_max", "must be nonnegative");
    if (!(s.eta_c > 0.0 && s.eta_c <= 1.0)) error(w + ".eta_c", "must lie in (0, 1]");
    if (!(s.eta_d > 0.0 && s.eta_d <= 1.0)) error(w + ".eta_d", "must lie in (0, 1]");
    const bool lens = check_len(s.soc_min, w + ".soc_min") & check_len(s.soc_max, w + ".soc_max");
    if (lens && T > 0) {
      for (int t = 0; t < T; ++t)
        if (s.soc_min[static_cast<std::size_t>(t)] > s.soc_max[static_cast<std::size_t>(t)]) {
          error(w + ".soc_min", "exceeds soc_max at t=" + std::to_string(t));
          break;
        }
      const double lo = *std::max_element(s.soc_min.begin(), s.soc_min.end());
      if (s.soc_final_target < lo - 1e-9 || s.soc_final_target > s.soc_max.back() + 1e-9)
        error(w + ".soc_final_target", "outside the SOC envelope");
    }
    if (s.soc_initial < 0.0) error(w + ".soc_initial", "must be nonnegative");
    if (s.stage2_penalty < 0.0) error(w + ".stage2_penalty", "must be nonnegative");
    if (s.default_penalty < 0.0) error(w + ".default_penalty", "must be nonnegative");
    const Stage3Penalties& p = s.stage3_penalties;
    for (double v : {p.charge_increase, p.charge_decrease, p.discharge_increase, p.discharge_decrease,
                     p.charge_reversal, p.discharge_reversal})
      if (v < 0.0) {
        error(w + ".stage3_penalties", "penalties must be nonnegative");
        break;
      }
  }

  if (scen.demand.size() != net.buses.size()) {
    error("scenario.demand", "expected one profile per bus");
  } else {
    for (std::size_t n = 0; n < scen.demand.size(); ++n) {
      const std::string w = "scenario.demand." + std::to_string(n);
      if (check_len(scen.demand[n], w))
        for (double v : scen.demand[n])
          if (v < 0.0) {
            error(w, "must be nonnegative");
            break;
          }
    }
  }
  return rep;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ScenarioData load_scenario(const std::filesystem::path& path) {
  ScenarioData data;
  try {
    data = parse_scenario(read_json_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const ValidationReport rep = validate(data.network, data.scenario);
  if (!rep.ok()) throw ValidationError(rep.errors.front().field, rep.errors.front().message);
  return data;
}

json to_json(const NetworkModel& net, const Scenario& scen) {
  json doc = json::object();
  doc["mva_base"] = net.mva_base;
  json& buses = doc["buses"] = json::array();
  for (const auto& b : net.buses) buses.push_back({{"id", b.id}, {"is_reference", b.is_reference}});
  json& lines = doc["lines"] = json::array();
  for (const auto& l : net.lines)
    lines.push_back({{"id", l.id},
                     {"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"reactance", l.reactance},
                     {"flow_max", l.flow_max},
                     {"flow_min", l.flow_min},
                     {"monitored", l.monitored}});
  json& conv = doc["conventional"] = json::array();
  for (const auto& g : net.conventional) {
    json blocks = json::array();
    for (const auto& b : g.blocks) {
      json bj = {{"block_max", b.block_max}, {"marginal_cost", b.marginal_cost}};
      if (b.penalty) bj["penalty"] = *b.penalty;
      blocks.push_back(std::move(bj));
    }
    json gj = {{"id", g.id},
               {"bus", g.bus},
               {"p_min", g.p_min},
               {"p_max", g.p_max},
               {"blocks", std::move(blocks)},
               {"no_load_cost", g.no_load_cost},
               {"startup_cost", g.startup_cost},
               {"ramp_up", g.ramp_up},
               {"ramp_down", g.ramp_down},
               {"min_up", g.min_up},
               {"min_down", g.min_down},
               {"initial_commit", g.initial_commit},
               {"initial_power", g.initial_power},
               {"initial_up_time", g.initial_up_time},
               {"initial_down_time", g.initial_down_time}};
    if (!g.p_max_profile.empty()) gj["p_max_profile"] = g.p_max_profile;
    conv.push_back(std::move(gj));
  }
  json& fixed = doc["fixed"] = json::array();
  for (const auto& f : net.fixed) fixed.push_back({{"id", f.id}, {"bus", f.bus}, {"output", f.output}});
  json& ren = doc["renewables"] = json::array();
  for (const auto& r : net.renewables)
    ren.push_back({{"id", r.id},
                   {"kind", kind_name(r.kind)},
                   {"bus", r.bus},
                   {"curtail_cost", r.curtail_cost},
                   {"curtail_penalty", r.curtail_penalty}});
  json& stor = doc["storage"] = json::array();
  for (const auto& s : net.storage) {
    const auto& p = s.stage3_penalties;
    stor.push_back({{"id", s.id},
                    {"bus", s.bus},
                    {"charge_max", s.charge_max},
                    {"discharge_max", s.discharge_max},
                    {"eta_c", s.eta_c},
                    {"eta_d", s.eta_d},
                    {"soc_min", s.soc_min},
                    {"soc_max", s.soc_max},
                    {"soc_initial", s.soc_initial},
                    {"soc_final_target", s.soc_final_target},
                    {"stage2_penalty", s.stage2_penalty},
                    {"stage3_penalties",
                     {{"charge_increase", p.charge_increase},
                      {"charge_decrease", p.charge_decrease},
                      {"discharge_increase", p.discharge_increase},
                      {"discharge_decrease", p.discharge_decrease},
                      {"charge_reversal", p.charge_reversal},
                      {"discharge_reversal", p.discharge_reversal}}},
                    {"default_penalty", s.default_penalty}});
  }
  json sj = {{"intervals", scen.intervals}, {"step_hours", scen.step_hours}};
  json demand = json::object();
  for (std::size_t n = 0; n < scen.demand.size(); ++n) demand[std::to_string(n)] = scen.demand[n];
  sj["demand"] = std::move(demand);
  json wind = json::object();
  json solar = json::object();
  for (std::size_t r = 0; r < net.renewables.size() && r < scen.availability.size(); ++r) {
    json& dst = net.renewables[r].kind == RenewableKind::Wind ? wind : solar;
    dst[std::to_string(r)] = scen.availability[r];
  }
  sj["wind_avail"] = std::move(wind);
  sj["solar_avail"] = std::move(solar);
  doc["scenario"] = std::move(sj);
  return doc;
}

std::pair<int, int> derive_initial_updown(const ConventionalGenerator& gen) {
  const int v0 = gen.initial_commit ? 1 : 0;
  const int up = std::max(0, (gen.min_up - gen.initial_up_time) * v0);
  const int down = std::max(0, (gen.min_down - gen.initial_down_time) * (1 - v0));
  return {up, down};
}

namespace {
Profile slice_profile(const Profile& p, int begin, int length) {
  if (p.empty()) return p;
  return Profile(p.begin() + begin, p.begin() + begin + length);
}
}  // namespace

Scenario slice(const Scenario& scen, int begin, int length) {
  if (begin < 0 || length <= 0 || begin + length > scen.intervals)
    throw std::out_of_range("slice outside the scenario horizon");
  Scenario out;
  out.intervals = length;
  out.step_hours = scen.step_hours;
  for (const auto& p : scen.demand) out.demand.push_back(slice_profile(p, begin, length));
  for (const auto& p : scen.availability) out.availability.push_back(slice_profile(p, begin, length));
  return out;
}

NetworkModel slice_profiles(const NetworkModel& net, int begin, int length) {
  NetworkModel out = net;
  for (auto& g : out.conventional) g.p_max_profile = slice_profile(g.p_max_profile, begin, length);
  for (auto& f : out.fixed) f.output = slice_profile(f.output, begin, length);
  for (auto& s : out.storage) {
    s.soc_min = slice_profile(s.soc_min, begin, length);
    s.soc_max = slice_profile(s.soc_max, begin, length);
  }
  return out;
}

}  // namespace gridstack
