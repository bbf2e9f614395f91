#pragma once

#include <filesystem>
#include <string>

#include "gridstack/depo.hpp"
#include "gridstack/model.hpp"

#ifndef GRIDSTACK_DATA_DIR
#error "GRIDSTACK_DATA_DIR must point at the bundled scenarios"
#endif

namespace gridstack::oracle {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(GRIDSTACK_DATA_DIR) / name;
}

struct Fixture {
  NetworkModel net;
  Scenario scen;
  std::vector<DepoConfig> depo;
};

inline Fixture load_fixture(const std::string& name) {
  const nlohmann::json doc = read_json_file(data_path(name));
  ScenarioData data = parse_scenario(doc);
  std::vector<DepoConfig> depo = parse_depo_configs(doc, data.network);
  return {std::move(data.network), std::move(data.scenario), std::move(depo)};
}

/// Single-bus system with one cheap unit and no lines, `intervals` long.
inline ScenarioData single_bus(int intervals, double demand) {
  ScenarioData d;
  d.network.buses = {Bus{0, true}};
  ConventionalGenerator g;
  g.id = 0;
  g.bus = 0;
  g.p_min = 0.0;
  g.p_max = 100.0;
  g.blocks = {CostBlock{100.0, 10.0, std::nullopt}};
  g.ramp_up = g.ramp_down = 100.0;
  g.initial_commit = true;
  g.initial_up_time = 1;
  g.initial_power = demand;
  d.network.conventional = {g};
  d.scenario.intervals = intervals;
  d.scenario.step_hours = 1.0;
  d.scenario.demand = {Profile(static_cast<std::size_t>(intervals), demand)};
  return d;
}

inline StorageDevice simple_storage(int intervals, double power, double energy, double eta = 1.0) {
  StorageDevice s;
  s.id = 0;
  s.bus = 0;
  s.charge_max = s.discharge_max = power;
  s.eta_c = s.eta_d = eta;
  s.soc_min = Profile(static_cast<std::size_t>(intervals), 0.0);
  s.soc_max = Profile(static_cast<std::size_t>(intervals), energy);
  return s;
}

}  // namespace gridstack::oracle
