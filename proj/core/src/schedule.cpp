#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gridstack/error.hpp"
#include "gridstack/schedule.hpp"

namespace gridstack {

namespace {

double series_max(const Series<double>& s) {
  double m = 0.0;
  for (const auto& row : s)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

template <typename T>
Series<T> cut(const Series<T>& s, int begin, int length) {
  Series<T> out;
  out.reserve(s.size());
  for (const auto& row : s) out.emplace_back(row.begin() + begin, row.begin() + begin + length);
  return out;
}

// Fixed six decimals, never "-0.000000", so equal schedules give equal bytes.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

double AdjustmentSet::max_abs() const {
  double m = 0.0;
  for (const auto& s : block_up) m = std::max(m, series_max(s));
  for (const auto& s : block_down) m = std::max(m, series_max(s));
  for (const Series<double>* s : {&unit_up, &unit_down, &charge_up, &charge_down, &discharge_up, &discharge_down,
                                  &curtail_up, &curtail_down})
    m = std::max(m, series_max(*s));
  return m;
}

EssSchedule EssSchedule::zeros(std::size_t devices, int intervals) {
  EssSchedule e;
  e.charge.assign(devices, Profile(static_cast<std::size_t>(intervals), 0.0));
  e.discharge = e.charge;
  return e;
}

EssSchedule ess_of(const ScheduleSet& schedule) { return {schedule.charge, schedule.discharge}; }

ScheduleSet slice(const ScheduleSet& s, int begin, int length) {
  if (begin < 0 || length < 0 || begin + length > s.intervals) throw Error("schedule slice out of range");
  ScheduleSet out;
  out.intervals = length;
  out.step_hours = s.step_hours;
  out.commitment = cut(s.commitment, begin, length);
  out.startup = cut(s.startup, begin, length);
  out.shutdown = cut(s.shutdown, begin, length);
  out.power = cut(s.power, begin, length);
  for (const auto& blocks : s.block_power) out.block_power.push_back(cut(blocks, begin, length));
  out.curtailment = cut(s.curtailment, begin, length);
  out.charge = cut(s.charge, begin, length);
  out.discharge = cut(s.discharge, begin, length);
  out.soc = cut(s.soc, begin, length);
  out.flow = cut(s.flow, begin, length);
  out.angle = cut(s.angle, begin, length);
  return out;
}

Profile integrate_soc(const StorageDevice& device, const Profile& charge, const Profile& discharge,
                      double step_hours, double initial) {
  Profile soc(charge.size());
  double e = initial;
  for (std::size_t t = 0; t < charge.size(); ++t) {
    e += step_hours * device.eta_c * charge[t] - step_hours / device.eta_d * discharge[t];
    soc[t] = e;
  }
  return soc;
}

void write_schedule_csv(const ScheduleSet& s, const NetworkModel& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto T = static_cast<std::size_t>(s.intervals);

  {
    auto out = open_csv(dir / "commitment.csv");
    out << "t";
    for (const auto& g : net.conventional) out << ",unit_" << g.id;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t;
      for (const auto& row : s.commitment) out << ',' << row[t];
      out << '\n';
    }
  }
  {
    auto out = open_csv(dir / "dispatch.csv");
    out << "t";
    for (const auto& g : net.conventional) out << ",unit_" << g.id;
    for (const auto& r : net.renewables) out << ",curtail_" << r.id;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t;
      for (const auto& row : s.power) out << ',' << fmt(row[t]);
      for (const auto& row : s.curtailment) out << ',' << fmt(row[t]);
      out << '\n';
    }
  }
  {
    auto out = open_csv(dir / "flows.csv");
    out << "t";
    for (const auto& l : net.lines) out << ",line_" << l.id;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t;
      for (const auto& row : s.flow) out << ',' << fmt(row[t]);
      out << '\n';
    }
  }
  {
    auto out = open_csv(dir / "storage.csv");
    out << "t";
    for (const auto& d : net.storage) out << ",charge_" << d.id << ",discharge_" << d.id << ",soc_" << d.id;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t;
      for (std::size_t k = 0; k < s.charge.size(); ++k)
        out << ',' << fmt(s.charge[k][t]) << ',' << fmt(s.discharge[k][t]) << ',' << fmt(s.soc[k][t]);
      out << '\n';
    }
  }
}

}  // namespace gridstack
