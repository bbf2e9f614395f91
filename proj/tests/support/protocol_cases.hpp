#pragma once

// Canned protocol messages, the legal ten-message cycle and a random report
// generator, shared by the unit tests and the acceptance run.

#include <random>
#include <vector>

#include "gridstack/protocol.hpp"

namespace gridstack::oracle {

inline constexpr int kT = 4;

inline CapacityReport capacity() { return {{CapacityEntry{0, 2.0, 2.0, 1.0, 0.0, 0.5}}}; }
inline CongestionForecast forecast() { return {{ForecastEntry{0, 2, {20, 30, 40, 50}, {1, 0, -1, 0}}}}; }
inline InitialSchedule initial() { return {{ScheduleEntry{0, {1, 0, 0, 0}, {0, 0, 1, 0}}}, false}; }
inline MitigationNeeds needs() { return {{NeedsEntry{0, 2, {21, 28, 39, 48}, {21, 32, 39, 52}}}}; }
inline FinalSchedule final_schedule() { return {{ScheduleEntry{0, {1, 0, 0, 0}, {0, 0, 1, 0}}}}; }

inline Message report_of(ReportKind k) {
  switch (k) {
    case ReportKind::Capacity: return capacity();
    case ReportKind::CongestionForecast: return forecast();
    case ReportKind::InitialSchedule: return initial();
    case ReportKind::MitigationNeeds: return needs();
    case ReportKind::FinalSchedule: return final_schedule();
  }
  return Request{};
}

// The sender of each report in a legal cycle.
inline Direction sender(ReportKind k) {
  return k == ReportKind::CongestionForecast || k == ReportKind::MitigationNeeds ? Direction::TepoToDepo
                                                                                  : Direction::DepoToTepo;
}

inline Direction opposite(Direction d) { return d == Direction::TepoToDepo ? Direction::DepoToTepo : Direction::TepoToDepo; }

struct Move {
  Direction dir;
  Message msg;
};

inline std::vector<Move> legal_cycle() {
  const auto T = Direction::TepoToDepo;
  const auto D = Direction::DepoToTepo;
  return {{T, Request{ReportKind::Capacity}},
          {D, capacity()},
          {T, Request{ReportKind::InitialSchedule}},
          {D, Request{ReportKind::CongestionForecast}},
          {T, forecast()},
          {D, initial()},
          {T, Request{ReportKind::FinalSchedule}},
          {D, Request{ReportKind::MitigationNeeds}},
          {T, needs()},
          {D, final_schedule()}};
}

inline Profile random_profile(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Profile p(static_cast<std::size_t>(n));
  for (double& v : p) v = u(rng);
  return p;
}

inline Message random_message(std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 5), len(1, 30), devices(1, 3), sign(-1, 1), id(0, 50);
  const int n = len(rng);
  const int k = pick(rng);
  const int devs = devices(rng);
  // Storage ids within one report are distinct.
  const int base = id(rng);
  const auto sid = [&](int d) { return base + 3 * d; };
  switch (k) {
    case 0: return Request{static_cast<ReportKind>(pick(rng) % 5)};
    case 1: {
      CapacityReport r;
      for (int d = 0; d < devs; ++d) {
        const auto lim = random_profile(rng, 5, 0.0, 500.0);
        const double lo = std::min(lim[3], lim[4]), hi = std::max(lim[3], lim[4]);
        r.devices.push_back({sid(d), lim[0], lim[1], hi, lo, lo + (hi - lo) * lim[2] / 500.0});
      }
      return r;
    }
    case 2: {
      CongestionForecast r;
      for (int d = 0; d < devs; ++d) {
        std::vector<int> ind(static_cast<std::size_t>(n));
        for (int& v : ind) v = sign(rng);
        r.devices.push_back({sid(d), id(rng), random_profile(rng, n, -50.0, 300.0), ind});
      }
      return r;
    }
    case 3: {
      InitialSchedule r;
      r.truncated = sign(rng) > 0;
      for (int d = 0; d < devs; ++d)
        r.devices.push_back({sid(d), random_profile(rng, n, 0.0, 10.0), random_profile(rng, n, 0.0, 10.0)});
      return r;
    }
    case 4: {
      MitigationNeeds r;
      for (int d = 0; d < devs; ++d) {
        Profile lo = random_profile(rng, n, -20.0, 100.0);
        Profile hi = lo;
        const Profile width = random_profile(rng, n, 0.0, 30.0);
        for (std::size_t t = 0; t < hi.size(); ++t) hi[t] += width[t];
        r.devices.push_back({sid(d), id(rng), lo, hi});
      }
      return r;
    }
    default: {
      FinalSchedule r;
      for (int d = 0; d < devs; ++d)
        r.devices.push_back({sid(d), random_profile(rng, n, 0.0, 10.0), random_profile(rng, n, 0.0, 10.0)});
      return r;
    }
  }
}

}  // namespace gridstack::oracle
