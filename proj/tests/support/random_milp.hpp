#pragma once

#include <random>
#include <string>

#include "gridstack/milp.hpp"

namespace gridstack::oracle {

/// Random MILP with a known feasible point, continuous lower bounds at zero
/// and a bounded objective. Mixes dense-ish random rows with on/off links
/// between binaries and continuous variables.
inline MilpModel random_milp(std::mt19937& rng, int binaries, int continuous) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coef(-6, 6);
  MilpModel m;
  std::vector<double> point;
  for (int i = 0; i < binaries; ++i) {
    m.add_binary("b" + std::to_string(i), std::round(unit(rng) * 30.0 - 18.0));
    point.push_back(unit(rng) < 0.5 ? 0.0 : 1.0);
  }
  for (int i = 0; i < continuous; ++i) {
    const bool open = unit(rng) < 0.2;
    const double up = open ? kInf : std::round(1.0 + unit(rng) * 20.0);
    const double cost = open ? std::round(unit(rng) * 8.0 + 1.0) : std::round(unit(rng) * 20.0 - 12.0);
    m.add_continuous("x" + std::to_string(i), 0.0, up, cost);
    point.push_back(open ? unit(rng) * 10.0 : unit(rng) * up);
  }
  const int n = binaries + continuous;
  auto lhs_at = [&](const std::vector<Term>& terms) {
    double s = 0.0;
    for (const Term& t : terms) s += t.coef * point[static_cast<std::size_t>(t.var)];
    return s;
  };

  const int rows = continuous / 2 + 2 + static_cast<int>(unit(rng) * 6);
  for (int r = 0; r < rows; ++r) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j)
      if (unit(rng) < 0.35) {
        const int c = coef(rng);
        if (c != 0) terms.push_back({j, static_cast<double>(c)});
      }
    if (terms.empty()) continue;
    const double lhs = lhs_at(terms);
    const double u = unit(rng);
    if (u < 0.15) {
      m.add_constraint("e" + std::to_string(r), terms, Sense::Equal, lhs);
    } else if (u < 0.6) {
      m.add_constraint("l" + std::to_string(r), terms, Sense::LessEqual, std::round(lhs + unit(rng) * 4.0));
    } else {
      m.add_constraint("g" + std::to_string(r), terms, Sense::GreaterEqual, std::floor(lhs - unit(rng) * 4.0));
    }
  }
  // x_c <= M * b, consistent with the known point.
  for (int i = 0; i < binaries && continuous > 0; ++i) {
    const int c = binaries + static_cast<int>(unit(rng) * continuous) % continuous;
    if (point[static_cast<std::size_t>(i)] == 0.0 && point[static_cast<std::size_t>(c)] > 0.0) continue;
    m.add_constraint("link" + std::to_string(i), {{c, 1.0}, {i, -40.0}}, Sense::LessEqual, 0.0);
  }
  return m;
}

}  // namespace gridstack::oracle
