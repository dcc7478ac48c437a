#pragma once

// Shared deterministic fixtures: the three-plant reference cascade plus
// smooth synthetic scenario and market series sized for fast tests.

#include "cascade/model/instance.hpp"

#include <algorithm>
#include <cmath>

namespace fixtures {

inline cascade::PlantParams reference_plant(int n) {
  cascade::PlantParams p;
  const double level_min[] = {120.0, 110.0, 95.0};
  const double level_max[] = {123.0, 112.0, 98.0};
  const double tailrace[] = {115.0, 105.0, 94.0};
  const double qtr_min[] = {110.0, 60.0, 140.0};
  const double qtr_max[] = {1600.0, 1200.0, 2200.0};
  const double power_max[] = {160.0, 120.0, 180.0};
  const double surface[] = {3.13e6, 2.95e6, 2.34e6};
  p.level_min = level_min[n];
  p.level_max = level_max[n];
  p.tailrace_level = tailrace[n];
  p.head_min = p.level_min - p.tailrace_level;
  p.head_max = p.level_max - p.tailrace_level;
  p.qtr_min = qtr_min[n];
  p.qtr_max = qtr_max[n];
  p.qbr_min = 50.0;
  p.power_min = 0.0;
  p.power_max = power_max[n];
  p.surface_area = surface[n];
  p.efficiency = 0.9;
  p.ramp_limit = 300.0;
  p.delay_turbine_s = 100.0;
  p.delay_barrage_s = 60.0;
  return p;
}

inline cascade::CascadeInstance reference_cascade(int plants = 3, double delta = 120.0) {
  cascade::CascadeInstance instance;
  for (int n = 0; n < plants; ++n) instance.plants.push_back(reference_plant(n % 3));
  instance.period_seconds = delta;
  return instance;
}

// Variant whose level-tracking term carries real curvature in flow space:
// small reservoirs, wide level bands, slack ramps, long periods. Consensus
// splitting converges quickly here, while on near-linear instances it only
// drifts toward agreement.
inline cascade::CascadeInstance tight_tracking_cascade(int plants = 2, double delta = 600.0) {
  cascade::CascadeInstance instance = reference_cascade(plants, delta);
  for (auto& p : instance.plants) {
    const double mid = 0.5 * (p.level_min + p.level_max);
    p.level_min = mid - 8.0;
    p.level_max = mid + 8.0;
    p.head_min = p.level_min - p.tailrace_level;
    p.head_max = p.level_max - p.tailrace_level;
    p.surface_area = 2e5;
    p.ramp_limit = 2000.0;
  }
  return instance;
}

inline cascade::ScenarioSet smooth_scenarios(const cascade::CascadeInstance& instance, int omega,
                                             int periods) {
  cascade::ScenarioSet s;
  const int plants = instance.num_plants();
  s.ext_inflow.resize(plants);
  for (int n = 0; n < plants; ++n) {
    s.ext_inflow[n].resize(omega, periods);
    for (int w = 0; w < omega; ++w)
      for (int k = 0; k < periods; ++k)
        s.ext_inflow[n](w, k) = 80.0 + 20.0 * std::sin(0.3 * k + n) + 3.0 * w;
  }
  s.vres_power.resize(omega, periods);
  s.price_up.resize(omega, periods);
  s.price_down.resize(omega, periods);
  for (int w = 0; w < omega; ++w) {
    for (int k = 0; k < periods; ++k) {
      s.vres_power(w, k) = 60.0 + 30.0 * std::sin(0.25 * k + 0.5 * w);
      s.price_up(w, k) = 60.0 + 10.0 * std::sin(0.2 * k) + 2.0 * w;
      s.price_down(w, k) = 20.0 + 5.0 * std::cos(0.15 * k) + 1.0 * w;
    }
  }
  return s;
}

inline cascade::MarketAndObjective smooth_market(const cascade::CascadeInstance& instance,
                                                 int periods, double alpha = 10.0) {
  cascade::MarketAndObjective m;
  m.alpha = alpha;
  m.offer.resize(periods);
  for (int k = 0; k < periods; ++k) m.offer[k] = 8.0 + 2.0 * std::sin(0.1 * k);
  const int plants = instance.num_plants();
  m.level_ref.resize(plants, periods);
  for (int n = 0; n < plants; ++n) {
    const auto& p = instance.plants[n];
    m.level_ref.row(n).setConstant(0.5 * (p.level_min + p.level_max));
  }
  return m;
}

inline cascade::RollingState midrange_state(const cascade::CascadeInstance& instance) {
  cascade::RollingState st;
  const int plants = instance.num_plants();
  st.level.resize(plants);
  st.past_qtr.resize(plants);
  st.past_qbr.resize(plants);
  for (int n = 0; n < plants; ++n) {
    const auto& p = instance.plants[n];
    st.level[n] = 0.5 * (p.level_min + p.level_max);
    const int ntr = std::max(
        1, cascade::delay_to_periods(p.delay_turbine_s, instance.period_seconds));
    const int nbr = std::max(
        1, cascade::delay_to_periods(p.delay_barrage_s, instance.period_seconds));
    st.past_qtr[n] = Eigen::VectorXd::Constant(ntr, p.qtr_min + 0.25 * (p.qtr_max - p.qtr_min));
    st.past_qbr[n] = Eigen::VectorXd::Constant(nbr, p.qbr_min + 10.0);
  }
  return st;
}

}  // namespace fixtures
