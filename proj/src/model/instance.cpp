#include "cascade/model/instance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace cascade {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

std::string at_plant(int plant) { return " (plant " + std::to_string(plant) + ")"; }

void require_finite(double v, const char* field, int plant) {
  if (!std::isfinite(v)) fail(std::string(field) + " must be finite" + at_plant(plant));
}

}  // namespace

void PlantParams::validate(int plant_index) const {
  const std::pair<double, const char*> fields[] = {
      {surface_area, "PlantParams.surface_area"},
      {level_min, "PlantParams.level_min"},
      {level_max, "PlantParams.level_max"},
      {tailrace_level, "PlantParams.tailrace_level"},
      {head_min, "PlantParams.head_min"},
      {head_max, "PlantParams.head_max"},
      {qtr_min, "PlantParams.qtr_min"},
      {qtr_max, "PlantParams.qtr_max"},
      {qbr_min, "PlantParams.qbr_min"},
      {power_min, "PlantParams.power_min"},
      {power_max, "PlantParams.power_max"},
      {efficiency, "PlantParams.efficiency"},
      {ramp_limit, "PlantParams.ramp_limit"},
      {delay_turbine_s, "PlantParams.delay_turbine_s"},
      {delay_barrage_s, "PlantParams.delay_barrage_s"}};
  for (auto [v, name] : fields) require_finite(v, name, plant_index);
  if (surface_area <= 0.0) fail("PlantParams.surface_area must be positive" + at_plant(plant_index));
  if (level_min > level_max) fail("PlantParams.level_min exceeds level_max" + at_plant(plant_index));
  if (qtr_min > qtr_max) fail("PlantParams.qtr_min exceeds qtr_max" + at_plant(plant_index));
  if (qtr_min < 0.0) fail("PlantParams.qtr_min must be nonnegative" + at_plant(plant_index));
  if (qbr_min < 0.0) fail("PlantParams.qbr_min must be nonnegative" + at_plant(plant_index));
  if (power_min > power_max) fail("PlantParams.power_min exceeds power_max" + at_plant(plant_index));
  if (efficiency <= 0.0 || efficiency > 1.0)
    fail("PlantParams.efficiency must lie in (0, 1]" + at_plant(plant_index));
  if (ramp_limit <= 0.0) fail("PlantParams.ramp_limit must be positive" + at_plant(plant_index));
  if (delay_turbine_s < 0.0)
    fail("PlantParams.delay_turbine_s must be nonnegative" + at_plant(plant_index));
  if (delay_barrage_s < 0.0)
    fail("PlantParams.delay_barrage_s must be nonnegative" + at_plant(plant_index));
  constexpr double kHeadTol = 1e-9;
  if (std::abs(head_min - (level_min - tailrace_level)) > kHeadTol)
    fail("PlantParams.head_min inconsistent with level_min - tailrace_level" + at_plant(plant_index));
  if (std::abs(head_max - (level_max - tailrace_level)) > kHeadTol)
    fail("PlantParams.head_max inconsistent with level_max - tailrace_level" + at_plant(plant_index));
}

double CascadeInstance::power_coefficient(int plant) const {
  return 1e-6 * water_density * gravity * plants.at(plant).efficiency;
}

void CascadeInstance::validate() const {
  if (plants.empty()) fail("CascadeInstance.plants must contain at least one plant");
  if (!(period_seconds > 0.0)) fail("CascadeInstance.period_seconds must be positive");
  if (!(water_density > 0.0)) fail("CascadeInstance.water_density must be positive");
  if (!(gravity > 0.0)) fail("CascadeInstance.gravity must be positive");
  for (int n = 0; n < num_plants(); ++n) plants[n].validate(n);
}

void ScenarioSet::validate(int expected_plants) const {
  const int omega = num_scenarios();
  const int periods = num_periods();
  if (omega < 1) fail("ScenarioSet.vres_power must have at least one scenario row");
  if (periods < 1) fail("ScenarioSet.vres_power must have at least one period column");
  if (static_cast<int>(ext_inflow.size()) != expected_plants)
    fail("ScenarioSet.ext_inflow must have one series per plant, got " +
         std::to_string(ext_inflow.size()) + " for " + std::to_string(expected_plants) + " plants");
  for (int n = 0; n < expected_plants; ++n) {
    const auto& series = ext_inflow[n];
    if (series.rows() != omega || series.cols() != periods)
      fail("ScenarioSet.ext_inflow has mismatched shape" + at_plant(n));
    if (!series.allFinite()) fail("ScenarioSet.ext_inflow must be finite" + at_plant(n));
    if ((series.array() < 0.0).any()) fail("ScenarioSet.ext_inflow must be nonnegative" + at_plant(n));
  }
  const std::pair<const Eigen::MatrixXd*, const char*> series_fields[] = {
      {&vres_power, "ScenarioSet.vres_power"},
      {&price_up, "ScenarioSet.price_up"},
      {&price_down, "ScenarioSet.price_down"}};
  for (auto [m, name] : series_fields) {
    if (m->rows() != omega || m->cols() != periods)
      fail(std::string(name) + " has mismatched shape");
    if (!m->allFinite()) fail(std::string(name) + " must be finite");
  }
  if ((price_down.array() < 0.0).any()) fail("ScenarioSet.price_down must be nonnegative");
  if ((price_up.array() < price_down.array()).any())
    fail("ScenarioSet.price_up must dominate price_down elementwise");
}

void MarketAndObjective::validate(const CascadeInstance& instance, int expected_periods) const {
  if (static_cast<int>(offer.size()) != expected_periods)
    fail("MarketAndObjective.offer must have " + std::to_string(expected_periods) +
         " periods, got " + std::to_string(offer.size()));
  if (!offer.allFinite()) fail("MarketAndObjective.offer must be finite");
  if (level_ref.rows() != instance.num_plants() || level_ref.cols() != expected_periods)
    fail("MarketAndObjective.level_ref must be (num_plants x num_periods)");
  if (!level_ref.allFinite()) fail("MarketAndObjective.level_ref must be finite");
  for (int n = 0; n < instance.num_plants(); ++n) {
    const auto& plant = instance.plants[n];
    if ((level_ref.row(n).array() < plant.level_min).any() ||
        (level_ref.row(n).array() > plant.level_max).any())
      fail("MarketAndObjective.level_ref outside reservoir level bounds" + at_plant(n));
  }
  if (!(alpha >= 0.0)) fail("MarketAndObjective.alpha must be nonnegative");
}

void RollingState::validate(const CascadeInstance& instance) const {
  const int plants = instance.num_plants();
  if (static_cast<int>(level.size()) != plants)
    fail("RollingState.level must have one entry per plant");
  if (static_cast<int>(past_qtr.size()) != plants)
    fail("RollingState.past_qtr must have one series per plant");
  if (static_cast<int>(past_qbr.size()) != plants)
    fail("RollingState.past_qbr must have one series per plant");
  for (int n = 0; n < plants; ++n) {
    const auto& plant = instance.plants[n];
    if (!std::isfinite(level[n])) fail("RollingState.level must be finite" + at_plant(n));
    if (level[n] < plant.level_min || level[n] > plant.level_max)
      fail("RollingState.level outside reservoir bounds" + at_plant(n));
    const int need_qtr =
        std::max(1, delay_to_periods(plant.delay_turbine_s, instance.period_seconds));
    const int need_qbr = delay_to_periods(plant.delay_barrage_s, instance.period_seconds);
    if (static_cast<int>(past_qtr[n].size()) < need_qtr)
      fail("RollingState.past_qtr shorter than the delay window" + at_plant(n));
    if (static_cast<int>(past_qbr[n].size()) < need_qbr)
      fail("RollingState.past_qbr shorter than the delay window" + at_plant(n));
    if (past_qtr[n].size() > 0 && !past_qtr[n].allFinite())
      fail("RollingState.past_qtr must be finite" + at_plant(n));
    if (past_qbr[n].size() > 0 && !past_qbr[n].allFinite())
      fail("RollingState.past_qbr must be finite" + at_plant(n));
  }
}

int delay_to_periods(double tau_seconds, double delta_seconds) {
  if (tau_seconds < 0.0) fail("delay_to_periods: tau_seconds must be nonnegative");
  if (!(delta_seconds > 0.0)) fail("delay_to_periods: delta_seconds must be positive");
  return static_cast<int>(std::floor(tau_seconds / delta_seconds + 0.5));
}

double hydropower_power(const CascadeInstance& instance, int plant, double q_tr, double head) {
  return instance.power_coefficient(plant) * q_tr * head;
}

std::array<EnvelopeRow, 4> mccormick_rows(const PlantParams& plant) {
  const double ql = plant.qtr_min, qu = plant.qtr_max;
  const double hl = plant.head_min, hu = plant.head_max;
  return {EnvelopeRow{hl, ql, -ql * hl, true}, EnvelopeRow{hu, qu, -qu * hu, true},
          EnvelopeRow{hu, ql, -ql * hu, false}, EnvelopeRow{hl, qu, -qu * hl, false}};
}

}  // namespace cascade
