#pragma once

// Assembles the centralized full-horizon stochastic dispatch QP: reservoir
// dynamics with travel-time delays, discharge ramping, the convex envelope of
// the discharge-head power product, per-period energy balance against the
// offer, shared first-period controls across scenarios, and an objective of
// imbalance cost plus quadratic level tracking.

#include "cascade/model/instance.hpp"
#include "cascade/qp/types.hpp"

#include <cstdint>

namespace cascade {

// Registry key kinds for every decision variable of the dispatch models.
// Control* are the scenario-shared first-period discharges (per plant);
// Shortfall/Surplus are the per-(scenario, period) energy imbalances.
enum class Var : std::int16_t {
  kControlTurbine = 0,
  kControlBarrage = 1,
  kPower = 2,
  kLevel = 3,
  kTurbine = 4,
  kBarrage = 5,
  kHead = 6,
  kInflow = 7,
  kShortfall = 8,
  kSurplus = 9,
};

inline qp::VarKey control_key(Var kind, int plant) {
  return qp::VarKey{static_cast<std::int16_t>(kind), static_cast<std::int16_t>(plant), -1, -1};
}

inline qp::VarKey plant_key(Var kind, int plant, int scenario, int period) {
  return qp::VarKey{static_cast<std::int16_t>(kind), static_cast<std::int16_t>(plant), scenario,
                    period};
}

inline qp::VarKey balance_key(Var kind, int scenario, int period) {
  return qp::VarKey{static_cast<std::int16_t>(kind), -1, scenario, period};
}

struct FullModelHandle {
  qp::QpProblem problem;
  qp::VariableRegistry registry;
  // Constant part of the tracking objective (sum of squared references); the
  // QP stores only the quadratic and linear parts, so the true objective is
  // problem value + objective_constant.
  double objective_constant = 0.0;
  int num_plants = 0;
  int num_scenarios = 0;
  int num_periods = 0;
};

// Builds the full-scale model over `horizon` periods. All scenario and market
// series must span exactly `horizon` periods; every routing delay must be
// shorter than the horizon.
FullModelHandle build_full_model(const CascadeInstance& instance, const ScenarioSet& scenarios,
                                 const MarketAndObjective& market, const RollingState& state,
                                 int horizon);

// Implemented discharge `offset` periods before the current window (offset 1
// is the most recent); used to resolve delayed terms that reach pre-horizon
// periods and to anchor the first-period ramp limit.
double history_lookup(const Eigen::VectorXd& history, int offset);

}  // namespace cascade
