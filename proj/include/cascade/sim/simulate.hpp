#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/model/instance.hpp"
#include "cascade/mpc/algorithm1.hpp"
#include "cascade/sim/generator.hpp"

namespace cascade {

// Which optimizer produces the step's controls.
//  kFull        — one coupled solve over every scenario at full horizon length.
//  kAggregated  — bound refinement with directly solved aggregated models.
//  kDistributed — bound refinement with the consensus splitting scheme.
enum class ControllerKind { kFull, kAggregated, kDistributed };

const char* controller_name(ControllerKind kind);
// Accepts "full" | "aggregated" | "distributed"; throws naming the value otherwise.
ControllerKind parse_controller(const std::string& name);

// Closed-loop experiment description. The episode is a pure function of
// (instance, config): every random draw derives from `seed`.
struct SimConfig {
  int num_steps = 120;        // closed-loop steps simulated
  int horizon = 90;           // look-ahead periods per controller call
  int num_scenarios = 8;      // forecast fan size per call
  std::uint64_t seed = 1;
  double period_seconds = 0.0;  // 0 keeps the instance's sampling interval
  GeneratorSpec generator;
  ControllerKind controller = ControllerKind::kDistributed;
  AlgoConfig algo;
  // Committed market position per period (MWh): mean + amplitude * daily sinusoid.
  double offer_mean = 0.0;
  double offer_amplitude = 0.0;
  double offer_phase = 0.0;
  // Starting levels and discharge history; empty level means mid-band defaults.
  RollingState initial;
  // Where the command-line front end drops episode/bounds/bench files.
  std::string out_dir;

  void validate(const CascadeInstance& instance) const;
};

// One closed-loop step. `level` is the end-of-step storage; `head` is the
// operating head the step's power was generated at (start-of-step level minus
// tailrace); `inflow` is the realized total inflow including routed upstream
// releases.
struct StepLog {
  int step = 0;
  Eigen::VectorXd turbine;  // applied turbine discharge (m^3/s)
  Eigen::VectorXd barrage;  // applied spill discharge (m^3/s)
  Eigen::VectorXd level;    // m
  Eigen::VectorXd head;     // m
  Eigen::VectorXd power;    // MW
  Eigen::VectorXd inflow;   // m^3/s
  double vres_mw = 0.0;
  double price_up = 0.0;    // currency per MWh bought back
  double price_down = 0.0;  // currency per MWh sold off
  double offer_mwh = 0.0;
  double shortfall_mwh = 0.0;
  double surplus_mwh = 0.0;
  double cost = 0.0;          // price_up * shortfall - price_down * surplus
  double wall_seconds = 0.0;  // controller call only; never written to episode files
  // First-step settlement the coupled solve expects (scenario mean); NaN for
  // the bounding controllers.
  double predicted_cost = 0.0;
  bool clamped = false;  // realized level left the band and was pushed back
  BoundsRecord bounds;   // refinement trace; empty for the coupled controller
};

struct EpisodeLog {
  std::vector<StepLog> steps;
  double total_cost = 0.0;
  double mean_wall_seconds = 0.0;
  int violations = 0;  // number of clamped steps
};

// Mid-band levels with steady discharge history long enough for every delay
// window: turbine at a quarter of its range, spill at its floor.
RollingState default_rolling_state(const CascadeInstance& instance);

// Rolling-horizon closed loop: draw forecasts, solve for the first-period
// controls, apply them against the realized inflow/renewable path through the
// storage recursion, settle the realized imbalance, shift the history window.
// Levels leaving their band are clamped back and flagged; the episode always
// runs to completion.
EpisodeLog simulate(const CascadeInstance& instance, const SimConfig& config);

struct BenchRow {
  ControllerKind controller = ControllerKind::kFull;
  double mean_step_seconds = 0.0;
  double total_cost = 0.0;
  // Mean certified optimality gap over the episode; NaN when the controller
  // produces no certified gaps.
  double mean_gap_percent = 0.0;
  // Mean-step-time reduction relative to the first controller; NaN for row 0.
  double speedup_percent = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<EpisodeLog> episodes;  // one per controller, same order
};

// Runs each controller on the identical episode (same instance, config, seed),
// sequentially to keep the timings clean. Needs at least two controllers.
BenchResult benchmark(const CascadeInstance& instance, const SimConfig& config,
                      const std::vector<ControllerKind>& controllers);

}  // namespace cascade
