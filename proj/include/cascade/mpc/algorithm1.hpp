#pragma once

// Performance-guaranteed receding-horizon controller: refine the aggregated
// model through a growing representative count, take each refinement's
// optimum as a lower bound, project its first-stage controls through the
// full-scale model for an upper bound, and stop once the certified gap
// closes below tolerance.

#include "cascade/admm/consensus.hpp"

#include <vector>

namespace cascade {

// Source of the per-refinement lower bound: the consensus iteration's
// settled objective (distributed, possibly inexact at its iteration cap) or
// a direct centralized solve of the same aggregated model (always certified
// when the solver reports optimality, and the controls come from the same
// solve).
enum class LowerBoundMode { kConsensus, kDirect };

struct AlgoConfig {
  double alpha = 10.0;            // level-tracking weight applied to the objective
  double gap_tol_percent = 1.0;   // certified-gap termination threshold
  int r0 = 50;                    // representative count of the first refinement
  int gamma = 50;                 // representative increment per refinement
  int max_outer = 12;             // refinement cap
  LowerBoundMode lb_mode = LowerBoundMode::kConsensus;
  AdmmConfig admm;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// First-period discharges shared by every scenario, one entry per plant.
struct ControlAction {
  Eigen::VectorXd turbine;
  Eigen::VectorXd barrage;
};

// One refinement of the outer loop.
struct OuterRecord {
  int outer = 0;                 // refinement index j, from 0
  int reps = 0;                  // representative count used
  double lower = 0.0;            // this refinement's lower bound
  double upper = 0.0;            // running-minimum upper bound
  double gap_percent = 0.0;      // 100 (upper - lower) / max(|upper|, 1e-9)
  bool lower_certified = true;   // false when the bound came from an unconverged run
  int admm_iterations = 0;
  double lower_seconds = 0.0;    // wall time of the lower-bound phase
  double projection_seconds = 0.0;
};

struct BoundsRecord {
  std::vector<OuterRecord> outer;
  double lower = 0.0;       // lower bound of the final refinement
  double upper = 0.0;       // best upper bound across refinements
  double gap_percent = 0.0; // final certified gap (last certified row)
  bool gap_met = false;     // terminated by the gap test rather than the caps
  ControlAction control;    // the controls that produced `upper`
};

// Objective of the full-scale model with the first-period controls pinned to
// `action`: scenarios decouple, so each one is solved as an independent QP
// and the per-scenario objectives are summed. Any scenario reported
// infeasible (for instance a ramp-incompatible action) yields +infinity.
// The result is the objective of a feasible full-scale point, hence an
// upper bound on the full-scale optimum.
double project_upper_bound(const CascadeInstance& instance, const ScenarioSet& scenarios,
                           const MarketAndObjective& market, const RollingState& state,
                           const ControlAction& action);

// The refinement loop: representative counts r0, r0+gamma, ... capped at the
// full horizon, each refinement contributing a lower bound and a projected
// upper bound. Terminates on a certified gap <= gap_tol_percent, on the
// refinement cap, or after the full-horizon refinement (whose aggregation is
// the identity). The tracking weight used throughout is config.alpha;
// market.alpha is ignored here so one knob governs the whole controller.
BoundsRecord run_algorithm1(const CascadeInstance& instance, const ScenarioSet& scenarios,
                            const MarketAndObjective& market, const RollingState& state,
                            const AlgoConfig& config);

// One receding-horizon step: run the refinement loop on the current window
// and return the first-period action to implement together with the bounds
// evidence. History shifting and level propagation stay with the simulator.
struct MpcStepResult {
  ControlAction action;
  BoundsRecord bounds;
};

MpcStepResult mpc_step(const CascadeInstance& instance, const ScenarioSet& scenarios,
                       const MarketAndObjective& market, const RollingState& state,
                       const AlgoConfig& config);

}  // namespace cascade
