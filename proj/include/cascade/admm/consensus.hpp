#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cascade/model/instance.hpp"
#include "cascade/qp/solve.hpp"
#include "cascade/tsa/aggregate.hpp"

namespace cascade {

// Step size and termination settings for the consensus iteration.
struct AdmmConfig {
  double rho = 1.0;                // quadratic penalty weight, > 0
  int max_iters = 2000;            // iteration cap, >= 1
  double obj_tol_percent = 0.001;  // relative objective change, in percent, > 0
  void validate() const;
};

// Slot arithmetic for the per-(plant, scenario) consensus stacks. A stack
// lists the water-side copies first (upstream discharges where the plant has
// an upstream neighbour, then own discharges and power) and the market-side
// copies of the same plant's discharges and power last, so the two owner
// masks partition every stack.
struct ConsensusLayout {
  int num_plants = 0;
  int num_scenarios = 0;
  int num_reps = 0;

  int stack_length(int plant) const;  // 8R interior, 6R for the head plant
  int hydro_slots(int plant) const;   // water-side width: 5R, head plant 3R
  int balance_slots() const { return 3 * num_reps; }

  int slot_upstream_turbine(int plant, int r) const;  // plants >= 1 only
  int slot_upstream_barrage(int plant, int r) const;  // plants >= 1 only
  int slot_own_turbine(int plant, int r) const;
  int slot_own_barrage(int plant, int r) const;
  int slot_own_power(int plant, int r) const;
  int slot_balance_turbine(int plant, int r) const;
  int slot_balance_barrage(int plant, int r) const;
  int slot_balance_power(int plant, int r) const;

  // Live copies of one physical scalar: own subproblem plus the market side,
  // plus the downstream subproblem's upstream copy for discharges of plants
  // that feed a neighbour.
  int discharge_copies(int plant) const;
  int power_copies() const { return 2; }

  int stack_index(int plant, int scenario) const { return plant * num_scenarios + scenario; }
  void validate() const;
};

// Globals, locals and duals, one stack per (plant, scenario), indexed by
// ConsensusLayout::stack_index. objective is the aggregated cost evaluated
// at the locals after the latest iteration.
struct ConsensusState {
  std::vector<Eigen::VectorXd> global;
  std::vector<Eigen::VectorXd> local;
  std::vector<Eigen::VectorXd> dual;
  int iteration = 0;
  double objective = qp::kInf;
};

// Water-side subproblem of one (plant, scenario): reservoir dynamics, inflow
// routing with delays, ramping, head link, power envelope, and the
// level-tracking cost, over local copies of the coupled discharges/power.
// Upstream copies carry no bounds of their own; consensus supplies them.
struct HydroSubproblem {
  int plant = -1;
  int scenario = -1;
  std::optional<qp::PreparedQp> prepared;
  Eigen::VectorXd base_linear;  // cost gradient before consensus terms
  Eigen::VectorXd level_ref;    // per-cluster tracking target
  // Variable indices by cluster.
  std::vector<int> var_level, var_head, var_turbine, var_barrage, var_inflow, var_power;
  std::vector<int> var_up_turbine, var_up_barrage;  // empty for the head plant
  Eigen::VectorXd solution;                         // latest locals
};

// Market-side subproblem: energy balance with imbalance cost, box bounds on
// its discharge/power copies, and the first-stage linking rows.
struct BalanceSubproblem {
  std::optional<qp::PreparedQp> prepared;
  Eigen::VectorXd base_linear;
  std::vector<int> var_u_turbine, var_u_barrage;  // per plant
  // Copies indexed (plant * num_scenarios + scenario) * num_reps + r.
  std::vector<int> var_copy_turbine, var_copy_barrage, var_copy_power;
  std::vector<int> var_shortfall, var_surplus;  // scenario * num_reps + r
  Eigen::VectorXd solution;
};

struct SubproblemSet {
  ConsensusLayout layout;
  std::vector<HydroSubproblem> hydro;  // plant-major, scenario-minor
  BalanceSubproblem balance;
  double rho = 0.0;
  double alpha = 0.0;
  Eigen::MatrixXd mass_up, mass_dn;  // imbalance price mass per (scenario, cluster)
};

// Splits the tail-aggregated model into one water subproblem per
// (plant, scenario) plus one market subproblem, coupled only through the
// consensus stacks. Every constraint row of the aggregated model lands in
// exactly one subproblem.
SubproblemSet split_consensus(const CascadeInstance& instance, const ScenarioSet& scenarios,
                              const MarketAndObjective& market, const RollingState& state,
                              const ClusterMap& map, double rho);

// Zero-initialized globals, locals and duals for a decomposition.
ConsensusState make_consensus_state(const ConsensusLayout& layout);

// Step I: re-solve every subproblem against the current globals and duals,
// then refresh the local stacks. Throws on any subproblem solve failure.
void local_update(SubproblemSet& set, ConsensusState& state);

// Step II: set every global scalar to the mean of its live copies.
void global_update(const SubproblemSet& set, ConsensusState& state);

// Step III: one dual ascent step on every stack.
void dual_update(const SubproblemSet& set, ConsensusState& state);

// Aggregated cost at the current locals: imbalance price mass on the market
// side plus quadratic level tracking on the water side.
double consensus_objective(const SubproblemSet& set);

struct AdmmTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;  // l2 mismatch between locals and globals
  double dual_residual = 0.0;    // rho-scaled l2 change of the globals
  double wall_time = 0.0;        // seconds since the run started
};

struct AdmmResult {
  Eigen::VectorXd u_turbine, u_barrage;  // first-stage discharge per plant
  double objective = 0.0;                // aggregated cost at the final locals
  bool converged = false;                // false when the iteration cap hit
  int iterations = 0;
  std::vector<AdmmTraceRow> trace;
};

// Runs Steps I-III from zero-initialized state until the relative objective
// change in percent drops to config.obj_tol_percent, or the iteration cap is
// reached. First-stage controls are read from the market subproblem.
AdmmResult run_admm(const CascadeInstance& instance, const ScenarioSet& scenarios,
                    const MarketAndObjective& market, const RollingState& state,
                    const ClusterMap& map, const AdmmConfig& config);

}  // namespace cascade
