#include "cascade/admm/consensus.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "cascade/util/parallel.hpp"

namespace cascade {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void AdmmConfig::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("AdmmConfig.rho must be positive");
  if (max_iters < 1) throw std::invalid_argument("AdmmConfig.max_iters must be at least 1");
  if (!(obj_tol_percent > 0.0))
    throw std::invalid_argument("AdmmConfig.obj_tol_percent must be positive");
}

int ConsensusLayout::stack_length(int plant) const {
  return hydro_slots(plant) + balance_slots();
}

int ConsensusLayout::hydro_slots(int plant) const {
  if (plant < 0 || plant >= num_plants)
    throw std::invalid_argument("ConsensusLayout: plant " + std::to_string(plant) +
                                " outside [0, " + std::to_string(num_plants) + ")");
  return (plant == 0 ? 3 : 5) * num_reps;
}

int ConsensusLayout::slot_upstream_turbine(int plant, int r) const {
  if (plant < 1 || plant >= num_plants)
    throw std::invalid_argument("ConsensusLayout: plant " + std::to_string(plant) +
                                " has no upstream slots");
  return 0 * num_reps + r;
}

int ConsensusLayout::slot_upstream_barrage(int plant, int r) const {
  return slot_upstream_turbine(plant, r) + num_reps;
}

int ConsensusLayout::slot_own_turbine(int plant, int r) const {
  return (plant == 0 ? 0 : 2 * num_reps) + r;
}

int ConsensusLayout::slot_own_barrage(int plant, int r) const {
  return slot_own_turbine(plant, r) + num_reps;
}

int ConsensusLayout::slot_own_power(int plant, int r) const {
  return slot_own_turbine(plant, r) + 2 * num_reps;
}

int ConsensusLayout::slot_balance_turbine(int plant, int r) const {
  return hydro_slots(plant) + r;
}

int ConsensusLayout::slot_balance_barrage(int plant, int r) const {
  return hydro_slots(plant) + num_reps + r;
}

int ConsensusLayout::slot_balance_power(int plant, int r) const {
  return hydro_slots(plant) + 2 * num_reps + r;
}

int ConsensusLayout::discharge_copies(int plant) const {
  if (plant < 0 || plant >= num_plants)
    throw std::invalid_argument("ConsensusLayout: plant " + std::to_string(plant) +
                                " outside [0, " + std::to_string(num_plants) + ")");
  return plant + 1 < num_plants ? 3 : 2;
}

void ConsensusLayout::validate() const {
  if (num_plants < 1) throw std::invalid_argument("ConsensusLayout.num_plants must be positive");
  if (num_scenarios < 1)
    throw std::invalid_argument("ConsensusLayout.num_scenarios must be positive");
  if (num_reps < 1) throw std::invalid_argument("ConsensusLayout.num_reps must be positive");
}

SubproblemSet split_consensus(const CascadeInstance& instance, const ScenarioSet& scenarios,
                              const MarketAndObjective& market, const RollingState& state,
                              const ClusterMap& map, double rho) {
  instance.validate();
  const int plants = instance.num_plants();
  scenarios.validate(plants);
  map.validate();
  if (scenarios.num_periods() != map.full_periods)
    throw std::invalid_argument("split_consensus: ScenarioSet spans " +
                                std::to_string(scenarios.num_periods()) + " periods, expected " +
                                std::to_string(map.full_periods));
  market.validate(instance, map.full_periods);
  state.validate(instance);
  if (!(rho > 0.0)) throw std::invalid_argument("split_consensus: rho must be positive");

  const double delta = instance.period_seconds;
  const double delta_hours = delta / 3600.0;
  const int reps = map.num_clusters();
  const int omega = scenarios.num_scenarios();

  std::vector<int> delay_tr(plants), delay_br(plants);
  for (int n = 0; n < plants; ++n) {
    delay_tr[n] = delay_to_periods(instance.plants[n].delay_turbine_s, delta);
    delay_br[n] = delay_to_periods(instance.plants[n].delay_barrage_s, delta);
    const bool feeds_downstream = n + 1 < plants;
    if (feeds_downstream && (delay_tr[n] >= map.full_periods || delay_br[n] >= map.full_periods))
      throw std::invalid_argument("split_consensus: routing delay spans the whole horizon (plant " +
                                  std::to_string(n) + ")");
  }

  std::vector<Eigen::MatrixXd> inflow_r(plants);
  for (int n = 0; n < plants; ++n) inflow_r[n] = aggregate_columns(scenarios.ext_inflow[n], map);
  const Eigen::MatrixXd vres_r = aggregate_columns(scenarios.vres_power, map);
  const Eigen::MatrixXd price_up_r = aggregate_columns(scenarios.price_up, map);
  const Eigen::MatrixXd price_down_r = aggregate_columns(scenarios.price_down, map);
  const Eigen::VectorXd offer_r = aggregate_series(market.offer, map);
  Eigen::MatrixXd ref_r(plants, reps);
  for (int n = 0; n < plants; ++n)
    ref_r.row(n) = aggregate_series(market.level_ref.row(n).transpose(), map).transpose();

  SubproblemSet set;
  set.layout = ConsensusLayout{plants, omega, reps};
  set.layout.validate();
  set.rho = rho;
  set.alpha = market.alpha;
  set.mass_up = price_up_r;
  set.mass_dn = price_down_r;
  for (int r = 0; r < reps; ++r) {
    set.mass_up.col(r) *= static_cast<double>(map.size[r]);
    set.mass_dn.col(r) *= static_cast<double>(map.size[r]);
  }

  // Water-side subproblems.
  set.hydro.reserve(static_cast<std::size_t>(plants) * omega);
  for (int n = 0; n < plants; ++n) {
    const auto& plant = instance.plants[n];
    const double coef = instance.power_coefficient(n);
    for (int w = 0; w < omega; ++w) {
      HydroSubproblem sub;
      sub.plant = n;
      sub.scenario = w;
      sub.level_ref = ref_r.row(n).transpose();

      qp::ProblemBuilder builder;
      sub.var_level.resize(reps);
      sub.var_head.resize(reps);
      sub.var_turbine.resize(reps);
      sub.var_barrage.resize(reps);
      sub.var_inflow.resize(reps);
      sub.var_power.resize(reps);
      if (n >= 1) {
        sub.var_up_turbine.resize(reps);
        sub.var_up_barrage.resize(reps);
      }
      for (int r = 0; r < reps; ++r) {
        sub.var_level[r] = r == 0 ? builder.add_var(state.level[n], state.level[n])
                                  : builder.add_var(plant.level_min, plant.level_max);
        sub.var_head[r] = builder.add_var(plant.head_min, plant.head_max);
        sub.var_turbine[r] = builder.add_var(plant.qtr_min, plant.qtr_max);
        sub.var_barrage[r] = builder.add_var(plant.qbr_min, qp::kInf);
        sub.var_inflow[r] = builder.add_var();
        sub.var_power[r] = builder.add_var(plant.power_min, plant.power_max);
        if (n >= 1) {
          // Copies of the upstream discharges; bounds stay with their owner.
          sub.var_up_turbine[r] = builder.add_var();
          sub.var_up_barrage[r] = builder.add_var();
        }
      }

      for (int r = 0; r < reps; ++r) {
        double inflow_rhs = inflow_r[n](w, r);
        int live_qtr = -1, live_qbr = -1;
        if (n >= 1) {
          const int src_tr = map.last(r) - delay_tr[n - 1];
          if (src_tr >= 0) {
            live_qtr = sub.var_up_turbine[map.cluster_of(src_tr)];
          } else {
            inflow_rhs += history_lookup(state.past_qtr[n - 1], -src_tr);
          }
          const int src_br = map.last(r) - delay_br[n - 1];
          if (src_br >= 0) {
            live_qbr = sub.var_up_barrage[map.cluster_of(src_br)];
          } else {
            inflow_rhs += history_lookup(state.past_qbr[n - 1], -src_br);
          }
        }
        const int r_in = builder.begin_row(inflow_rhs, inflow_rhs);
        builder.coeff(r_in, sub.var_inflow[r], 1.0);
        if (live_qtr >= 0) builder.coeff(r_in, live_qtr, -1.0);
        if (live_qbr >= 0) builder.coeff(r_in, live_qbr, -1.0);

        const int r_head = builder.begin_row(-plant.tailrace_level, -plant.tailrace_level);
        builder.coeff(r_head, sub.var_head[r], 1.0);
        builder.coeff(r_head, sub.var_level[r], -1.0);

        if (r >= 1) {
          const double step = map.size[r] * delta / plant.surface_area;
          const int r_dyn = builder.begin_row(0.0, 0.0);
          builder.coeff(r_dyn, sub.var_level[r], 1.0);
          builder.coeff(r_dyn, sub.var_level[r - 1], -1.0);
          builder.coeff(r_dyn, sub.var_inflow[r], -step);
          builder.coeff(r_dyn, sub.var_turbine[r], step);
          builder.coeff(r_dyn, sub.var_barrage[r], step);

          const int r_up = builder.begin_row(-qp::kInf, plant.ramp_limit);
          builder.coeff(r_up, sub.var_turbine[r], 1.0);
          builder.coeff(r_up, sub.var_turbine[r - 1], -1.0);
          const int r_dn = builder.begin_row(-qp::kInf, plant.ramp_limit);
          builder.coeff(r_dn, sub.var_turbine[r], -1.0);
          builder.coeff(r_dn, sub.var_turbine[r - 1], 1.0);
        } else {
          const double last = history_lookup(state.past_qtr[n], 1);
          const int r_up = builder.begin_row(-qp::kInf, plant.ramp_limit + last);
          builder.coeff(r_up, sub.var_turbine[r], 1.0);
          const int r_dn = builder.begin_row(-qp::kInf, plant.ramp_limit - last);
          builder.coeff(r_dn, sub.var_turbine[r], -1.0);
        }

        for (const auto& face : mccormick_rows(plant)) {
          const double rhs = coef * face.offset;
          const int row = face.lower ? builder.begin_row(rhs, qp::kInf)
                                     : builder.begin_row(-qp::kInf, rhs);
          builder.coeff(row, sub.var_power[r], 1.0);
          builder.coeff(row, sub.var_turbine[r], -coef * face.q_coef);
          builder.coeff(row, sub.var_head[r], -coef * face.h_coef);
        }

        builder.add_quadratic(sub.var_level[r], market.alpha);
        builder.add_linear(sub.var_level[r], -2.0 * market.alpha * ref_r(n, r));

        // Consensus penalty curvature on every copy this side holds.
        builder.add_quadratic(sub.var_turbine[r], 0.5 * rho);
        builder.add_quadratic(sub.var_barrage[r], 0.5 * rho);
        builder.add_quadratic(sub.var_power[r], 0.5 * rho);
        if (n >= 1) {
          builder.add_quadratic(sub.var_up_turbine[r], 0.5 * rho);
          builder.add_quadratic(sub.var_up_barrage[r], 0.5 * rho);
        }
      }

      qp::QpProblem problem = builder.finish();
      sub.base_linear = problem.linear_cost;
      sub.prepared.emplace(std::move(problem));
      set.hydro.push_back(std::move(sub));
    }
  }

  // Market-side subproblem.
  {
    BalanceSubproblem& sub = set.balance;
    qp::ProblemBuilder builder;
    sub.var_u_turbine.resize(plants);
    sub.var_u_barrage.resize(plants);
    for (int n = 0; n < plants; ++n) {
      const auto& plant = instance.plants[n];
      sub.var_u_turbine[n] = builder.add_var(plant.qtr_min, plant.qtr_max);
      sub.var_u_barrage[n] = builder.add_var(plant.qbr_min, qp::kInf);
    }
    sub.var_copy_turbine.resize(static_cast<std::size_t>(plants) * omega * reps);
    sub.var_copy_barrage.resize(sub.var_copy_turbine.size());
    sub.var_copy_power.resize(sub.var_copy_turbine.size());
    for (int n = 0; n < plants; ++n) {
      const auto& plant = instance.plants[n];
      for (int w = 0; w < omega; ++w) {
        for (int r = 0; r < reps; ++r) {
          const int idx = (n * omega + w) * reps + r;
          sub.var_copy_turbine[idx] = builder.add_var(plant.qtr_min, plant.qtr_max);
          sub.var_copy_barrage[idx] = builder.add_var(plant.qbr_min, qp::kInf);
          sub.var_copy_power[idx] = builder.add_var(plant.power_min, plant.power_max);
          builder.add_quadratic(sub.var_copy_turbine[idx], 0.5 * rho);
          builder.add_quadratic(sub.var_copy_barrage[idx], 0.5 * rho);
          builder.add_quadratic(sub.var_copy_power[idx], 0.5 * rho);
        }
      }
    }
    sub.var_shortfall.resize(static_cast<std::size_t>(omega) * reps);
    sub.var_surplus.resize(sub.var_shortfall.size());
    for (int w = 0; w < omega; ++w) {
      for (int r = 0; r < reps; ++r) {
        const int idx = w * reps + r;
        sub.var_shortfall[idx] = builder.add_var(0.0, qp::kInf);
        sub.var_surplus[idx] = builder.add_var(0.0, qp::kInf);
        builder.add_linear(sub.var_shortfall[idx], set.mass_up(w, r));
        builder.add_linear(sub.var_surplus[idx], -set.mass_dn(w, r));
      }
    }

    for (int w = 0; w < omega; ++w) {
      for (int r = 0; r < reps; ++r) {
        const double rhs = offer_r[r] - delta_hours * vres_r(w, r);
        const int r_bal = builder.begin_row(rhs, rhs);
        for (int n = 0; n < plants; ++n)
          builder.coeff(r_bal, sub.var_copy_power[(n * omega + w) * reps + r], delta_hours);
        builder.coeff(r_bal, sub.var_shortfall[w * reps + r], 1.0);
        builder.coeff(r_bal, sub.var_surplus[w * reps + r], -1.0);
      }
    }
    for (int n = 0; n < plants; ++n) {
      for (int w = 0; w < omega; ++w) {
        const int r_tr = builder.begin_row(0.0, 0.0);
        builder.coeff(r_tr, sub.var_copy_turbine[(n * omega + w) * reps], 1.0);
        builder.coeff(r_tr, sub.var_u_turbine[n], -1.0);
        const int r_br = builder.begin_row(0.0, 0.0);
        builder.coeff(r_br, sub.var_copy_barrage[(n * omega + w) * reps], 1.0);
        builder.coeff(r_br, sub.var_u_barrage[n], -1.0);
      }
    }

    qp::QpProblem problem = builder.finish();
    sub.base_linear = problem.linear_cost;
    sub.prepared.emplace(std::move(problem));
  }

  return set;
}

ConsensusState make_consensus_state(const ConsensusLayout& layout) {
  layout.validate();
  ConsensusState state;
  const int stacks = layout.num_plants * layout.num_scenarios;
  state.global.resize(stacks);
  state.local.resize(stacks);
  state.dual.resize(stacks);
  for (int n = 0; n < layout.num_plants; ++n) {
    for (int w = 0; w < layout.num_scenarios; ++w) {
      const int s = layout.stack_index(n, w);
      state.global[s] = Eigen::VectorXd::Zero(layout.stack_length(n));
      state.local[s] = Eigen::VectorXd::Zero(layout.stack_length(n));
      state.dual[s] = Eigen::VectorXd::Zero(layout.stack_length(n));
    }
  }
  return state;
}

namespace {

// Copy variables of one water subproblem paired with their stack slots.
void for_each_hydro_copy(const ConsensusLayout& layout, const HydroSubproblem& sub,
                         const std::function<void(int var, int slot)>& visit) {
  for (int r = 0; r < layout.num_reps; ++r) {
    if (sub.plant >= 1) {
      visit(sub.var_up_turbine[r], layout.slot_upstream_turbine(sub.plant, r));
      visit(sub.var_up_barrage[r], layout.slot_upstream_barrage(sub.plant, r));
    }
    visit(sub.var_turbine[r], layout.slot_own_turbine(sub.plant, r));
    visit(sub.var_barrage[r], layout.slot_own_barrage(sub.plant, r));
    visit(sub.var_power[r], layout.slot_own_power(sub.plant, r));
  }
}

}  // namespace

void local_update(SubproblemSet& set, ConsensusState& state) {
  const ConsensusLayout& layout = set.layout;
  const int tasks = static_cast<int>(set.hydro.size()) + 1;

  parallel_for(0, tasks, [&](int task) {
    if (task < static_cast<int>(set.hydro.size())) {
      HydroSubproblem& sub = set.hydro[task];
      const int s = layout.stack_index(sub.plant, sub.scenario);
      Eigen::VectorXd linear = sub.base_linear;
      for_each_hydro_copy(layout, sub, [&](int var, int slot) {
        linear[var] += state.dual[s][slot] - set.rho * state.global[s][slot];
      });
      sub.prepared->set_linear_cost(linear);
      auto solution = sub.prepared->solve();
      if (solution.status != qp::SolveStatus::Optimal)
        throw std::runtime_error("local_update: water subproblem (plant " +
                                 std::to_string(sub.plant) + ", scenario " +
                                 std::to_string(sub.scenario) + ") finished " +
                                 qp::to_string(solution.status));
      sub.solution = std::move(solution.primal);
    } else {
      BalanceSubproblem& sub = set.balance;
      Eigen::VectorXd linear = sub.base_linear;
      for (int n = 0; n < layout.num_plants; ++n) {
        for (int w = 0; w < layout.num_scenarios; ++w) {
          const int s = layout.stack_index(n, w);
          for (int r = 0; r < layout.num_reps; ++r) {
            const int idx = (n * layout.num_scenarios + w) * layout.num_reps + r;
            const int slot_tr = layout.slot_balance_turbine(n, r);
            const int slot_br = layout.slot_balance_barrage(n, r);
            const int slot_p = layout.slot_balance_power(n, r);
            linear[sub.var_copy_turbine[idx]] +=
                state.dual[s][slot_tr] - set.rho * state.global[s][slot_tr];
            linear[sub.var_copy_barrage[idx]] +=
                state.dual[s][slot_br] - set.rho * state.global[s][slot_br];
            linear[sub.var_copy_power[idx]] +=
                state.dual[s][slot_p] - set.rho * state.global[s][slot_p];
          }
        }
      }
      sub.prepared->set_linear_cost(linear);
      auto solution = sub.prepared->solve();
      if (solution.status != qp::SolveStatus::Optimal)
        throw std::runtime_error(std::string("local_update: market subproblem finished ") +
                                 qp::to_string(solution.status));
      sub.solution = std::move(solution.primal);
    }
  });

  // Refresh the local stacks from the fresh subproblem solutions.
  for (const HydroSubproblem& sub : set.hydro) {
    const int s = layout.stack_index(sub.plant, sub.scenario);
    for_each_hydro_copy(layout, sub,
                        [&](int var, int slot) { state.local[s][slot] = sub.solution[var]; });
  }
  for (int n = 0; n < layout.num_plants; ++n) {
    for (int w = 0; w < layout.num_scenarios; ++w) {
      const int s = layout.stack_index(n, w);
      for (int r = 0; r < layout.num_reps; ++r) {
        const int idx = (n * layout.num_scenarios + w) * layout.num_reps + r;
        state.local[s][layout.slot_balance_turbine(n, r)] =
            set.balance.solution[set.balance.var_copy_turbine[idx]];
        state.local[s][layout.slot_balance_barrage(n, r)] =
            set.balance.solution[set.balance.var_copy_barrage[idx]];
        state.local[s][layout.slot_balance_power(n, r)] =
            set.balance.solution[set.balance.var_copy_power[idx]];
      }
    }
  }
}

void global_update(const SubproblemSet& set, ConsensusState& state) {
  const ConsensusLayout& layout = set.layout;
  for (int n = 0; n < layout.num_plants; ++n) {
    const bool feeds_downstream = n + 1 < layout.num_plants;
    for (int w = 0; w < layout.num_scenarios; ++w) {
      const int s = layout.stack_index(n, w);
      const int s_down = feeds_downstream ? layout.stack_index(n + 1, w) : -1;
      for (int r = 0; r < layout.num_reps; ++r) {
        double sum_tr = state.local[s][layout.slot_own_turbine(n, r)] +
                        state.local[s][layout.slot_balance_turbine(n, r)];
        double sum_br = state.local[s][layout.slot_own_barrage(n, r)] +
                        state.local[s][layout.slot_balance_barrage(n, r)];
        if (feeds_downstream) {
          sum_tr += state.local[s_down][layout.slot_upstream_turbine(n + 1, r)];
          sum_br += state.local[s_down][layout.slot_upstream_barrage(n + 1, r)];
        }
        const double mean_tr = sum_tr / layout.discharge_copies(n);
        const double mean_br = sum_br / layout.discharge_copies(n);
        const double mean_p = (state.local[s][layout.slot_own_power(n, r)] +
                               state.local[s][layout.slot_balance_power(n, r)]) /
                              layout.power_copies();

        state.global[s][layout.slot_own_turbine(n, r)] = mean_tr;
        state.global[s][layout.slot_balance_turbine(n, r)] = mean_tr;
        state.global[s][layout.slot_own_barrage(n, r)] = mean_br;
        state.global[s][layout.slot_balance_barrage(n, r)] = mean_br;
        state.global[s][layout.slot_own_power(n, r)] = mean_p;
        state.global[s][layout.slot_balance_power(n, r)] = mean_p;
        if (feeds_downstream) {
          state.global[s_down][layout.slot_upstream_turbine(n + 1, r)] = mean_tr;
          state.global[s_down][layout.slot_upstream_barrage(n + 1, r)] = mean_br;
        }
      }
    }
  }
}

void dual_update(const SubproblemSet& set, ConsensusState& state) {
  for (std::size_t s = 0; s < state.dual.size(); ++s)
    state.dual[s] += set.rho * (state.local[s] - state.global[s]);
}

double consensus_objective(const SubproblemSet& set) {
  const ConsensusLayout& layout = set.layout;
  double total = 0.0;
  for (const HydroSubproblem& sub : set.hydro) {
    for (int r = 0; r < layout.num_reps; ++r) {
      const double gap = sub.solution[sub.var_level[r]] - sub.level_ref[r];
      total += set.alpha * gap * gap;
    }
  }
  for (int w = 0; w < layout.num_scenarios; ++w) {
    for (int r = 0; r < layout.num_reps; ++r) {
      const int idx = w * layout.num_reps + r;
      total += set.mass_up(w, r) * set.balance.solution[set.balance.var_shortfall[idx]];
      total -= set.mass_dn(w, r) * set.balance.solution[set.balance.var_surplus[idx]];
    }
  }
  return total;
}

AdmmResult run_admm(const CascadeInstance& instance, const ScenarioSet& scenarios,
                    const MarketAndObjective& market, const RollingState& state,
                    const ClusterMap& map, const AdmmConfig& config) {
  config.validate();
  SubproblemSet set = split_consensus(instance, scenarios, market, state, map, config.rho);
  ConsensusState consensus = make_consensus_state(set.layout);

  AdmmResult result;
  const auto start = std::chrono::steady_clock::now();
  double previous = qp::kInf;
  std::vector<Eigen::VectorXd> prev_global;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    local_update(set, consensus);
    prev_global = consensus.global;
    global_update(set, consensus);
    dual_update(set, consensus);

    const double objective = consensus_objective(set);
    double primal_sq = 0.0, dual_sq = 0.0;
    for (std::size_t s = 0; s < consensus.global.size(); ++s) {
      primal_sq += (consensus.local[s] - consensus.global[s]).squaredNorm();
      dual_sq += (consensus.global[s] - prev_global[s]).squaredNorm();
    }
    consensus.iteration = iter;
    consensus.objective = objective;
    result.trace.push_back({iter, objective, std::sqrt(primal_sq),
                            set.rho * std::sqrt(dual_sq), seconds_since(start)});
    result.iterations = iter;

    bool settled;
    if (std::abs(objective) < 1e-12) {
      settled = std::abs(objective - previous) <= config.obj_tol_percent * 1e-12;
    } else {
      settled = 100.0 * std::abs((objective - previous) / objective) <= config.obj_tol_percent;
    }
    if (settled) {
      result.converged = true;
      break;
    }
    previous = objective;
  }

  result.objective = consensus.objective;
  const int plants = set.layout.num_plants;
  result.u_turbine.resize(plants);
  result.u_barrage.resize(plants);
  for (int n = 0; n < plants; ++n) {
    result.u_turbine[n] = set.balance.solution[set.balance.var_u_turbine[n]];
    result.u_barrage[n] = set.balance.solution[set.balance.var_u_barrage[n]];
  }
  return result;
}

}  // namespace cascade
