#include "cascade/model/build.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

double history_lookup(const Eigen::VectorXd& history, int offset) {
  const int size = static_cast<int>(history.size());
  if (offset < 1 || offset > size)
    throw std::invalid_argument("history_lookup: offset " + std::to_string(offset) +
                                " outside stored window of " + std::to_string(size));
  return history[size - offset];
}

FullModelHandle build_full_model(const CascadeInstance& instance, const ScenarioSet& scenarios,
                                 const MarketAndObjective& market, const RollingState& state,
                                 int horizon) {
  instance.validate();
  const int plants = instance.num_plants();
  scenarios.validate(plants);
  if (horizon < 1) throw std::invalid_argument("build_full_model: horizon must be at least 1");
  if (scenarios.num_periods() != horizon)
    throw std::invalid_argument("build_full_model: ScenarioSet spans " +
                                std::to_string(scenarios.num_periods()) + " periods, expected " +
                                std::to_string(horizon));
  market.validate(instance, horizon);
  state.validate(instance);

  const double delta = instance.period_seconds;
  const double delta_hours = delta / 3600.0;
  std::vector<int> delay_tr(plants), delay_br(plants);
  for (int n = 0; n < plants; ++n) {
    delay_tr[n] = delay_to_periods(instance.plants[n].delay_turbine_s, delta);
    delay_br[n] = delay_to_periods(instance.plants[n].delay_barrage_s, delta);
    const bool feeds_downstream = n + 1 < plants;
    if (feeds_downstream && (delay_tr[n] >= horizon || delay_br[n] >= horizon))
      throw std::invalid_argument("build_full_model: routing delay spans the whole horizon (plant " +
                                  std::to_string(n) + ")");
  }

  const int omega = scenarios.num_scenarios();
  FullModelHandle handle;
  handle.num_plants = plants;
  handle.num_scenarios = omega;
  handle.num_periods = horizon;

  qp::ProblemBuilder builder;
  auto& reg = handle.registry;

  for (int n = 0; n < plants; ++n) {
    const auto& plant = instance.plants[n];
    reg.add(control_key(Var::kControlTurbine, n));
    builder.add_var(plant.qtr_min, plant.qtr_max);
    reg.add(control_key(Var::kControlBarrage, n));
    builder.add_var(plant.qbr_min, qp::kInf);
  }
  for (int w = 0; w < omega; ++w) {
    for (int k = 0; k < horizon; ++k) {
      for (int n = 0; n < plants; ++n) {
        const auto& plant = instance.plants[n];
        reg.add(plant_key(Var::kPower, n, w, k));
        builder.add_var(plant.power_min, plant.power_max);
        reg.add(plant_key(Var::kLevel, n, w, k));
        if (k == 0) {
          builder.add_var(state.level[n], state.level[n]);
        } else {
          builder.add_var(plant.level_min, plant.level_max);
        }
        reg.add(plant_key(Var::kTurbine, n, w, k));
        builder.add_var(plant.qtr_min, plant.qtr_max);
        reg.add(plant_key(Var::kBarrage, n, w, k));
        builder.add_var(plant.qbr_min, qp::kInf);
        reg.add(plant_key(Var::kHead, n, w, k));
        builder.add_var(plant.head_min, plant.head_max);
        reg.add(plant_key(Var::kInflow, n, w, k));
        builder.add_var();
      }
      reg.add(balance_key(Var::kShortfall, w, k));
      builder.add_var(0.0, qp::kInf);
      reg.add(balance_key(Var::kSurplus, w, k));
      builder.add_var(0.0, qp::kInf);
    }
  }

  for (int w = 0; w < omega; ++w) {
    for (int k = 0; k < horizon; ++k) {
      for (int n = 0; n < plants; ++n) {
        const auto& plant = instance.plants[n];
        const double coef = instance.power_coefficient(n);
        const int v_p = reg.index_of(plant_key(Var::kPower, n, w, k));
        const int v_l = reg.index_of(plant_key(Var::kLevel, n, w, k));
        const int v_qtr = reg.index_of(plant_key(Var::kTurbine, n, w, k));
        const int v_qbr = reg.index_of(plant_key(Var::kBarrage, n, w, k));
        const int v_h = reg.index_of(plant_key(Var::kHead, n, w, k));
        const int v_qin = reg.index_of(plant_key(Var::kInflow, n, w, k));

        // Inflow: external plus the delayed upstream discharges; delayed terms
        // falling before the window are constants read from history.
        double inflow_rhs = scenarios.ext_inflow[n](w, k);
        int live_qtr = -1, live_qbr = -1;
        if (n >= 1) {
          const int k_tr = k - delay_tr[n - 1];
          if (k_tr >= 0) {
            live_qtr = reg.index_of(plant_key(Var::kTurbine, n - 1, w, k_tr));
          } else {
            inflow_rhs += history_lookup(state.past_qtr[n - 1], -k_tr);
          }
          const int k_br = k - delay_br[n - 1];
          if (k_br >= 0) {
            live_qbr = reg.index_of(plant_key(Var::kBarrage, n - 1, w, k_br));
          } else {
            inflow_rhs += history_lookup(state.past_qbr[n - 1], -k_br);
          }
        }
        const int r_in = builder.begin_row(inflow_rhs, inflow_rhs);
        builder.coeff(r_in, v_qin, 1.0);
        if (live_qtr >= 0) builder.coeff(r_in, live_qtr, -1.0);
        if (live_qbr >= 0) builder.coeff(r_in, live_qbr, -1.0);

        const int r_head = builder.begin_row(-plant.tailrace_level, -plant.tailrace_level);
        builder.coeff(r_head, v_h, 1.0);
        builder.coeff(r_head, v_l, -1.0);

        if (k >= 1) {
          const double step = delta / plant.surface_area;
          const int r_dyn = builder.begin_row(0.0, 0.0);
          builder.coeff(r_dyn, v_l, 1.0);
          builder.coeff(r_dyn, reg.index_of(plant_key(Var::kLevel, n, w, k - 1)), -1.0);
          builder.coeff(r_dyn, v_qin, -step);
          builder.coeff(r_dyn, v_qtr, step);
          builder.coeff(r_dyn, v_qbr, step);
        }

        if (k >= 1) {
          const int v_prev = reg.index_of(plant_key(Var::kTurbine, n, w, k - 1));
          const int r_up = builder.begin_row(-qp::kInf, plant.ramp_limit);
          builder.coeff(r_up, v_qtr, 1.0);
          builder.coeff(r_up, v_prev, -1.0);
          const int r_dn = builder.begin_row(-qp::kInf, plant.ramp_limit);
          builder.coeff(r_dn, v_qtr, -1.0);
          builder.coeff(r_dn, v_prev, 1.0);
        } else {
          const double last = history_lookup(state.past_qtr[n], 1);
          const int r_up = builder.begin_row(-qp::kInf, plant.ramp_limit + last);
          builder.coeff(r_up, v_qtr, 1.0);
          const int r_dn = builder.begin_row(-qp::kInf, plant.ramp_limit - last);
          builder.coeff(r_dn, v_qtr, -1.0);
        }

        for (const auto& face : mccormick_rows(plant)) {
          const double rhs = coef * face.offset;
          const int row = face.lower ? builder.begin_row(rhs, qp::kInf)
                                     : builder.begin_row(-qp::kInf, rhs);
          builder.coeff(row, v_p, 1.0);
          builder.coeff(row, v_qtr, -coef * face.q_coef);
          builder.coeff(row, v_h, -coef * face.h_coef);
        }

        builder.add_quadratic(v_l, market.alpha);
        const double ref = market.level_ref(n, k);
        builder.add_linear(v_l, -2.0 * market.alpha * ref);
        handle.objective_constant += market.alpha * ref * ref;
      }

      const double rhs = market.offer[k] - delta_hours * scenarios.vres_power(w, k);
      const int r_bal = builder.begin_row(rhs, rhs);
      for (int n = 0; n < plants; ++n)
        builder.coeff(r_bal, reg.index_of(plant_key(Var::kPower, n, w, k)), delta_hours);
      const int v_up = reg.index_of(balance_key(Var::kShortfall, w, k));
      const int v_dn = reg.index_of(balance_key(Var::kSurplus, w, k));
      builder.coeff(r_bal, v_up, 1.0);
      builder.coeff(r_bal, v_dn, -1.0);
      builder.add_linear(v_up, scenarios.price_up(w, k));
      builder.add_linear(v_dn, -scenarios.price_down(w, k));
    }
  }

  // First-period discharges are shared decisions across scenarios.
  for (int n = 0; n < plants; ++n) {
    const int u_tr = reg.index_of(control_key(Var::kControlTurbine, n));
    const int u_br = reg.index_of(control_key(Var::kControlBarrage, n));
    for (int w = 0; w < omega; ++w) {
      const int r_tr = builder.begin_row(0.0, 0.0);
      builder.coeff(r_tr, reg.index_of(plant_key(Var::kTurbine, n, w, 0)), 1.0);
      builder.coeff(r_tr, u_tr, -1.0);
      const int r_br = builder.begin_row(0.0, 0.0);
      builder.coeff(r_br, reg.index_of(plant_key(Var::kBarrage, n, w, 0)), 1.0);
      builder.coeff(r_br, u_br, -1.0);
    }
  }

  handle.problem = builder.finish();
  return handle;
}

}  // namespace cascade
