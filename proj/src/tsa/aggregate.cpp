#include "cascade/tsa/aggregate.hpp"

#include <stdexcept>
#include <string>

namespace cascade {

int ClusterMap::cluster_of(int period) const {
  if (period < 0 || period >= full_periods)
    throw std::invalid_argument("ClusterMap.cluster_of: period " + std::to_string(period) +
                                " outside [0, " + std::to_string(full_periods) + ")");
  int lo = 0, hi = num_clusters() - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (start[mid] <= period)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

void ClusterMap::validate() const {
  if (full_periods < 1) throw std::invalid_argument("ClusterMap.full_periods must be positive");
  if (start.empty()) throw std::invalid_argument("ClusterMap.start must be nonempty");
  if (start.size() != size.size())
    throw std::invalid_argument("ClusterMap.size length differs from ClusterMap.start");
  int expected = 0;
  for (int r = 0; r < num_clusters(); ++r) {
    if (start[r] != expected)
      throw std::invalid_argument("ClusterMap.start must tile the horizon contiguously (cluster " +
                                  std::to_string(r) + ")");
    if (size[r] < 1)
      throw std::invalid_argument("ClusterMap.size must be positive (cluster " +
                                  std::to_string(r) + ")");
    expected += size[r];
  }
  if (expected != full_periods)
    throw std::invalid_argument("ClusterMap.size must sum to full_periods");
}

ClusterMap build_tail_map(int full_periods, int representative) {
  if (full_periods < 1)
    throw std::invalid_argument("build_tail_map: full_periods must be positive");
  if (representative < 1 || representative > full_periods)
    throw std::invalid_argument("build_tail_map: representative count " +
                                std::to_string(representative) + " outside [1, " +
                                std::to_string(full_periods) + "]");
  ClusterMap map;
  map.full_periods = full_periods;
  for (int r = 0; r + 1 < representative; ++r) {
    map.start.push_back(r);
    map.size.push_back(1);
  }
  map.start.push_back(representative - 1);
  map.size.push_back(full_periods - representative + 1);
  return map;
}

Eigen::VectorXd aggregate_series(const Eigen::VectorXd& series, const ClusterMap& map) {
  if (static_cast<int>(series.size()) != map.full_periods)
    throw std::invalid_argument("aggregate_series: series length " +
                                std::to_string(series.size()) + " does not match horizon " +
                                std::to_string(map.full_periods));
  Eigen::VectorXd out(map.num_clusters());
  for (int r = 0; r < map.num_clusters(); ++r)
    out[r] = series.segment(map.start[r], map.size[r]).mean();
  return out;
}

Eigen::MatrixXd aggregate_columns(const Eigen::MatrixXd& series, const ClusterMap& map) {
  if (static_cast<int>(series.cols()) != map.full_periods)
    throw std::invalid_argument("aggregate_columns: series has " + std::to_string(series.cols()) +
                                " columns, expected " + std::to_string(map.full_periods));
  Eigen::MatrixXd out(series.rows(), map.num_clusters());
  for (int r = 0; r < map.num_clusters(); ++r)
    out.col(r) = series.middleCols(map.start[r], map.size[r]).rowwise().mean();
  return out;
}

AggregatedModelHandle build_aggregated_model(const CascadeInstance& instance,
                                             const ScenarioSet& scenarios,
                                             const MarketAndObjective& market,
                                             const RollingState& state, const ClusterMap& map) {
  instance.validate();
  const int plants = instance.num_plants();
  scenarios.validate(plants);
  map.validate();
  if (scenarios.num_periods() != map.full_periods)
    throw std::invalid_argument("build_aggregated_model: ScenarioSet spans " +
                                std::to_string(scenarios.num_periods()) +
                                " periods, expected " + std::to_string(map.full_periods));
  market.validate(instance, map.full_periods);
  state.validate(instance);

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
      throw std::invalid_argument(
          "build_aggregated_model: routing delay spans the whole horizon (plant " +
          std::to_string(n) + ")");
  }

  // Cluster-averaged inputs.
  std::vector<Eigen::MatrixXd> inflow_r(plants);
  for (int n = 0; n < plants; ++n) inflow_r[n] = aggregate_columns(scenarios.ext_inflow[n], map);
  const Eigen::MatrixXd vres_r = aggregate_columns(scenarios.vres_power, map);
  const Eigen::MatrixXd price_up_r = aggregate_columns(scenarios.price_up, map);
  const Eigen::MatrixXd price_down_r = aggregate_columns(scenarios.price_down, map);
  const Eigen::VectorXd offer_r = aggregate_series(market.offer, map);
  Eigen::MatrixXd ref_r(plants, reps);
  for (int n = 0; n < plants; ++n)
    ref_r.row(n) = aggregate_series(market.level_ref.row(n).transpose(), map).transpose();

  AggregatedModelHandle handle;
  handle.map = map;
  handle.num_plants = plants;
  handle.num_scenarios = omega;

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
    for (int r = 0; r < reps; ++r) {
      for (int n = 0; n < plants; ++n) {
        const auto& plant = instance.plants[n];
        reg.add(plant_key(Var::kPower, n, w, r));
        builder.add_var(plant.power_min, plant.power_max);
        reg.add(plant_key(Var::kLevel, n, w, r));
        if (r == 0) {
          builder.add_var(state.level[n], state.level[n]);
        } else {
          builder.add_var(plant.level_min, plant.level_max);
        }
        reg.add(plant_key(Var::kTurbine, n, w, r));
        builder.add_var(plant.qtr_min, plant.qtr_max);
        reg.add(plant_key(Var::kBarrage, n, w, r));
        builder.add_var(plant.qbr_min, qp::kInf);
        reg.add(plant_key(Var::kHead, n, w, r));
        builder.add_var(plant.head_min, plant.head_max);
        reg.add(plant_key(Var::kInflow, n, w, r));
        builder.add_var();
      }
      reg.add(balance_key(Var::kShortfall, w, r));
      builder.add_var(0.0, qp::kInf);
      reg.add(balance_key(Var::kSurplus, w, r));
      builder.add_var(0.0, qp::kInf);
    }
  }

  for (int w = 0; w < omega; ++w) {
    for (int r = 0; r < reps; ++r) {
      for (int n = 0; n < plants; ++n) {
        const auto& plant = instance.plants[n];
        const double coef = instance.power_coefficient(n);
        const int v_p = reg.index_of(plant_key(Var::kPower, n, w, r));
        const int v_l = reg.index_of(plant_key(Var::kLevel, n, w, r));
        const int v_qtr = reg.index_of(plant_key(Var::kTurbine, n, w, r));
        const int v_qbr = reg.index_of(plant_key(Var::kBarrage, n, w, r));
        const int v_h = reg.index_of(plant_key(Var::kHead, n, w, r));
        const int v_qin = reg.index_of(plant_key(Var::kInflow, n, w, r));

        // Inflow with routing delays; a delayed full-scale period resolves to
        // the cluster containing it, measured from the cluster's last period,
        // so the tail feeds itself while singletons keep exact indices.
        double inflow_rhs = inflow_r[n](w, r);
        int live_qtr = -1, live_qbr = -1;
        if (n >= 1) {
          const int src_tr = map.last(r) - delay_tr[n - 1];
          if (src_tr >= 0) {
            live_qtr = reg.index_of(plant_key(Var::kTurbine, n - 1, w, map.cluster_of(src_tr)));
          } else {
            inflow_rhs += history_lookup(state.past_qtr[n - 1], -src_tr);
          }
          const int src_br = map.last(r) - delay_br[n - 1];
          if (src_br >= 0) {
            live_qbr = reg.index_of(plant_key(Var::kBarrage, n - 1, w, map.cluster_of(src_br)));
          } else {
            inflow_rhs += history_lookup(state.past_qbr[n - 1], -src_br);
          }
        }
        const int r_in = builder.begin_row(inflow_rhs, inflow_rhs);
        builder.coeff(r_in, v_qin, 1.0);
        if (live_qtr >= 0) builder.coeff(r_in, live_qtr, -1.0);
        if (live_qbr >= 0) builder.coeff(r_in, live_qbr, -1.0);

        const int r_head = builder.begin_row(-plant.tailrace_level, -plant.tailrace_level);
        builder.coeff(r_head, v_h, 1.0);
        builder.coeff(r_head, v_l, -1.0);

        if (r >= 1) {
          // Reservoir step over the whole cluster duration.
          const double step = map.size[r] * delta / plant.surface_area;
          const int r_dyn = builder.begin_row(0.0, 0.0);
          builder.coeff(r_dyn, v_l, 1.0);
          builder.coeff(r_dyn, reg.index_of(plant_key(Var::kLevel, n, w, r - 1)), -1.0);
          builder.coeff(r_dyn, v_qin, -step);
          builder.coeff(r_dyn, v_qtr, step);
          builder.coeff(r_dyn, v_qbr, step);
        }

        if (r >= 1) {
          const int v_prev = reg.index_of(plant_key(Var::kTurbine, n, w, r - 1));
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
        const double ref = ref_r(n, r);
        builder.add_linear(v_l, -2.0 * market.alpha * ref);
        handle.objective_constant += market.alpha * ref * ref;
      }

      const double rhs = offer_r[r] - delta_hours * vres_r(w, r);
      const int r_bal = builder.begin_row(rhs, rhs);
      for (int n = 0; n < plants; ++n)
        builder.coeff(r_bal, reg.index_of(plant_key(Var::kPower, n, w, r)), delta_hours);
      const int v_up = reg.index_of(balance_key(Var::kShortfall, w, r));
      const int v_dn = reg.index_of(balance_key(Var::kSurplus, w, r));
      builder.coeff(r_bal, v_up, 1.0);
      builder.coeff(r_bal, v_dn, -1.0);
      // Imbalance prices enter as per-cluster mass.
      builder.add_linear(v_up, map.size[r] * price_up_r(w, r));
      builder.add_linear(v_dn, -map.size[r] * price_down_r(w, r));
    }
  }

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
