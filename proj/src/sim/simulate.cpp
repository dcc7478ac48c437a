#include "cascade/sim/simulate.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cascade/model/build.hpp"
#include "cascade/qp/solve.hpp"

namespace cascade {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CascadeInstance with_period_override(const CascadeInstance& instance, double period_seconds) {
  CascadeInstance out = instance;
  if (period_seconds > 0.0) out.period_seconds = period_seconds;
  return out;
}

// Committed position and mid-band level reference over one look-ahead window.
MarketAndObjective window_market(const CascadeInstance& instance, const SimConfig& config,
                                 int start, int horizon) {
  MarketAndObjective market;
  market.offer.resize(horizon);
  const double step = kTwoPi * instance.period_seconds / config.generator.day_seconds;
  for (int k = 0; k < horizon; ++k)
    market.offer[k] = config.offer_mean +
                      config.offer_amplitude * std::sin(step * (start + k) + config.offer_phase);
  const int plants = instance.num_plants();
  market.level_ref.resize(plants, horizon);
  for (int n = 0; n < plants; ++n)
    market.level_ref.row(n).setConstant(
        0.5 * (instance.plants[n].level_min + instance.plants[n].level_max));
  market.alpha = config.algo.alpha;
  return market;
}

struct FullStep {
  ControlAction action;
  double predicted_cost = 0.0;
};

// One coupled solve over every scenario; the predicted cost is the scenario
// mean of the first-period settlement the solution expects.
FullStep solve_full(const CascadeInstance& instance, const ScenarioSet& scenarios,
                    const MarketAndObjective& market, const RollingState& state, int step_index) {
  FullModelHandle model =
      build_full_model(instance, scenarios, market, state, scenarios.num_periods());
  const qp::QpSolution sol = qp::solve(model.problem);
  if (sol.status != qp::SolveStatus::Optimal)
    throw std::runtime_error("simulate: coupled solve at step " + std::to_string(step_index) +
                             " returned " + std::string(qp::to_string(sol.status)));
  const int plants = instance.num_plants();
  FullStep out;
  out.action.turbine.resize(plants);
  out.action.barrage.resize(plants);
  for (int n = 0; n < plants; ++n) {
    out.action.turbine[n] =
        sol.primal[model.registry.index_of(control_key(Var::kControlTurbine, n))];
    out.action.barrage[n] =
        sol.primal[model.registry.index_of(control_key(Var::kControlBarrage, n))];
  }
  const int omega = scenarios.num_scenarios();
  double settle = 0.0;
  for (int w = 0; w < omega; ++w) {
    const double up = sol.primal[model.registry.index_of(balance_key(Var::kShortfall, w, 0))];
    const double down = sol.primal[model.registry.index_of(balance_key(Var::kSurplus, w, 0))];
    settle += scenarios.price_up(w, 0) * up - scenarios.price_down(w, 0) * down;
  }
  out.predicted_cost = settle / omega;
  return out;
}

}  // namespace

const char* controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kFull:
      return "full";
    case ControllerKind::kAggregated:
      return "aggregated";
    case ControllerKind::kDistributed:
      return "distributed";
  }
  return "unknown";
}

ControllerKind parse_controller(const std::string& name) {
  if (name == "full") return ControllerKind::kFull;
  if (name == "aggregated") return ControllerKind::kAggregated;
  if (name == "distributed") return ControllerKind::kDistributed;
  throw std::invalid_argument("controller must be full|aggregated|distributed, got \"" + name +
                              "\"");
}

void SimConfig::validate(const CascadeInstance& instance) const {
  if (num_steps < 1) throw std::invalid_argument("SimConfig.num_steps must be at least 1");
  if (horizon < 1) throw std::invalid_argument("SimConfig.horizon must be at least 1");
  if (num_scenarios < 1)
    throw std::invalid_argument("SimConfig.num_scenarios must be at least 1");
  if (!(period_seconds >= 0.0))
    throw std::invalid_argument("SimConfig.period_seconds must be nonnegative");
  if (!std::isfinite(offer_mean) || !std::isfinite(offer_amplitude) || !std::isfinite(offer_phase))
    throw std::invalid_argument("SimConfig offer profile must be finite");
  const CascadeInstance eff = with_period_override(instance, period_seconds);
  eff.validate();
  generator.validate(eff.num_plants());
  algo.validate();
  if (initial.level.size() > 0) initial.validate(eff);
}

RollingState default_rolling_state(const CascadeInstance& instance) {
  const int plants = instance.num_plants();
  RollingState state;
  state.level.resize(plants);
  state.past_qtr.resize(plants);
  state.past_qbr.resize(plants);
  for (int n = 0; n < plants; ++n) {
    const PlantParams& plant = instance.plants[n];
    state.level[n] = 0.5 * (plant.level_min + plant.level_max);
    const int len_tr =
        std::max(1, delay_to_periods(plant.delay_turbine_s, instance.period_seconds));
    const int len_br =
        std::max(1, delay_to_periods(plant.delay_barrage_s, instance.period_seconds));
    state.past_qtr[n] =
        Eigen::VectorXd::Constant(len_tr, plant.qtr_min + 0.25 * (plant.qtr_max - plant.qtr_min));
    state.past_qbr[n] = Eigen::VectorXd::Constant(len_br, plant.qbr_min);
  }
  return state;
}

EpisodeLog simulate(const CascadeInstance& raw_instance, const SimConfig& config) {
  config.validate(raw_instance);
  const CascadeInstance instance = with_period_override(raw_instance, config.period_seconds);

  RollingState state =
      config.initial.level.size() > 0 ? config.initial : default_rolling_state(instance);
  state.validate(instance);

  const int plants = instance.num_plants();
  const double delta = instance.period_seconds;
  const double delta_hours = delta / 3600.0;

  std::vector<int> delay_tr(plants), delay_br(plants);
  for (int n = 0; n < plants; ++n) {
    delay_tr[n] = delay_to_periods(instance.plants[n].delay_turbine_s, delta);
    delay_br[n] = delay_to_periods(instance.plants[n].delay_barrage_s, delta);
  }

  // Full discharge sequences (initial history, then every applied action) so
  // delayed routing reads are direct indexing. The applied action of step t
  // sits at index hist + t.
  std::vector<std::vector<double>> seq_tr(plants), seq_br(plants);
  std::vector<int> hist_tr(plants), hist_br(plants);
  for (int n = 0; n < plants; ++n) {
    hist_tr[n] = static_cast<int>(state.past_qtr[n].size());
    hist_br[n] = static_cast<int>(state.past_qbr[n].size());
    for (int i = 0; i < hist_tr[n]; ++i) seq_tr[n].push_back(state.past_qtr[n][i]);
    for (int i = 0; i < hist_br[n]; ++i) seq_br[n].push_back(state.past_qbr[n][i]);
  }

  EpisodeLog log;
  log.steps.reserve(config.num_steps);
  Eigen::VectorXd level = state.level;
  double wall_total = 0.0;

  for (int t = 0; t < config.num_steps; ++t) {
    const GeneratorDraw draw = generate_scenarios(config.generator, delta, t, config.horizon,
                                                  config.num_scenarios, config.seed);
    const MarketAndObjective market = window_market(instance, config, t, config.horizon);

    StepLog step;
    step.step = t;
    step.predicted_cost = kNaN;
    ControlAction action;
    const auto t0 = std::chrono::steady_clock::now();
    if (config.controller == ControllerKind::kFull) {
      FullStep full = solve_full(instance, draw.scenarios, market, state, t);
      action = std::move(full.action);
      step.predicted_cost = full.predicted_cost;
    } else {
      AlgoConfig algo = config.algo;
      algo.lb_mode = config.controller == ControllerKind::kAggregated ? LowerBoundMode::kDirect
                                                                      : LowerBoundMode::kConsensus;
      MpcStepResult res = mpc_step(instance, draw.scenarios, market, state, algo);
      action = std::move(res.action);
      step.bounds = std::move(res.bounds);
    }
    step.wall_seconds = seconds_since(t0);
    wall_total += step.wall_seconds;

    // Apply the action against the realized draws: route delayed upstream
    // releases, advance the storage recursion, generate at the start-of-step
    // head.
    for (int n = 0; n < plants; ++n) {
      seq_tr[n].push_back(action.turbine[n]);
      seq_br[n].push_back(action.barrage[n]);
    }
    step.turbine = action.turbine;
    step.barrage = action.barrage;
    step.inflow.resize(plants);
    step.head.resize(plants);
    step.power.resize(plants);
    step.level.resize(plants);
    for (int n = 0; n < plants; ++n) {
      const PlantParams& plant = instance.plants[n];
      double qin = draw.real_inflow(n, 0);
      if (n >= 1) {
        qin += seq_tr[n - 1][hist_tr[n - 1] + t - delay_tr[n - 1]];
        qin += seq_br[n - 1][hist_br[n - 1] + t - delay_br[n - 1]];
      }
      step.inflow[n] = qin;
      const double pre = level[n];
      step.head[n] = pre - plant.tailrace_level;
      step.power[n] = instance.power_coefficient(n) * action.turbine[n] * step.head[n];
      double next =
          pre + delta / plant.surface_area * (qin - action.turbine[n] - action.barrage[n]);
      if (next < plant.level_min) {
        next = plant.level_min;
        step.clamped = true;
      } else if (next > plant.level_max) {
        next = plant.level_max;
        step.clamped = true;
      }
      step.level[n] = next;
      level[n] = next;
    }
    if (step.clamped) ++log.violations;

    // Settle the realized imbalance against the realized prices.
    step.vres_mw = draw.real_vres[0];
    step.price_up = draw.real_price_up[0];
    step.price_down = draw.real_price_down[0];
    step.offer_mwh = market.offer[0];
    const double produced_mwh = (step.power.sum() + step.vres_mw) * delta_hours;
    step.shortfall_mwh = std::max(0.0, step.offer_mwh - produced_mwh);
    step.surplus_mwh = std::max(0.0, produced_mwh - step.offer_mwh);
    step.cost = step.price_up * step.shortfall_mwh - step.price_down * step.surplus_mwh;
    log.total_cost += step.cost;

    // Shift the rolling window: levels advance, histories keep their length.
    state.level = level;
    for (int n = 0; n < plants; ++n) {
      const int total_tr = static_cast<int>(seq_tr[n].size());
      const int total_br = static_cast<int>(seq_br[n].size());
      for (int i = 0; i < hist_tr[n]; ++i)
        state.past_qtr[n][i] = seq_tr[n][total_tr - hist_tr[n] + i];
      for (int i = 0; i < hist_br[n]; ++i)
        state.past_qbr[n][i] = seq_br[n][total_br - hist_br[n] + i];
    }

    log.steps.push_back(std::move(step));
  }

  log.mean_wall_seconds = wall_total / config.num_steps;
  return log;
}

BenchResult benchmark(const CascadeInstance& instance, const SimConfig& config,
                      const std::vector<ControllerKind>& controllers) {
  if (controllers.size() < 2)
    throw std::invalid_argument("benchmark: needs at least two controllers, got " +
                                std::to_string(controllers.size()));
  BenchResult result;
  for (const ControllerKind kind : controllers) {
    SimConfig run = config;
    run.controller = kind;
    EpisodeLog episode = simulate(instance, run);

    BenchRow row;
    row.controller = kind;
    row.mean_step_seconds = episode.mean_wall_seconds;
    row.total_cost = episode.total_cost;
    double gap_sum = 0.0;
    int gap_count = 0;
    for (const StepLog& step : episode.steps) {
      if (!step.bounds.outer.empty() && std::isfinite(step.bounds.gap_percent)) {
        gap_sum += step.bounds.gap_percent;
        ++gap_count;
      }
    }
    row.mean_gap_percent = gap_count > 0 ? gap_sum / gap_count : kNaN;
    row.speedup_percent =
        result.rows.empty()
            ? kNaN
            : 100.0 * (result.rows.front().mean_step_seconds - row.mean_step_seconds) /
                  std::max(result.rows.front().mean_step_seconds, 1e-12);

    result.rows.push_back(row);
    result.episodes.push_back(std::move(episode));
  }
  return result;
}

}  // namespace cascade
