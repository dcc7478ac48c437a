#include "cascade/sim/simulate.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "model_fixtures.hpp"

using namespace cascade;

namespace {

ProcessSpec constant_process(double value) {
  ProcessSpec p;
  p.offset = value;
  p.amplitude = 0.0;
  p.phase = 0.0;
  p.ar_coeff = 0.0;
  p.noise_scale = 0.0;
  p.min_value = 0.0;
  p.max_value = 1e9;
  return p;
}

GeneratorSpec quiet_generator(int plants) {
  GeneratorSpec spec;
  for (int n = 0; n < plants; ++n) spec.inflow.push_back(constant_process(200.0));
  spec.vres = constant_process(50.0);
  spec.price_up = constant_process(60.0);
  spec.price_down = constant_process(20.0);
  return spec;
}

// Noisy but persistent processes, clipped loosely so the AR recursion is
// visible unmodified in the samples.
GeneratorSpec noisy_generator(int plants) {
  GeneratorSpec spec = quiet_generator(plants);
  for (auto& p : spec.inflow) {
    p.amplitude = 30.0;
    p.ar_coeff = 0.8;
    p.noise_scale = 10.0;
  }
  spec.vres.amplitude = 20.0;
  spec.vres.ar_coeff = 0.6;
  spec.vres.noise_scale = 8.0;
  spec.price_up.amplitude = 15.0;
  spec.price_up.ar_coeff = 0.7;
  spec.price_up.noise_scale = 5.0;
  spec.price_down.amplitude = 5.0;
  spec.price_down.ar_coeff = 0.7;
  spec.price_down.noise_scale = 2.0;
  return spec;
}

// Teaches the controller to hold the turbine at its ceiling: an unreachable
// committed position makes every generated unit reduce the shortfall, and a
// start at the top of the band with full-discharge history keeps the whole
// episode on the box edge where the power envelope is exact.
struct CornerFixture {
  CascadeInstance instance;
  SimConfig config;
};

CornerFixture corner_fixture(int steps) {
  CornerFixture f;
  f.instance = fixtures::reference_cascade(1);
  const PlantParams& plant = f.instance.plants[0];
  f.config.num_steps = steps;
  f.config.horizon = 8;
  f.config.num_scenarios = 2;
  f.config.seed = 3;
  f.config.generator = quiet_generator(1);
  f.config.controller = ControllerKind::kFull;
  f.config.algo.alpha = 1.0;
  f.config.offer_mean = 1000.0;
  f.config.initial.level = Eigen::VectorXd::Constant(1, plant.level_max);
  f.config.initial.past_qtr = {Eigen::VectorXd::Constant(1, plant.qtr_max)};
  f.config.initial.past_qbr = {Eigen::VectorXd::Constant(1, plant.qbr_min)};
  return f;
}

}  // namespace

TEST_CASE("the generator rejects malformed specs naming the process and field") {
  GeneratorSpec spec = quiet_generator(2);

  GeneratorSpec bad = spec;
  bad.inflow[1].ar_coeff = 1.0;
  CHECK_THROWS_WITH_AS(bad.validate(2), doctest::Contains("inflow[1].ar_coeff"),
                       std::invalid_argument);

  bad = spec;
  bad.vres.noise_scale = -0.5;
  CHECK_THROWS_WITH_AS(bad.validate(2), doctest::Contains("vres.noise_scale"),
                       std::invalid_argument);

  bad = spec;
  bad.price_up.min_value = 10.0;
  bad.price_up.max_value = 5.0;
  CHECK_THROWS_WITH_AS(bad.validate(2), doctest::Contains("price_up.min_value"),
                       std::invalid_argument);

  bad = spec;
  bad.inflow[0].min_value = -1.0;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);

  bad = spec;
  bad.day_seconds = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(2), doctest::Contains("day_seconds"), std::invalid_argument);

  CHECK_THROWS_AS(spec.validate(3), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenarios(spec, 120.0, -1, 4, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenarios(spec, 120.0, 0, 0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenarios(spec, 120.0, 0, 4, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenarios(spec, 0.0, 0, 4, 2, 1), std::invalid_argument);
}

TEST_CASE("zero noise reproduces the clipped mean profile everywhere") {
  GeneratorSpec spec = quiet_generator(2);
  spec.inflow[0].amplitude = 40.0;
  spec.inflow[0].phase = 0.7;
  spec.vres.amplitude = 30.0;
  spec.vres.max_value = 60.0;  // clips the crest of the sinusoid

  const double delta = 120.0;
  const int start = 11, horizon = 30, count = 3;
  const GeneratorDraw draw = generate_scenarios(spec, delta, start, horizon, count, 42);

  auto mean_of = [&](const ProcessSpec& p, int t) {
    const double raw =
        p.offset + p.amplitude * std::sin(2.0 * M_PI * t * delta / spec.day_seconds + p.phase);
    return std::min(p.max_value, std::max(p.min_value, raw));
  };

  for (int k = 0; k < horizon; ++k) {
    CHECK(draw.real_inflow(0, k) == doctest::Approx(mean_of(spec.inflow[0], start + k)).epsilon(1e-12));
    CHECK(draw.real_inflow(1, k) == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(draw.real_vres[k] == doctest::Approx(mean_of(spec.vres, start + k)).epsilon(1e-12));
    for (int w = 0; w < count; ++w) {
      CHECK(draw.scenarios.ext_inflow[0](w, k) ==
            doctest::Approx(mean_of(spec.inflow[0], start + k)).epsilon(1e-12));
      CHECK(draw.scenarios.vres_power(w, k) ==
            doctest::Approx(mean_of(spec.vres, start + k)).epsilon(1e-12));
    }
  }
  CHECK(draw.real_vres.maxCoeff() <= 60.0 + 1e-12);
}

TEST_CASE("identical seeds reproduce the draw and different seeds move it") {
  const GeneratorSpec spec = noisy_generator(2);
  const GeneratorDraw a = generate_scenarios(spec, 120.0, 4, 16, 3, 99);
  const GeneratorDraw b = generate_scenarios(spec, 120.0, 4, 16, 3, 99);
  const GeneratorDraw c = generate_scenarios(spec, 120.0, 4, 16, 3, 100);

  CHECK(a.real_inflow == b.real_inflow);
  CHECK(a.real_vres == b.real_vres);
  CHECK(a.real_price_up == b.real_price_up);
  CHECK(a.real_price_down == b.real_price_down);
  for (int n = 0; n < 2; ++n) CHECK(a.scenarios.ext_inflow[n] == b.scenarios.ext_inflow[n]);
  CHECK(a.scenarios.vres_power == b.scenarios.vres_power);
  CHECK(a.scenarios.price_up == b.scenarios.price_up);
  CHECK(a.scenarios.price_down == b.scenarios.price_down);

  CHECK((a.real_inflow - c.real_inflow).cwiseAbs().maxCoeff() > 0.0);
  CHECK((a.scenarios.vres_power - c.scenarios.vres_power).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("every scenario starts at the realization and scenario zero stays central") {
  GeneratorSpec spec = noisy_generator(1);
  for (auto* p : {&spec.inflow[0], &spec.vres, &spec.price_up, &spec.price_down}) {
    p->min_value = -1e9;  // keep the AR recursion unclipped for the closed form
    p->max_value = 1e9;
  }
  const double delta = 120.0;
  const int start = 7, horizon = 12, count = 4;
  const GeneratorDraw draw = generate_scenarios(spec, delta, start, horizon, count, 5);

  for (int w = 0; w < count; ++w) {
    CHECK(draw.scenarios.ext_inflow[0](w, 0) == draw.real_inflow(0, 0));
    CHECK(draw.scenarios.vres_power(w, 0) == draw.real_vres[0]);
    CHECK(draw.scenarios.price_up(w, 0) == draw.real_price_up[0]);
    CHECK(draw.scenarios.price_down(w, 0) == draw.real_price_down[0]);
  }

  // Scenario 0 decays the anchored deviation geometrically: no fresh noise.
  auto mean_of = [&](const ProcessSpec& p, int t) {
    return p.offset + p.amplitude * std::sin(2.0 * M_PI * t * delta / spec.day_seconds + p.phase);
  };
  const double d0 = draw.real_inflow(0, 0) - mean_of(spec.inflow[0], start);
  for (int k = 1; k < horizon; ++k) {
    const double expected =
        mean_of(spec.inflow[0], start + k) + std::pow(spec.inflow[0].ar_coeff, k) * d0;
    CHECK(draw.scenarios.ext_inflow[0](0, k) == doctest::Approx(expected).epsilon(1e-10));
  }

  // Later scenarios do inject noise, so they spread around the central path.
  bool spread = false;
  for (int w = 1; w < count && !spread; ++w)
    if (std::abs(draw.scenarios.ext_inflow[0](w, horizon - 1) -
                 draw.scenarios.ext_inflow[0](0, horizon - 1)) > 1e-9)
      spread = true;
  CHECK(spread);
}

TEST_CASE("a memoryless process has uncorrelated successive samples") {
  GeneratorSpec spec = quiet_generator(1);
  spec.inflow[0].offset = 0.0;
  spec.inflow[0].noise_scale = 1.7;
  spec.inflow[0].min_value = -1e9;
  spec.inflow[0].max_value = 1e9;

  const int samples = 4096;
  const GeneratorDraw draw = generate_scenarios(spec, 120.0, 0, samples, 1, 2024);
  const Eigen::VectorXd x = draw.real_inflow.row(0).transpose();
  const Eigen::VectorXd centered = x.array() - x.mean();
  const double denom = centered.squaredNorm();
  REQUIRE(denom > 0.0);
  const double lag1 =
      (centered.head(samples - 1).cwiseProduct(centered.tail(samples - 1))).sum() / denom;
  CHECK(std::abs(lag1) <= 3.0 / std::sqrt(static_cast<double>(samples)));
}

TEST_CASE("overlapping forecast windows agree on their shared periods") {
  const GeneratorSpec spec = noisy_generator(2);
  const int h = 12;
  const GeneratorDraw early = generate_scenarios(spec, 120.0, 5, h, 2, 7);
  const GeneratorDraw late = generate_scenarios(spec, 120.0, 9, h, 2, 7);

  for (int k = 4; k < h; ++k) {
    for (int n = 0; n < 2; ++n)
      CHECK(early.real_inflow(n, k) == late.real_inflow(n, k - 4));
    CHECK(early.real_vres[k] == late.real_vres[k - 4]);
    CHECK(early.real_price_up[k] == late.real_price_up[k - 4]);
    CHECK(early.real_price_down[k] == late.real_price_down[k - 4]);
  }
}

TEST_CASE("generated buyback prices never fall below sale prices") {
  GeneratorSpec spec = noisy_generator(1);
  spec.price_up.offset = 25.0;   // overlapping ranges force the coupling to act
  spec.price_down.offset = 30.0;
  spec.price_down.noise_scale = 6.0;

  const GeneratorDraw draw = generate_scenarios(spec, 120.0, 0, 200, 4, 17);
  CHECK((draw.real_price_up - draw.real_price_down).minCoeff() >= 0.0);
  CHECK((draw.scenarios.price_up - draw.scenarios.price_down).minCoeff() >= 0.0);
  CHECK(draw.real_price_down.minCoeff() >= 0.0);
}

TEST_CASE("the simulation rejects malformed configurations naming the field") {
  const CascadeInstance instance = fixtures::reference_cascade(1);
  SimConfig config;
  config.generator = quiet_generator(1);
  config.num_steps = 2;
  config.horizon = 4;
  config.num_scenarios = 1;

  SimConfig bad = config;
  bad.num_steps = 0;
  CHECK_THROWS_WITH_AS(simulate(instance, bad), doctest::Contains("num_steps"),
                       std::invalid_argument);
  bad = config;
  bad.horizon = 0;
  CHECK_THROWS_WITH_AS(simulate(instance, bad), doctest::Contains("horizon"),
                       std::invalid_argument);
  bad = config;
  bad.num_scenarios = 0;
  CHECK_THROWS_WITH_AS(simulate(instance, bad), doctest::Contains("num_scenarios"),
                       std::invalid_argument);
  bad = config;
  bad.generator = quiet_generator(2);
  CHECK_THROWS_AS(simulate(instance, bad), std::invalid_argument);
  bad = config;
  bad.algo.r0 = 0;
  CHECK_THROWS_WITH_AS(simulate(instance, bad), doctest::Contains("r0"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(parse_controller("central"), doctest::Contains("central"),
                       std::invalid_argument);
  CHECK(parse_controller("full") == ControllerKind::kFull);
  CHECK(parse_controller("aggregated") == ControllerKind::kAggregated);
  CHECK(parse_controller("distributed") == ControllerKind::kDistributed);
}

TEST_CASE("a single-step episode makes exactly one controller call") {
  const CascadeInstance instance = fixtures::reference_cascade(1);
  SimConfig config;
  config.num_steps = 1;
  config.horizon = 1;
  config.num_scenarios = 1;
  config.generator = quiet_generator(1);
  config.controller = ControllerKind::kFull;
  config.offer_mean = 5.0;

  const EpisodeLog log = simulate(instance, config);
  REQUIRE(log.steps.size() == 1);
  const StepLog& step = log.steps[0];
  CHECK(step.step == 0);
  CHECK(std::isfinite(step.predicted_cost));
  CHECK(step.bounds.outer.empty());
  CHECK(step.wall_seconds >= 0.0);
  CHECK(log.total_cost == step.cost);
  CHECK(log.mean_wall_seconds == step.wall_seconds);
}

TEST_CASE("logged levels, inflows, and costs are recomputable from the episode") {
  const CascadeInstance instance = fixtures::reference_cascade(2);
  SimConfig config;
  config.num_steps = 5;
  config.horizon = 6;
  config.num_scenarios = 2;
  config.seed = 21;
  config.generator = noisy_generator(2);
  for (auto& p : config.generator.inflow) p.noise_scale = 3.0;  // keep levels in band
  config.controller = ControllerKind::kAggregated;
  config.algo.alpha = 10.0;
  config.algo.r0 = 6;  // full horizon at once: a single certified refinement
  config.offer_mean = 10.0;
  config.offer_amplitude = 3.0;

  const EpisodeLog log = simulate(instance, config);
  REQUIRE(log.steps.size() == 5);
  CHECK(log.violations == 0);

  const RollingState start = default_rolling_state(instance);
  const double delta = instance.period_seconds;
  std::vector<std::vector<double>> seq_tr(2), seq_br(2);
  for (int n = 0; n < 2; ++n) {
    for (int i = 0; i < start.past_qtr[n].size(); ++i) seq_tr[n].push_back(start.past_qtr[n][i]);
    for (int i = 0; i < start.past_qbr[n].size(); ++i) seq_br[n].push_back(start.past_qbr[n][i]);
  }
  const int d_tr = delay_to_periods(instance.plants[0].delay_turbine_s, delta);
  const int d_br = delay_to_periods(instance.plants[0].delay_barrage_s, delta);
  Eigen::VectorXd level = start.level;
  double total = 0.0;

  for (int t = 0; t < 5; ++t) {
    const StepLog& step = log.steps[t];
    // The refinement trace is populated and certified at full resolution.
    REQUIRE(!step.bounds.outer.empty());
    CHECK(step.bounds.outer.front().reps == 6);
    CHECK(step.bounds.gap_met);
    CHECK(std::isnan(step.predicted_cost));

    const GeneratorDraw draw =
        generate_scenarios(config.generator, delta, t, config.horizon, 2, config.seed);
    for (int n = 0; n < 2; ++n) {
      seq_tr[n].push_back(step.turbine[n]);
      seq_br[n].push_back(step.barrage[n]);
    }
    for (int n = 0; n < 2; ++n) {
      double qin = draw.real_inflow(n, 0);
      if (n == 1) {
        const int hist = static_cast<int>(start.past_qtr[0].size());
        qin += seq_tr[0][hist + t - d_tr];
        qin += seq_br[0][static_cast<int>(start.past_qbr[0].size()) + t - d_br];
      }
      CHECK(step.inflow[n] == doctest::Approx(qin).epsilon(1e-12));
      CHECK(step.head[n] ==
            doctest::Approx(level[n] - instance.plants[n].tailrace_level).epsilon(1e-12));
      CHECK(step.power[n] ==
            doctest::Approx(instance.power_coefficient(n) * step.turbine[n] * step.head[n])
                .epsilon(1e-12));
      const double next = level[n] + delta / instance.plants[n].surface_area *
                                         (qin - step.turbine[n] - step.barrage[n]);
      CHECK(std::abs(step.level[n] - next) <= 1e-9);
      level[n] = step.level[n];
    }
    const double produced =
        (step.power.sum() + step.vres_mw) * delta / 3600.0;
    CHECK(std::abs(step.shortfall_mwh - std::max(0.0, step.offer_mwh - produced)) <= 1e-9);
    CHECK(std::abs(step.surplus_mwh - std::max(0.0, produced - step.offer_mwh)) <= 1e-9);
    CHECK(std::abs(step.cost - (step.price_up * step.shortfall_mwh -
                                step.price_down * step.surplus_mwh)) <= 1e-9);
    total += step.cost;
  }
  CHECK(log.total_cost == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("perfect forecasts settle exactly as the controller predicted") {
  const CornerFixture f = corner_fixture(20);
  const EpisodeLog log = simulate(f.instance, f.config);
  REQUIRE(log.steps.size() == 20);
  CHECK(log.violations == 0);

  double predicted = 0.0;
  for (const StepLog& step : log.steps) {
    // Corner operation: ceiling discharge, floor spill, strict shortfall.
    CHECK(step.turbine[0] == doctest::Approx(1600.0).epsilon(1e-6));
    CHECK(step.barrage[0] == doctest::Approx(50.0).epsilon(1e-5));
    CHECK(step.shortfall_mwh > 0.0);
    CHECK(step.surplus_mwh == 0.0);
    predicted += step.predicted_cost;
  }
  CHECK(std::abs(log.total_cost - predicted) <= 1e-4 * std::abs(log.total_cost));
}

TEST_CASE("repeated simulation of the same configuration is bit-identical") {
  const CornerFixture f = corner_fixture(3);
  SimConfig noisy = f.config;
  noisy.generator = noisy_generator(1);
  for (auto& p : noisy.generator.inflow) p.noise_scale = 3.0;
  noisy.controller = ControllerKind::kAggregated;
  noisy.algo.r0 = 4;
  noisy.algo.gamma = 4;

  const EpisodeLog a = simulate(f.instance, noisy);
  const EpisodeLog b = simulate(f.instance, noisy);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    CHECK(a.steps[t].turbine == b.steps[t].turbine);
    CHECK(a.steps[t].barrage == b.steps[t].barrage);
    CHECK(a.steps[t].level == b.steps[t].level);
    CHECK(a.steps[t].power == b.steps[t].power);
    CHECK(a.steps[t].inflow == b.steps[t].inflow);
    CHECK(a.steps[t].cost == b.steps[t].cost);
    CHECK(a.steps[t].shortfall_mwh == b.steps[t].shortfall_mwh);
    CHECK(a.steps[t].surplus_mwh == b.steps[t].surplus_mwh);
    CHECK(a.steps[t].offer_mwh == b.steps[t].offer_mwh);
    CHECK(a.steps[t].bounds.upper == b.steps[t].bounds.upper);
    CHECK(a.steps[t].bounds.lower == b.steps[t].bounds.lower);
  }
  CHECK(a.total_cost == b.total_cost);
}

TEST_CASE("stored water shifts generation into the price peak") {
  const CascadeInstance instance = fixtures::tight_tracking_cascade(1);
  SimConfig config;
  config.num_steps = 24;
  config.horizon = 12;
  config.num_scenarios = 1;
  config.generator = quiet_generator(1);
  config.generator.day_seconds = 14400.0;  // one price cycle over the episode
  config.generator.inflow[0].offset = 800.0;
  config.generator.vres = constant_process(0.0);
  config.generator.price_up.offset = 60.0;
  config.generator.price_up.amplitude = 50.0;
  config.generator.price_up.phase = -M_PI / 2.0;  // crest at step 12
  config.generator.price_down.offset = 10.0;
  config.generator.price_down.amplitude = 8.0;
  config.generator.price_down.phase = -M_PI / 2.0;
  config.controller = ControllerKind::kFull;
  config.algo.alpha = 1.0;
  // Committed position near the inflow-neutral output, so swings show up as
  // deliberate storage moves rather than forced balancing.
  config.offer_mean = 7.65;

  const EpisodeLog log = simulate(instance, config);
  REQUIRE(log.steps.size() == 24);
  CHECK(log.violations == 0);

  const double inflow = 800.0;
  double peak_mean = 0.0, off_mean = 0.0;
  int peak_count = 0, off_count = 0;
  for (int t = 0; t < 24; ++t) {
    const double q = log.steps[t].turbine[0];
    if (t >= 9 && t < 15) {
      peak_mean += q;
      ++peak_count;
    }
    if (t < 3 || t >= 21) {
      off_mean += q;
      ++off_count;
    }
  }
  peak_mean /= peak_count;
  off_mean /= off_count;
  CHECK(peak_mean > inflow);
  CHECK(off_mean < inflow);
}

TEST_CASE("an infeasible realized level is clamped and flagged") {
  CascadeInstance instance = fixtures::reference_cascade(1);
  instance.plants[0].ramp_limit = 1.0;  // traps the discharge near its history
  SimConfig config;
  config.num_steps = 1;
  config.horizon = 1;
  config.num_scenarios = 1;
  config.generator = quiet_generator(1);
  config.generator.inflow[0].offset = 110.0;
  config.controller = ControllerKind::kFull;
  config.offer_mean = 1000.0;  // keeps the discharge pinned high
  const PlantParams& plant = instance.plants[0];
  config.initial.level = Eigen::VectorXd::Constant(1, plant.level_min + 1e-4);
  config.initial.past_qtr = {Eigen::VectorXd::Constant(1, plant.qtr_max)};
  config.initial.past_qbr = {Eigen::VectorXd::Constant(1, plant.qbr_min)};

  const EpisodeLog log = simulate(instance, config);
  REQUIRE(log.steps.size() == 1);
  CHECK(log.violations == 1);
  CHECK(log.steps[0].clamped);
  CHECK(log.steps[0].level[0] == plant.level_min);
}

TEST_CASE("a distributed episode certifies its bounds step after step") {
  const CascadeInstance instance = fixtures::tight_tracking_cascade(2);
  SimConfig config;
  config.num_steps = 3;
  config.horizon = 8;
  config.num_scenarios = 2;
  config.seed = 12;
  config.generator = noisy_generator(2);
  for (auto& p : config.generator.inflow) p.noise_scale = 5.0;
  config.controller = ControllerKind::kDistributed;
  config.algo.alpha = 1e4;
  config.algo.r0 = 8;  // identity aggregation: the consensus bound is tight
  config.algo.gap_tol_percent = 1.0;
  config.offer_mean = 10.0;

  const EpisodeLog log = simulate(instance, config);
  REQUIRE(log.steps.size() == 3);
  for (const StepLog& step : log.steps) {
    REQUIRE(!step.bounds.outer.empty());
    CHECK(step.bounds.gap_met);
    CHECK(step.bounds.gap_percent <= config.algo.gap_tol_percent);
    CHECK(step.bounds.upper >= step.bounds.lower -
                                   1e-6 * std::max(1.0, std::abs(step.bounds.upper)));
    CHECK(step.bounds.outer.front().admm_iterations > 0);
  }
}

TEST_CASE("the benchmark replays the identical episode for every controller") {
  const CornerFixture f = corner_fixture(3);
  CHECK_THROWS_WITH_AS(benchmark(f.instance, f.config, {ControllerKind::kFull}),
                       doctest::Contains("two controllers"), std::invalid_argument);

  const BenchResult result =
      benchmark(f.instance, f.config, {ControllerKind::kFull, ControllerKind::kFull});
  REQUIRE(result.rows.size() == 2);
  REQUIRE(result.episodes.size() == 2);
  CHECK(result.rows[0].controller == ControllerKind::kFull);
  CHECK(result.rows[0].total_cost == result.rows[1].total_cost);
  CHECK(std::isnan(result.rows[0].speedup_percent));
  CHECK(std::isfinite(result.rows[1].speedup_percent));
  CHECK(std::isnan(result.rows[0].mean_gap_percent));
  for (std::size_t t = 0; t < result.episodes[0].steps.size(); ++t)
    CHECK(result.episodes[0].steps[t].cost == result.episodes[1].steps[t].cost);

  CHECK(std::string(controller_name(ControllerKind::kDistributed)) == "distributed");
  CHECK(std::string(controller_name(ControllerKind::kAggregated)) == "aggregated");
}
