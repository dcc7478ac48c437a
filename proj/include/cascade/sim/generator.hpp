#pragma once

// Synthetic uncertainty for closed-loop simulation. Every input process is a
// daily sinusoid plus an AR(1) deviation with clipping; one hidden
// realization path per episode plays the part of reality, and each step draws
// a fresh forecast fan around the realization's current value.

#include "cascade/model/instance.hpp"

#include <cstdint>
#include <string>

namespace cascade {

// One scalar input process. value(t) = clip(offset + amplitude * sin(2*pi *
// t * delta / day_seconds + phase) + d_t) with d_{t+1} = ar_coeff * d_t +
// noise_scale * xi_t, xi standard normal.
struct ProcessSpec {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double ar_coeff = 0.0;     // in [0, 1)
  double noise_scale = 0.0;  // >= 0
  double min_value = 0.0;
  double max_value = 0.0;

  // Throws std::invalid_argument naming the process and offending field.
  void validate(const std::string& name) const;
};

struct GeneratorSpec {
  std::vector<ProcessSpec> inflow;  // one per plant, clipped at >= 0
  ProcessSpec vres;                 // clipped at [0, installed capacity]
  ProcessSpec price_up;
  ProcessSpec price_down;
  double day_seconds = 86400.0;  // period of the sinusoid profiles

  void validate(int expected_plants) const;
};

// Forecast fan plus the matching window of the hidden realization path.
// Generated prices always satisfy price_up >= price_down >= 0.
struct GeneratorDraw {
  ScenarioSet scenarios;
  Eigen::MatrixXd real_inflow;  // plants x horizon
  Eigen::VectorXd real_vres;
  Eigen::VectorXd real_price_up;
  Eigen::VectorXd real_price_down;
};

// Series for periods [start_period, start_period + horizon). The realization
// depends only on (spec, seed, absolute period), so windows of the same
// episode agree wherever they overlap. Every scenario's first period equals
// the realization at start_period; scenario 0 continues as the noise-free
// central forecast, scenarios >= 1 add independent AR noise. Deterministic in
// all arguments.
GeneratorDraw generate_scenarios(const GeneratorSpec& spec, double period_seconds,
                                 int start_period, int horizon, int count, std::uint64_t seed);

}  // namespace cascade
