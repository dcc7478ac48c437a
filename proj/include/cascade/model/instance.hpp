#pragma once

// Domain data for a cascade of hydropower plants coupled with variable
// renewables: static plant/cascade parameters, per-scenario forecast series,
// market data, and the rolling state linking consecutive controller steps.
// All values are SI unless noted; power in MW, energy in MWh, prices per MWh.

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace cascade {

// One reservoir-turbine-barrage stage. Index 0 is the most upstream plant.
struct PlantParams {
  double surface_area = 0.0;     // m^2, reservoir surface
  double level_min = 0.0;        // m
  double level_max = 0.0;        // m
  double tailrace_level = 0.0;   // m, fixed downstream water level
  double head_min = 0.0;         // m, must equal level_min - tailrace_level
  double head_max = 0.0;         // m, must equal level_max - tailrace_level
  double qtr_min = 0.0;          // m^3/s, turbine discharge
  double qtr_max = 0.0;          // m^3/s
  double qbr_min = 0.0;          // m^3/s, barrage discharge (no upper bound)
  double power_min = 0.0;        // MW
  double power_max = 0.0;        // MW
  double efficiency = 0.0;       // turbine efficiency, in (0, 1]
  double ramp_limit = 0.0;       // m^3/s, max turbine-discharge change per period
  double delay_turbine_s = 0.0;  // s, travel time of turbine water to next plant
  double delay_barrage_s = 0.0;  // s, travel time of barrage water to next plant

  void validate(int plant_index) const;
};

struct CascadeInstance {
  std::vector<PlantParams> plants;  // upstream to downstream
  double period_seconds = 0.0;      // sampling interval
  double water_density = 1000.0;    // kg/m^3
  double gravity = 9.81;            // m/s^2

  int num_plants() const { return static_cast<int>(plants.size()); }
  // MW produced per unit of discharge (m^3/s) times head (m).
  double power_coefficient(int plant) const;
  void validate() const;
};

// Equally weighted forecast scenarios over the prediction horizon.
// Every matrix is (num_scenarios x num_periods).
struct ScenarioSet {
  std::vector<Eigen::MatrixXd> ext_inflow;  // per plant, m^3/s entering from outside the cascade
  Eigen::MatrixXd vres_power;               // MW, aggregate wind + solar output
  Eigen::MatrixXd price_up;                 // per MWh, penalty for energy shortfall
  Eigen::MatrixXd price_down;               // per MWh, credit for energy surplus

  int num_scenarios() const { return static_cast<int>(vres_power.rows()); }
  int num_periods() const { return static_cast<int>(vres_power.cols()); }
  void validate(int expected_plants) const;
};

struct MarketAndObjective {
  Eigen::VectorXd offer;      // MWh committed per period
  Eigen::MatrixXd level_ref;  // m, (num_plants x num_periods) reservoir targets
  double alpha = 0.0;         // weight of the quadratic level-tracking term

  void validate(const CascadeInstance& instance, int expected_periods) const;
};

// Measured state carried between controller steps: current reservoir levels
// plus the most recent implemented discharges, needed both by the travel-time
// delays and by the first-period ramp limit. Histories are stored oldest
// first, so past_qtr[n][size-1] is the discharge of the period just ended.
struct RollingState {
  Eigen::VectorXd level;                  // m, per plant
  std::vector<Eigen::VectorXd> past_qtr;  // m^3/s, per plant
  std::vector<Eigen::VectorXd> past_qbr;  // m^3/s, per plant

  void validate(const CascadeInstance& instance) const;
};

// Number of whole periods a travel time spans, rounded half-up so that a
// physical delay at coarse sampling is never silently dropped to zero.
int delay_to_periods(double tau_seconds, double delta_seconds);

// Generation of one plant at a given turbine discharge and head.
double hydropower_power(const CascadeInstance& instance, int plant, double q_tr,
                        double head);

// One face of the convex envelope of the product q_tr * head over the plant's
// discharge/head box: lower faces satisfy q_tr * head >= value(q_tr, head),
// upper faces q_tr * head <= value(q_tr, head), with
// value = q_coef * q_tr + h_coef * head + offset.
struct EnvelopeRow {
  double q_coef = 0.0;
  double h_coef = 0.0;
  double offset = 0.0;
  bool lower = false;

  double value(double q_tr, double head) const {
    return q_coef * q_tr + h_coef * head + offset;
  }
};

// The four envelope faces: two lower, two upper, tight at the box corners.
std::array<EnvelopeRow, 4> mccormick_rows(const PlantParams& plant);

}  // namespace cascade
