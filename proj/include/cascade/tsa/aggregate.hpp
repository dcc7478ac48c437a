#pragma once

// Tail aggregation of the prediction horizon: the first R-1 periods keep full
// resolution, the remaining K-R+1 periods collapse into one representative
// period. Includes the builder for the aggregated dispatch QP, in which every
// full-horizon constraint is re-emitted per representative period over
// cluster-averaged inputs, with reservoir dynamics scaled by cluster duration
// and imbalance prices entering as per-cluster mass.

#include "cascade/model/build.hpp"
#include "cascade/model/instance.hpp"
#include "cascade/qp/types.hpp"

#include <vector>

namespace cascade {

// Ordered partition of [0, full_periods) into contiguous clusters.
struct ClusterMap {
  int full_periods = 0;
  std::vector<int> start;  // first full-scale period of each cluster
  std::vector<int> size;   // cluster lengths; sums to full_periods

  int num_clusters() const { return static_cast<int>(start.size()); }
  int last(int r) const { return start[r] + size[r] - 1; }
  int cluster_of(int period) const;
  void validate() const;
};

// Tail scheme: representative-1 singletons followed by one tail cluster.
ClusterMap build_tail_map(int full_periods, int representative);

// Arithmetic mean of the series over each cluster.
Eigen::VectorXd aggregate_series(const Eigen::VectorXd& series, const ClusterMap& map);

// Row-wise aggregation of (scenario x period) series.
Eigen::MatrixXd aggregate_columns(const Eigen::MatrixXd& series, const ClusterMap& map);

struct AggregatedModelHandle {
  qp::QpProblem problem;
  qp::VariableRegistry registry;  // same key kinds as the full model, period = r
  ClusterMap map;
  double objective_constant = 0.0;
  int num_plants = 0;
  int num_scenarios = 0;
};

AggregatedModelHandle build_aggregated_model(const CascadeInstance& instance,
                                             const ScenarioSet& scenarios,
                                             const MarketAndObjective& market,
                                             const RollingState& state, const ClusterMap& map);

}  // namespace cascade
