#pragma once

#include <Eigen/Dense>

#include "windgrid/scheduler.hpp"

namespace windgrid::detail {

// Charge/discharge powers implied by an hourly energy delta d (MWh):
// d > 0 charges (E rises by d), d < 0 discharges.
inline double charge_power(const StorageUnit& s, double d) {
  return d > 0.0 ? d / s.eta_ch : 0.0;
}
inline double discharge_power(const StorageUnit& s, double d) {
  return d < 0.0 ? -d * s.eta_dis : 0.0;
}
inline double storage_net_output(const StorageUnit& s, double d) {
  return discharge_power(s, d) - charge_power(s, d);
}
inline double storage_use_cost(const StorageUnit& s, double d) {
  return s.s_ch * charge_power(s, d) + s.s_dis * discharge_power(s, d);
}
// Feasible energy-delta interval from the power bounds.
inline double delta_min(const StorageUnit& s) { return -s.p_max / s.eta_dis; }
inline double delta_max(const StorageUnit& s) { return s.p_max * s.eta_ch; }

// Continuous dispatch of one commitment: fuel + wind + storage-use cost,
// copper-plate or network (DC line limits via quadratic penalty).
struct CommitmentDispatch {
  bool feasible = false;
  Eigen::MatrixXd p;       // N x T (zero where off)
  Eigen::MatrixXd p_wind;  // W x T
  Eigen::MatrixXd d;       // B x T energy deltas, rows sum to ~0
  double variable_cost = 0.0;  // fuel + wind + storage use
};

CommitmentDispatch solve_commitment_dispatch(const ScheduleProblem& problem,
                                             const Eigen::MatrixXi& u);

// Exact single-hour economic dispatch: minimize sum of a_i p^2 + b_i p over
// boxes with sum(p) = target. Returns false when the target is outside the
// aggregate capability.
struct HourUnit {
  double a = 0.0;
  double b = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  int bus = 0;
};

bool economic_dispatch(const std::vector<HourUnit>& units, double target,
                       std::vector<double>& out, double* cost);

}  // namespace windgrid::detail
