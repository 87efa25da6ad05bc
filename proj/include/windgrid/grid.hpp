#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "windgrid/errors.hpp"

namespace windgrid {

struct Bus {
  int id = 0;
  std::vector<double> demand;  // MW per hour, length = grid horizon
};

struct Branch {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;   // per unit, > 0
  double flow_limit = 0.0;  // MW, > 0
  bool dfacts = false;      // perturbation-capable
};

struct Generator {
  int id = 0;
  int bus = 0;
  double a = 0.0;  // $/MW^2 h
  double b = 0.0;  // $/MWh
  double c = 0.0;  // $/h, charged only while on
  double p_min = 0.0;
  double p_max = 0.0;
  double pr_su = 0.0;
  double pr_sd = 0.0;
  bool initial_on = false;
};

struct StorageUnit {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;  // MW, lower bound on charge/discharge power
  double p_max = 0.0;  // MW
  double e_min = 0.0;  // MWh
  double e_max = 0.0;  // MWh
  double e_initial = 0.0;
  double eta_ch = 0.95;
  double eta_dis = 0.95;
  double s_ch = 2.5;   // $/MWh
  double s_dis = 2.5;  // $/MWh
};

struct WindFarm {
  int id = 0;
  int bus = 0;
  double capacity = 0.0;        // MW
  double lambda_price = 1e-4;   // $/MWh
};

// Immutable network description. Validate after construction; all kernels
// assume a validated grid.
struct GridModel {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<StorageUnit> storage_units;
  std::vector<WindFarm> wind_farms;
  int horizon = 0;  // T hours

  int bus_count() const { return static_cast<int>(buses.size()); }
  int branch_count() const { return static_cast<int>(branches.size()); }

  // Throws InvalidArgument describing the first violated invariant.
  void validate() const;
};

// Per-branch fractional reactance change: x' = x * (1 + delta).
struct PerturbationPlan {
  std::vector<double> deltas;  // length = branch count, 0 on non-D-FACTS lines
  double range_low = 0.0;      // allowed |delta| bounds for nonzero entries
  double range_high = 0.0;

  void validate(const GridModel& grid) const;
  bool is_zero() const;
};

// Stacked (2L+B) x B DC state-estimation matrix [D A^T; -D A^T; A D A^T].
struct MeasurementMatrix {
  Eigen::MatrixXd entries;
  int branch_rows = 0;  // L; rows 0..L-1 and L..2L-1 are the flow blocks

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
};

// Entry (i, j) = +1 if branch j originates at bus i, -1 if it terminates
// there, 0 otherwise. Shape B x L.
Eigen::MatrixXd build_incidence_matrix(const GridModel& grid);

MeasurementMatrix build_measurement_matrix(
    const GridModel& grid,
    const std::optional<PerturbationPlan>& plan = std::nullopt);

// DC power flow with bus 0 as the angle reference. Injections are MW per bus
// and must sum to zero within 1e-6. Returns per-branch flows in MW.
Eigen::VectorXd dc_power_flow(
    const GridModel& grid, const Eigen::VectorXd& injections,
    const std::optional<PerturbationPlan>& plan = std::nullopt);

// Returns a copy of the grid with x'_l = x_l * (1 + delta_l).
GridModel apply_perturbation(const GridModel& grid,
                             const PerturbationPlan& plan);

// L x B matrix mapping nodal injections (summing to zero) to branch flows.
Eigen::MatrixXd power_transfer_matrix(const GridModel& grid);

}  // namespace windgrid
