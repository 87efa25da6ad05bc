#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "windgrid/grid.hpp"
#include "windgrid/scenario_set.hpp"

namespace windgrid {

// N x T on/off states plus start-up and shutdown event flags.
struct UnitCommitment {
  Eigen::MatrixXi u;      // on/off
  Eigen::MatrixXi alpha;  // start-up events
  Eigen::MatrixXi beta;   // shutdown events
};

struct CostBreakdown {
  double c_ss = 0.0;    // start-up/shutdown
  double c_f = 0.0;     // fuel
  double c_w = 0.0;     // wind
  double c_b = 0.0;     // storage use
  double objective = 0.0;
};

struct DispatchSolution {
  UnitCommitment commitment;
  Eigen::MatrixXd p;       // N x T generator output, MW
  Eigen::MatrixXd p_wind;  // W x T dispatched wind, MW
  Eigen::MatrixXd p_ch;    // B x T charging power, MW
  Eigen::MatrixXd p_dis;   // B x T discharging power, MW
  Eigen::MatrixXd e;       // B x T end-of-hour energy, MWh
  CostBreakdown costs;
  double curtailment_mwh = 0.0;
  std::optional<Eigen::MatrixXd> flows;  // L x T, present in network mode
};

enum class SolverKind { Exact, Heuristic };

struct ScheduleProblem {
  GridModel grid;
  Eigen::MatrixXd wind_available;  // W x T, one scenario
  bool with_storage = false;       // Case 1 vs Case 2
  bool network_constraints = false;
  SolverKind solver = SolverKind::Exact;
};

struct Violation {
  std::string what;
  double magnitude = 0.0;
};

struct Curtailment {
  double total_mwh = 0.0;
  std::vector<double> per_hour;
};

struct BatchStats {
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
  int solved = 0;
  int failed = 0;
};

struct BatchResult {
  std::vector<std::optional<DispatchSolution>> solutions;  // per scenario
  std::vector<std::string> failures;  // empty string when solved
  BatchStats stats;
};

// Cost formulas applied to a candidate; no feasibility checking.
CostBreakdown evaluate_costs(const GridModel& grid,
                             const DispatchSolution& candidate);

// Returns every violated constraint; an empty list means feasible.
std::vector<Violation> check_feasibility(const ScheduleProblem& problem,
                                         const DispatchSolution& candidate);

// Commitment enumeration with convex dispatch per leaf (exact) or
// priority-list plus local search (heuristic).
DispatchSolution solve_schedule(const ScheduleProblem& problem);

// Independent oracle: exhaustive commitment enumeration with refined
// grid-search dispatch. Limited to small instances.
DispatchSolution brute_force_schedule(const ScheduleProblem& problem);

Curtailment compute_curtailment(const ScheduleProblem& problem,
                                const DispatchSolution& solution);

// W x T availability for scenario s: the single-farm series replicated
// across farms, tiled over the grid horizon, capped at each farm's capacity.
Eigen::MatrixXd scenario_wind_matrix(const GridModel& grid,
                                     const ScenarioSet& scenarios, int s);

BatchResult stochastic_batch(const GridModel& grid,
                             const ScenarioSet& scenarios, bool with_storage,
                             bool network_constraints,
                             SolverKind solver = SolverKind::Exact);

// Minimal start/stop flags implied by an on/off matrix and initial states.
UnitCommitment make_commitment(const GridModel& grid,
                               const Eigen::MatrixXi& u);

}  // namespace windgrid
