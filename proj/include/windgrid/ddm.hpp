#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "windgrid/grid.hpp"
#include "windgrid/scheduler.hpp"

namespace windgrid {

// N unit-norm attack vectors in the B-dimensional state space, one per row.
struct AttackBatch {
  Eigen::MatrixXd vectors;  // n x B
  std::uint64_t seed = 0;

  int count() const { return static_cast<int>(vectors.rows()); }
  int dimension() const { return static_cast<int>(vectors.cols()); }
};

struct DdmConfig {
  double delta = 0.7;                    // detectability threshold
  double range_low = 0.0;                // allowed |delta| fraction bounds
  double range_high = 0.0;
  std::vector<double> candidate_levels;  // per-line discrete |delta| levels
  int attack_count = 10000;
  std::uint64_t attack_seed = 0;
  bool stealthy_attacks = false;  // draw attacks from the row space of H

  void validate() const;
};

struct DdmChoice {
  PerturbationPlan plan;
  int plan_id = -1;  // index into the enumerated candidate list
  double success_rate = 0.0;
  double cost_increment = 0.0;
};

struct TradeoffRow {
  double delta = 0.0;
  double success_rate = 0.0;
  double cost_increment = 0.0;
  int plan_id = -1;
  std::string error;  // nonempty when this row failed
};

struct TradeoffCurve {
  std::vector<TradeoffRow> rows;
  std::vector<PerturbationPlan> plans;  // indexed by plan_id
  std::uint64_t attack_seed = 0;
};

// Rows drawn i.i.d. standard normal, then normalized to unit Euclidean norm.
AttackBatch sample_attack_vectors(int dimension, int n, std::uint64_t seed);

// Attacks aligned with the measurement operator: c = normalize(H^T w).
AttackBatch sample_stealthy_attack_vectors(const MeasurementMatrix& H, int n,
                                           std::uint64_t seed);

// Per-attack relative measurement-change magnitudes
// |r_i| = | (||H' c_i|| - ||H c_i||) / ||H c_i|| |.
Eigen::VectorXd attack_change_ratios(const MeasurementMatrix& H,
                                     const MeasurementMatrix& H_perturbed,
                                     const AttackBatch& attacks);

// Fraction of attacks with |r_i| >= delta.
double detection_success_rate(const MeasurementMatrix& H,
                              const MeasurementMatrix& H_perturbed,
                              const AttackBatch& attacks, double delta);

// Relative re-dispatch cost increase caused by the perturbation. Requires a
// network-constrained base problem.
double cost_increment(const GridModel& grid, const PerturbationPlan& plan,
                      const ScheduleProblem& base_problem);

// Cartesian candidate plans over the D-FACTS lines: each line takes 0 or
// +-level for every admissible level.
std::vector<PerturbationPlan> enumerate_candidate_plans(const GridModel& grid,
                                                        const DdmConfig& config);

DdmChoice optimize_ddm(const GridModel& grid, const DdmConfig& config,
                       const ScheduleProblem& base_problem, bool with_storage);

TradeoffCurve tradeoff_sweep(const GridModel& grid,
                             const ScheduleProblem& base_problem,
                             const std::vector<double>& delta_list,
                             const DdmConfig& config, bool with_storage);

}  // namespace windgrid
