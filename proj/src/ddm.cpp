#include "windgrid/ddm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "windgrid/errors.hpp"
#include "windgrid/rng.hpp"

namespace windgrid {

namespace {

constexpr std::size_t kCandidateBudget = 100000;

// Lexicographic plan preference after (success rate, cost increment):
// smaller L1 norm first, then elementwise order.
bool plan_less(const PerturbationPlan& a, const PerturbationPlan& b) {
  double na = 0.0, nb = 0.0;
  for (double d : a.deltas) na += std::abs(d);
  for (double d : b.deltas) nb += std::abs(d);
  if (na != nb) return na < nb;
  return a.deltas < b.deltas;
}

double solve_objective(const ScheduleProblem& problem) {
  return solve_schedule(problem).costs.objective;
}

}  // namespace

void DdmConfig::validate() const {
  if (delta <= 0.0 || delta > 1.0)
    throw InvalidArgument("detectability threshold must be in (0, 1]");
  if (range_low < 0.0 || range_low >= range_high || range_high >= 1.0)
    throw InvalidArgument("perturbation range must satisfy 0 <= low < high < 1");
  if (attack_count < 1) throw InvalidArgument("attack count must be >= 1");
}

AttackBatch sample_attack_vectors(int dimension, int n, std::uint64_t seed) {
  if (dimension < 1 || n < 1)
    throw InvalidArgument("attack batch needs dimension >= 1 and n >= 1");
  AttackBatch batch;
  batch.seed = seed;
  batch.vectors.resize(n, dimension);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dimension; ++j) batch.vectors(i, j) = rng.normal();
    batch.vectors.row(i).normalize();
  }
  return batch;
}

AttackBatch sample_stealthy_attack_vectors(const MeasurementMatrix& H, int n,
                                           std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("attack batch needs n >= 1");
  AttackBatch batch;
  batch.seed = seed;
  batch.vectors.resize(n, H.cols());
  Rng rng(seed);
  Eigen::VectorXd w(H.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < w.size(); ++j) w(j) = rng.normal();
    Eigen::VectorXd c = H.entries.transpose() * w;
    const double norm = c.norm();
    if (norm < 1e-12)
      throw DegenerateAttack("measurement operator annihilated a draw");
    batch.vectors.row(i) = c / norm;
  }
  return batch;
}

Eigen::VectorXd attack_change_ratios(const MeasurementMatrix& H,
                                     const MeasurementMatrix& H_perturbed,
                                     const AttackBatch& attacks) {
  if (H.rows() != H_perturbed.rows() || H.cols() != H_perturbed.cols())
    throw InvalidArgument("measurement matrices have different shapes");
  if (attacks.dimension() != H.cols())
    throw InvalidArgument("attack dimension does not match state dimension");

  const Eigen::MatrixXd base = H.entries * attacks.vectors.transpose();
  const Eigen::MatrixXd pert = H_perturbed.entries * attacks.vectors.transpose();
  Eigen::VectorXd out(attacks.count());
  for (int i = 0; i < attacks.count(); ++i) {
    const double nb = base.col(i).norm();
    if (nb < 1e-12)
      throw DegenerateAttack("attack " + std::to_string(i) +
                             " maps to (near) zero measurements");
    out(i) = std::abs((pert.col(i).norm() - nb) / nb);
  }
  return out;
}

double detection_success_rate(const MeasurementMatrix& H,
                              const MeasurementMatrix& H_perturbed,
                              const AttackBatch& attacks, double delta) {
  const Eigen::VectorXd r = attack_change_ratios(H, H_perturbed, attacks);
  int hits = 0;
  for (int i = 0; i < r.size(); ++i)
    if (r(i) >= delta) ++hits;
  return static_cast<double>(hits) / static_cast<double>(r.size());
}

double cost_increment(const GridModel& grid, const PerturbationPlan& plan,
                      const ScheduleProblem& base_problem) {
  if (!base_problem.network_constraints)
    throw InvalidArgument(
        "cost_increment requires network constraints; reactance cannot "
        "change a copper-plate dispatch");
  plan.validate(grid);

  ScheduleProblem base = base_problem;
  base.grid = grid;
  const double f_base = solve_objective(base);

  ScheduleProblem perturbed = base_problem;
  perturbed.grid = apply_perturbation(grid, plan);
  const double f_pert = solve_objective(perturbed);

  const double inc = (f_pert - f_base) / f_base;
  if (inc < 0.0) {
    if (inc > -1e-9) return 0.0;
    throw NegativeIncrement("perturbed optimum below base optimum by " +
                            std::to_string(-inc));
  }
  return inc;
}

std::vector<PerturbationPlan> enumerate_candidate_plans(
    const GridModel& grid, const DdmConfig& config) {
  config.validate();
  std::vector<int> dfacts_lines;
  for (int l = 0; l < grid.branch_count(); ++l)
    if (grid.branches[l].dfacts) dfacts_lines.push_back(l);

  std::vector<double> options{0.0};
  for (double level : config.candidate_levels) {
    if (level < config.range_low - 1e-12 || level > config.range_high + 1e-12)
      continue;
    options.push_back(-level);
    options.push_back(level);
  }
  std::sort(options.begin(), options.end());

  std::size_t total = 1;
  for (size_t i = 0; i < dfacts_lines.size(); ++i) {
    total *= options.size();
    if (total > kCandidateBudget)
      throw BudgetExceeded("candidate plan count exceeds " +
                           std::to_string(kCandidateBudget));
  }
  if (dfacts_lines.empty() || options.size() == 1) {
    // Only the zero plan is available.
    PerturbationPlan zero;
    zero.deltas.assign(grid.branch_count(), 0.0);
    zero.range_low = config.range_low;
    zero.range_high = config.range_high;
    return {zero};
  }

  std::vector<PerturbationPlan> plans;
  plans.reserve(total);
  std::vector<size_t> idx(dfacts_lines.size(), 0);
  for (;;) {
    PerturbationPlan plan;
    plan.deltas.assign(grid.branch_count(), 0.0);
    plan.range_low = config.range_low;
    plan.range_high = config.range_high;
    for (size_t k = 0; k < dfacts_lines.size(); ++k)
      plan.deltas[dfacts_lines[k]] = options[idx[k]];
    plans.push_back(std::move(plan));

    size_t k = 0;
    while (k < idx.size() && ++idx[k] == options.size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return plans;
}

namespace {

struct SweepEngine {
  const GridModel& grid;
  const ScheduleProblem& base_problem;
  const DdmConfig& config;
  bool with_storage;

  std::vector<PerturbationPlan> plans;
  MeasurementMatrix h_base;
  AttackBatch attacks;
  std::vector<Eigen::VectorXd> ratios;        // per plan
  std::map<int, double> increment_cache;      // per plan id

  SweepEngine(const GridModel& g, const ScheduleProblem& bp,
              const DdmConfig& cfg, bool storage)
      : grid(g), base_problem(bp), config(cfg), with_storage(storage) {
    plans = enumerate_candidate_plans(grid, config);
    h_base = build_measurement_matrix(grid);
    attacks = config.stealthy_attacks
                  ? sample_stealthy_attack_vectors(h_base, config.attack_count,
                                                   config.attack_seed)
                  : sample_attack_vectors(grid.bus_count(), config.attack_count,
                                          config.attack_seed);
    ratios.reserve(plans.size());
    for (const auto& plan : plans) {
      const MeasurementMatrix hp = build_measurement_matrix(grid, plan);
      ratios.push_back(attack_change_ratios(h_base, hp, attacks));
    }
  }

  double eta(int plan_id, double delta) const {
    const Eigen::VectorXd& r = ratios[plan_id];
    int hits = 0;
    for (int i = 0; i < r.size(); ++i)
      if (r(i) >= delta) ++hits;
    return static_cast<double>(hits) / static_cast<double>(r.size());
  }

  double increment(int plan_id) {
    auto it = increment_cache.find(plan_id);
    if (it != increment_cache.end()) return it->second;
    ScheduleProblem problem = base_problem;
    problem.with_storage = with_storage;
    const double inc = cost_increment(grid, plans[plan_id], problem);
    increment_cache.emplace(plan_id, inc);
    return inc;
  }

  DdmChoice choose(double delta) {
    // Pass 1: eta-maximal plan set.
    double best_eta = -1.0;
    std::vector<int> top;
    for (int id = 0; id < static_cast<int>(plans.size()); ++id) {
      const double e = eta(id, delta);
      if (e > best_eta) {
        best_eta = e;
        top.clear();
      }
      if (e == best_eta) top.push_back(id);
    }
    // Pass 2: minimal cost increment, then plan order.
    std::optional<DdmChoice> best;
    for (int id : top) {
      const double inc = increment(id);
      if (!best || inc < best->cost_increment ||
          (inc == best->cost_increment &&
           plan_less(plans[id], best->plan))) {
        best = DdmChoice{plans[id], id, best_eta, inc};
      }
    }
    return *best;
  }
};

}  // namespace

DdmChoice optimize_ddm(const GridModel& grid, const DdmConfig& config,
                       const ScheduleProblem& base_problem, bool with_storage) {
  SweepEngine engine(grid, base_problem, config, with_storage);
  return engine.choose(config.delta);
}

TradeoffCurve tradeoff_sweep(const GridModel& grid,
                             const ScheduleProblem& base_problem,
                             const std::vector<double>& delta_list,
                             const DdmConfig& config, bool with_storage) {
  if (delta_list.empty())
    throw InvalidArgument("delta list must be nonempty");
  for (size_t i = 0; i < delta_list.size(); ++i) {
    if (delta_list[i] <= 0.0 || delta_list[i] > 1.0)
      throw InvalidArgument("every delta must lie in (0, 1]");
    if (i > 0 && delta_list[i] <= delta_list[i - 1])
      throw InvalidArgument("delta list must be strictly increasing");
  }

  SweepEngine engine(grid, base_problem, config, with_storage);
  TradeoffCurve curve;
  curve.plans = engine.plans;
  curve.attack_seed = config.attack_seed;
  for (double delta : delta_list) {
    TradeoffRow row;
    row.delta = delta;
    try {
      const DdmChoice choice = engine.choose(delta);
      row.success_rate = choice.success_rate;
      row.cost_increment = choice.cost_increment;
      row.plan_id = choice.plan_id;
    } catch (const Error& e) {
      row.error = e.what();
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

}  // namespace windgrid
