#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "windgrid/ddm.hpp"
#include "windgrid/grid_io.hpp"

using namespace windgrid;
using namespace windgrid::testing;

namespace {

// Triangle grid where both wind delivery paths bind at the optimum, so any
// reactance perturbation strictly reduces deliverable wind: every candidate
// plan has a non-negative cost increment.
GridModel congested_triangle(bool all_dfacts = false) {
  GridModel g;
  g.horizon = 2;
  g.buses = {{0, {100.0, 110.0}}, {1, {0.0, 0.0}}, {2, {0.0, 0.0}}};
  g.branches = {{0, 0, 1, 0.10, 60.0, all_dfacts},
                {1, 1, 2, 0.14, 25.0, true},
                {2, 0, 2, 0.20, 30.0, true}};
  Generator gen;
  gen.id = 0;
  gen.bus = 0;
  gen.a = 0.01;
  gen.b = 25.0;
  gen.c = 20.0;
  gen.p_min = 10.0;
  gen.p_max = 150.0;
  gen.initial_on = true;
  g.generators = {gen};
  WindFarm wf;
  wf.id = 0;
  wf.bus = 2;
  wf.capacity = 80.0;
  g.wind_farms = {wf};
  g.validate();
  return g;
}

ScheduleProblem congested_problem(const GridModel& g) {
  ScheduleProblem problem;
  problem.grid = g;
  problem.wind_available = Eigen::MatrixXd::Constant(1, 2, 80.0);
  problem.network_constraints = true;
  return problem;
}

// Re-implements the lexicographic plan selection from public pieces only.
DdmChoice exhaustive_choice(const GridModel& grid, const DdmConfig& config,
                            const ScheduleProblem& base, bool with_storage) {
  const auto plans = enumerate_candidate_plans(grid, config);
  const MeasurementMatrix h = build_measurement_matrix(grid);
  const AttackBatch attacks = sample_attack_vectors(
      grid.bus_count(), config.attack_count, config.attack_seed);

  auto l1 = [](const PerturbationPlan& p) {
    double s = 0.0;
    for (double d : p.deltas) s += std::abs(d);
    return s;
  };

  DdmChoice best;
  bool have = false;
  for (int id = 0; id < static_cast<int>(plans.size()); ++id) {
    const MeasurementMatrix hp = build_measurement_matrix(grid, plans[id]);
    const double eta =
        detection_success_rate(h, hp, attacks, config.delta);
    if (have && eta < best.success_rate) continue;
    ScheduleProblem problem = base;
    problem.with_storage = with_storage;
    const double inc = cost_increment(grid, plans[id], problem);
    const bool better =
        !have || eta > best.success_rate ||
        (eta == best.success_rate &&
         (inc < best.cost_increment ||
          (inc == best.cost_increment &&
           (l1(plans[id]) < l1(best.plan) ||
            (l1(plans[id]) == l1(best.plan) &&
             plans[id].deltas < best.plan.deltas)))));
    if (better) {
      best = DdmChoice{plans[id], id, eta, inc};
      have = true;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("sample_attack_vectors: deterministic unit-norm rows") {
  const AttackBatch a = sample_attack_vectors(3, 5, 7);
  const AttackBatch b = sample_attack_vectors(3, 5, 7);
  CHECK(a.vectors == b.vectors);
  for (int i = 0; i < a.count(); ++i)
    CHECK(std::abs(a.vectors.row(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("sample_attack_vectors: coordinate means vanish at scale") {
  const AttackBatch a = sample_attack_vectors(200, 10000, 11);
  const double bound = 4.0 / std::sqrt(10000.0);
  for (int j = 0; j < a.dimension(); ++j)
    CHECK(std::abs(a.vectors.col(j).mean()) < bound);
}

TEST_CASE("detection_success_rate: unperturbed matrix detects nothing") {
  const GridModel g = make_triangle();
  const MeasurementMatrix h = build_measurement_matrix(g);
  const AttackBatch attacks = sample_attack_vectors(3, 200, 3);
  CHECK(detection_success_rate(h, h, attacks, 0.5) == 0.0);
}

TEST_CASE("detection_success_rate: halving every reactance gives |r| = 1 "
          "exactly") {
  const GridModel g = make_triangle();
  GridModel halved = g;
  for (auto& br : halved.branches) br.reactance *= 0.5;
  const MeasurementMatrix h = build_measurement_matrix(g);
  const MeasurementMatrix hp = build_measurement_matrix(halved);
  const AttackBatch attacks = sample_attack_vectors(3, 500, 5);
  CHECK(detection_success_rate(h, hp, attacks, 0.8) == 1.0);
  CHECK(detection_success_rate(h, hp, attacks, 1.0) == 1.0);
  const Eigen::VectorXd r = attack_change_ratios(h, hp, attacks);
  for (int i = 0; i < r.size(); ++i) CHECK(r(i) == 1.0);
}

TEST_CASE("attack_change_ratios: uniform scaling law |r| = |1/k - 1|") {
  const GridModel g = make_triangle();
  const double k = 4.0;
  GridModel scaled = g;
  for (auto& br : scaled.branches) br.reactance *= k;
  const MeasurementMatrix h = build_measurement_matrix(g);
  const MeasurementMatrix hp = build_measurement_matrix(scaled);
  const AttackBatch attacks = sample_attack_vectors(3, 100, 9);
  const Eigen::VectorXd r = attack_change_ratios(h, hp, attacks);
  for (int i = 0; i < r.size(); ++i)
    CHECK(std::abs(r(i) - 0.75) < 1e-13);
}

TEST_CASE("attack_change_ratios: invariant to flipping or scaling attacks") {
  const GridModel g = load_grid_json(fixture_path("grid3.json"));
  const PerturbationPlan plan = make_plan(g, {0.0, 0.1, 0.0}, 0.05, 0.15);
  const MeasurementMatrix h = build_measurement_matrix(g);
  const MeasurementMatrix hp = build_measurement_matrix(g, plan);
  AttackBatch attacks = sample_attack_vectors(3, 50, 13);
  const Eigen::VectorXd r = attack_change_ratios(h, hp, attacks);
  AttackBatch flipped = attacks;
  flipped.vectors *= -1.0;
  AttackBatch scaled = attacks;
  scaled.vectors *= 3.0;
  CHECK((attack_change_ratios(h, hp, flipped) - r).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((attack_change_ratios(h, hp, scaled) - r).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("detection_success_rate: per-attack loop oracle agreement") {
  const GridModel g = load_grid_json(fixture_path("grid3.json"));
  const PerturbationPlan plan = make_plan(g, {0.0, 0.1, 0.0}, 0.05, 0.15);
  const MeasurementMatrix h = build_measurement_matrix(g);
  const MeasurementMatrix hp = build_measurement_matrix(g, plan);
  const AttackBatch attacks = sample_attack_vectors(3, 1000, 21);

  for (double delta : {0.01, 0.05, 0.2}) {
    int hits = 0;
    for (int i = 0; i < attacks.count(); ++i) {
      const Eigen::VectorXd c = attacks.vectors.row(i).transpose();
      double nb = 0.0, np = 0.0;
      for (int row = 0; row < h.rows(); ++row) {
        double sb = 0.0, sp = 0.0;
        for (int col = 0; col < h.cols(); ++col) {
          sb += h.entries(row, col) * c(col);
          sp += hp.entries(row, col) * c(col);
        }
        nb += sb * sb;
        np += sp * sp;
      }
      nb = std::sqrt(nb);
      np = std::sqrt(np);
      if (std::abs((np - nb) / nb) >= delta) ++hits;
    }
    const double expected = static_cast<double>(hits) / attacks.count();
    CHECK(detection_success_rate(h, hp, attacks, delta) == expected);
  }
}

TEST_CASE("detection_success_rate: degenerate attacks rejected") {
  const GridModel g = make_triangle();
  const MeasurementMatrix h = build_measurement_matrix(g);
  AttackBatch attacks;
  attacks.vectors = Eigen::MatrixXd::Constant(1, 3, 1.0 / std::sqrt(3.0));
  // The all-ones direction is the null space of every measurement block.
  CHECK_THROWS_AS(detection_success_rate(h, h, attacks, 0.5),
                  DegenerateAttack);
}

TEST_CASE("stealthy attacks live in the row space of H") {
  const GridModel g = make_triangle();
  const MeasurementMatrix h = build_measurement_matrix(g);
  const AttackBatch attacks = sample_stealthy_attack_vectors(h, 20, 31);
  for (int i = 0; i < attacks.count(); ++i) {
    CHECK(std::abs(attacks.vectors.row(i).norm() - 1.0) < 1e-12);
    // Orthogonal to the all-ones null direction.
    CHECK(std::abs(attacks.vectors.row(i).sum()) < 1e-9);
  }
}

TEST_CASE("cost_increment: zero plan costs nothing") {
  const GridModel g = congested_triangle();
  const ScheduleProblem base = congested_problem(g);
  PerturbationPlan zero;
  zero.deltas = {0.0, 0.0, 0.0};
  zero.range_low = 0.0;
  zero.range_high = 0.5;
  CHECK(cost_increment(g, zero, base) == 0.0);
}

TEST_CASE("cost_increment: requires network constraints") {
  const GridModel g = congested_triangle();
  ScheduleProblem base = congested_problem(g);
  base.network_constraints = false;
  PerturbationPlan zero;
  zero.deltas = {0.0, 0.0, 0.0};
  zero.range_low = 0.0;
  zero.range_high = 0.5;
  CHECK_THROWS_AS(cost_increment(g, zero, base), InvalidArgument);
}

TEST_CASE("cost_increment: uncongested network is reactance-independent") {
  GridModel g = congested_triangle();
  for (auto& br : g.branches) br.flow_limit = 1000.0;
  g.validate();
  const ScheduleProblem base = congested_problem(g);
  const PerturbationPlan plan = make_plan(g, {0.0, 0.1, 0.0}, 0.05, 0.15);
  CHECK(cost_increment(g, plan, base) <= 1e-9);
}

TEST_CASE("cost_increment: tightening the binding corridor matches the "
          "brute-force oracle") {
  const GridModel g = congested_triangle();
  const ScheduleProblem base = congested_problem(g);
  const PerturbationPlan plan = make_plan(g, {0.0, 0.1, 0.0}, 0.05, 0.15);

  const double inc = cost_increment(g, plan, base);
  CHECK(inc > 1e-4);

  ScheduleProblem pert = base;
  pert.grid = apply_perturbation(g, plan);
  const double f_base = brute_force_schedule(base).costs.objective;
  const double f_pert = brute_force_schedule(pert).costs.objective;
  const double oracle = (f_pert - f_base) / f_base;
  CHECK(std::abs(inc - oracle) <= 1e-3 * std::max(1.0, std::abs(oracle)));
}

TEST_CASE("enumerate_candidate_plans: only the zero plan without levels") {
  const GridModel g = congested_triangle();
  DdmConfig config;
  config.range_low = 0.05;
  config.range_high = 0.15;
  const auto plans = enumerate_candidate_plans(g, config);
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].is_zero());
}

TEST_CASE("enumerate_candidate_plans: Cartesian grid over D-FACTS lines") {
  const GridModel g = congested_triangle();  // two D-FACTS lines
  DdmConfig config;
  config.range_low = 0.05;
  config.range_high = 0.15;
  config.candidate_levels = {0.08, 0.5};  // 0.5 is outside the range
  const auto plans = enumerate_candidate_plans(g, config);
  CHECK(plans.size() == 9);  // {-0.08, 0, +0.08} per line
  for (const auto& plan : plans) {
    CHECK(plan.deltas[0] == 0.0);  // non-D-FACTS line stays untouched
    plan.validate(g);
  }
}

TEST_CASE("optimize_ddm: a levels-free config returns the zero plan") {
  const GridModel g = congested_triangle();
  DdmConfig config;
  config.delta = 0.7;
  config.range_low = 0.05;
  config.range_high = 0.15;
  config.attack_count = 100;
  config.attack_seed = 17;
  const DdmChoice choice =
      optimize_ddm(g, config, congested_problem(g), false);
  CHECK(choice.plan.is_zero());
  CHECK(choice.success_rate == 0.0);
  CHECK(choice.cost_increment == 0.0);
}

TEST_CASE("optimize_ddm: ties fall through to the smallest plan") {
  // Radial network: dispatch is reactance-independent, and delta = 1.0 puts
  // every candidate at eta = 0, so the zero plan wins on |deltas| alone.
  GridModel g = make_grid2(0.5);
  g.buses[1].demand = {100.0};
  g.generators[0].b = 20.0;
  g.generators[0].a = 0.01;
  g.validate();
  ScheduleProblem base;
  base.grid = g;
  base.wind_available.resize(0, 1);
  base.network_constraints = true;

  DdmConfig config;
  config.delta = 1.0;
  config.range_low = 0.05;
  config.range_high = 0.15;
  config.candidate_levels = {0.1};
  config.attack_count = 200;
  config.attack_seed = 23;

  const DdmChoice choice = optimize_ddm(g, config, base, false);
  CHECK(choice.success_rate == 0.0);
  CHECK(choice.plan.is_zero());
}

TEST_CASE("optimize_ddm: matches exhaustive candidate enumeration") {
  const GridModel two_lines = congested_triangle(false);   // 9 candidates
  const GridModel three_lines = congested_triangle(true);  // 27 candidates
  for (const GridModel* g : {&two_lines, &three_lines}) {
    DdmConfig config;
    config.delta = 0.01;
    config.range_low = 0.05;
    config.range_high = 0.15;
    config.candidate_levels = {0.08};
    config.attack_count = 400;
    config.attack_seed = 29;
    const ScheduleProblem base = congested_problem(*g);

    const DdmChoice fast = optimize_ddm(*g, config, base, false);
    const DdmChoice slow = exhaustive_choice(*g, config, base, false);
    CHECK(fast.plan_id == slow.plan_id);
    CHECK(fast.success_rate == slow.success_rate);
    CHECK(fast.cost_increment == doctest::Approx(slow.cost_increment));
    CHECK(fast.plan.deltas == slow.plan.deltas);
  }
}

TEST_CASE("tradeoff_sweep: one delta reproduces optimize_ddm") {
  const GridModel g = congested_triangle();
  DdmConfig config;
  config.delta = 0.7;
  config.range_low = 0.05;
  config.range_high = 0.15;
  config.candidate_levels = {0.08};
  config.attack_count = 300;
  config.attack_seed = 37;
  const ScheduleProblem base = congested_problem(g);

  config.delta = 0.7;
  const DdmChoice choice = optimize_ddm(g, config, base, false);
  const TradeoffCurve curve = tradeoff_sweep(g, base, {0.7}, config, false);
  REQUIRE(curve.rows.size() == 1);
  CHECK(curve.rows[0].error.empty());
  CHECK(curve.rows[0].success_rate == choice.success_rate);
  CHECK(curve.rows[0].cost_increment == choice.cost_increment);
  CHECK(curve.rows[0].plan_id == choice.plan_id);
}

TEST_CASE("tradeoff_sweep: deterministic and monotone over the delta grid") {
  const GridModel g = congested_triangle();
  const std::vector<double> deltas{0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99};
  DdmConfig config;
  config.range_low = 0.05;
  config.range_high = 0.95;
  config.candidate_levels = {0.9};  // large enough to push some ratios high
  config.attack_count = 500;
  config.attack_seed = 41;
  const ScheduleProblem base = congested_problem(g);

  const TradeoffCurve a = tradeoff_sweep(g, base, deltas, config, false);
  const TradeoffCurve b = tradeoff_sweep(g, base, deltas, config, false);
  REQUIRE(a.rows.size() == deltas.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].success_rate == b.rows[i].success_rate);
    CHECK(a.rows[i].cost_increment == b.rows[i].cost_increment);
    CHECK(a.rows[i].plan_id == b.rows[i].plan_id);
    if (i > 0 && a.rows[i].error.empty() && a.rows[i - 1].error.empty())
      CHECK(a.rows[i].success_rate <= a.rows[i - 1].success_rate);
  }
}

TEST_CASE("tradeoff_sweep: rejects a non-increasing delta list") {
  const GridModel g = congested_triangle();
  DdmConfig config;
  config.range_low = 0.05;
  config.range_high = 0.15;
  config.attack_count = 10;
  CHECK_THROWS_AS(
      tradeoff_sweep(g, congested_problem(g), {0.8, 0.7}, config, false),
      InvalidArgument);
}
