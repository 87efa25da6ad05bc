#pragma once

// Shared fixtures and oracles for the unit and acceptance suites.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "windgrid/grid.hpp"
#include "windgrid/rng.hpp"
#include "windgrid/scheduler.hpp"

namespace windgrid::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(WINDGRID_FIXTURE_DIR) + "/" + name;
}

// Two buses joined by one branch (x = 0.5), one generator, unit horizon.
inline GridModel make_grid2(double reactance = 0.5) {
  GridModel g;
  g.horizon = 1;
  g.buses = {{0, {0.0}}, {1, {0.0}}};
  g.branches = {{0, 0, 1, reactance, 1000.0, true}};
  Generator gen;
  gen.id = 0;
  gen.bus = 0;
  gen.p_max = 1000.0;
  g.generators = {gen};
  g.validate();
  return g;
}

// Three-bus triangle 0->1, 1->2, 0->2 with configurable reactances.
inline GridModel make_triangle(double x01 = 0.1, double x12 = 0.2,
                               double x02 = 0.25) {
  GridModel g;
  g.horizon = 1;
  g.buses = {{0, {0.0}}, {1, {0.0}}, {2, {0.0}}};
  g.branches = {{0, 0, 1, x01, 1000.0, true},
                {1, 1, 2, x12, 1000.0, true},
                {2, 0, 2, x02, 1000.0, false}};
  Generator gen;
  gen.id = 0;
  gen.bus = 0;
  gen.p_max = 1000.0;
  g.generators = {gen};
  g.validate();
  return g;
}

inline PerturbationPlan make_plan(const GridModel& grid,
                                  std::vector<double> deltas, double low,
                                  double high) {
  PerturbationPlan plan;
  plan.deltas = std::move(deltas);
  plan.range_low = low;
  plan.range_high = high;
  plan.validate(grid);
  return plan;
}

// Seeded random connected grid: spanning tree plus a few extra branches.
inline GridModel random_connected_grid(std::uint64_t seed, int min_buses = 3,
                                       int max_buses = 20) {
  Rng rng(seed);
  GridModel g;
  g.horizon = 1;
  const int B = min_buses +
                static_cast<int>(rng.below(
                    static_cast<std::uint64_t>(max_buses - min_buses + 1)));
  for (int i = 0; i < B; ++i) g.buses.push_back({i, {0.0}});
  int next_id = 0;
  for (int i = 1; i < B; ++i) {
    Branch br;
    br.id = next_id++;
    br.from_bus = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    br.to_bus = i;
    br.reactance = rng.uniform(0.05, 0.5);
    br.flow_limit = 100.0;
    br.dfacts = rng.uniform() < 0.5;
    g.branches.push_back(br);
  }
  const int extra = B > 2 ? static_cast<int>(rng.below(4)) : 0;
  for (int k = 0; k < extra; ++k) {
    Branch br;
    br.id = next_id++;
    br.from_bus = static_cast<int>(rng.below(static_cast<std::uint64_t>(B)));
    br.to_bus = static_cast<int>(rng.below(static_cast<std::uint64_t>(B)));
    if (br.from_bus == br.to_bus) continue;
    br.reactance = rng.uniform(0.05, 0.5);
    br.flow_limit = 100.0;
    g.branches.push_back(br);
  }
  Generator gen;
  gen.id = 0;
  gen.bus = 0;
  gen.p_max = 100.0;
  g.generators = {gen};
  g.validate();
  return g;
}

// Independent entrywise oracle for the stacked measurement matrix: builds the
// incidence, the reactance diagonal, and each block with plain loops.
inline Eigen::MatrixXd oracle_measurement(const GridModel& grid,
                                          const std::vector<double>& deltas) {
  const int B = grid.bus_count();
  const int L = grid.branch_count();
  std::vector<double> d(L);
  for (int l = 0; l < L; ++l)
    d[l] = 1.0 / (grid.branches[l].reactance * (1.0 + deltas[l]));

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * L + B, B);
  for (int l = 0; l < L; ++l) {
    const int f = grid.branches[l].from_bus;
    const int t = grid.branches[l].to_bus;
    // D A^T row: d_l at the origin bus, -d_l at the terminal bus.
    H(l, f) = d[l];
    H(l, t) = -d[l];
    H(L + l, f) = -d[l];
    H(L + l, t) = d[l];
  }
  for (int l = 0; l < L; ++l) {
    const int f = grid.branches[l].from_bus;
    const int t = grid.branches[l].to_bus;
    // A D A^T accumulated branch by branch.
    H(2 * L + f, f) += d[l];
    H(2 * L + t, t) += d[l];
    H(2 * L + f, t) -= d[l];
    H(2 * L + t, f) -= d[l];
  }
  return H;
}

// A small copper-plate-compatible scheduling instance: <= 2 generators,
// <= 3 hours, optionally one storage unit and one wind farm. Demand is drawn
// so that at least one commitment can balance it.
inline ScheduleProblem random_schedule_problem(std::uint64_t seed) {
  Rng rng(seed);
  GridModel g;
  g.horizon = 1 + static_cast<int>(rng.below(3));
  const int N = 1 + static_cast<int>(rng.below(2));
  const bool with_wind = rng.uniform() < 0.7;
  const bool with_storage = rng.uniform() < 0.5;

  g.buses.push_back({0, std::vector<double>(g.horizon, 0.0)});
  g.buses.push_back({1, std::vector<double>(g.horizon, 0.0)});
  g.branches = {{0, 0, 1, 0.1, 10000.0, false}};

  double fleet_max = 0.0;
  for (int n = 0; n < N; ++n) {
    Generator gen;
    gen.id = n;
    gen.bus = 0;
    gen.a = rng.uniform(0.0, 0.05);
    gen.b = rng.uniform(5.0, 40.0);
    gen.c = rng.uniform(0.0, 20.0);
    gen.p_min = rng.uniform(0.0, 20.0);
    gen.p_max = gen.p_min + rng.uniform(40.0, 120.0);
    gen.pr_su = rng.uniform(0.0, 50.0);
    gen.pr_sd = rng.uniform(0.0, 30.0);
    gen.initial_on = rng.uniform() < 0.5;
    fleet_max += gen.p_max;
    g.generators.push_back(gen);
  }
  if (with_storage) {
    StorageUnit su;
    su.id = 0;
    su.bus = 1;
    su.p_min = 0.0;
    su.p_max = rng.uniform(10.0, 40.0);
    su.e_min = 0.0;
    su.e_max = rng.uniform(40.0, 120.0);
    su.e_initial = rng.uniform(su.e_min, su.e_max);
    su.s_ch = rng.uniform(0.0, 3.0);
    su.s_dis = rng.uniform(0.0, 3.0);
    g.storage_units.push_back(su);
  }

  ScheduleProblem problem;
  double wind_cap = 0.0;
  if (with_wind) {
    WindFarm wf;
    wf.id = 0;
    wf.bus = 1;
    wf.capacity = rng.uniform(20.0, 80.0);
    g.wind_farms.push_back(wf);
    wind_cap = wf.capacity;
  }

  problem.wind_available.resize(g.wind_farms.size(), g.horizon);
  for (int t = 0; t < g.horizon; ++t) {
    // Serviceable by thermal alone so infeasibility stays an explicit case.
    g.buses[0].demand[t] = rng.uniform(0.2, 0.85) * fleet_max;
    if (with_wind) problem.wind_available(0, t) = rng.uniform(0.0, wind_cap);
  }
  g.validate();
  problem.grid = g;
  problem.with_storage = with_storage;
  return problem;
}

// Telescoped energy recursion, the cyclic end condition, and the commitment
// transition logic -- the invariants every returned solution must satisfy.
inline void check_storage_and_commitment_physics(const GridModel& grid,
                                                 const DispatchSolution& sol,
                                                 std::string* failure) {
  const int T = grid.horizon;
  for (size_t b = 0; b < grid.storage_units.size(); ++b) {
    const auto& su = grid.storage_units[b];
    double e = su.e_initial;
    for (int t = 0; t < T; ++t) {
      e += su.eta_ch * sol.p_ch(static_cast<int>(b), t) -
           sol.p_dis(static_cast<int>(b), t) / su.eta_dis;
      if (std::abs(e - sol.e(static_cast<int>(b), t)) > 1e-6) {
        *failure = "energy recursion violated";
        return;
      }
    }
    if (std::abs(e - su.e_initial) > 1e-6) {
      *failure = "cyclic storage condition violated";
      return;
    }
  }
  for (int n = 0; n < sol.commitment.u.rows(); ++n) {
    int prev = grid.generators[n].initial_on ? 1 : 0;
    for (int t = 0; t < T; ++t) {
      const int u = sol.commitment.u(n, t);
      const int a = sol.commitment.alpha(n, t);
      const int bta = sol.commitment.beta(n, t);
      if (u - prev > a || prev - u > bta || a + bta > 1) {
        *failure = "commitment transition logic violated";
        return;
      }
      prev = u;
    }
  }
}

}  // namespace windgrid::testing
