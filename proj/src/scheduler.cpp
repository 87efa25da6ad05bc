#include "windgrid/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "windgrid/detail/dispatch.hpp"
#include "windgrid/errors.hpp"

namespace windgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kExactBudgetSlots = 20;
constexpr int kBruteForceBudgetSlots = 12;

int prev_state(const GridModel& grid, const Eigen::MatrixXi& u, int n, int t) {
  return t == 0 ? (grid.generators[n].initial_on ? 1 : 0) : u(n, t - 1);
}

void require_problem_shape(const ScheduleProblem& problem) {
  const int W = static_cast<int>(problem.grid.wind_farms.size());
  if (problem.wind_available.rows() != W ||
      problem.wind_available.cols() != problem.grid.horizon)
    throw DimensionMismatch("wind_available must be W x T");
  for (int w = 0; w < W; ++w)
    for (int t = 0; t < problem.grid.horizon; ++t) {
      const double v = problem.wind_available(w, t);
      if (v < 0.0 || v > problem.grid.wind_farms[w].capacity + 1e-9)
        throw InvalidArgument("scenario availability outside [0, capacity]");
    }
}

// Decodes commitment index m into an N x T on/off matrix. Ascending m is
// ascending row-major lexicographic order of u, which makes "first best kept"
// the deterministic tie-break.
Eigen::MatrixXi decode_commitment(std::uint64_t m, int N, int T) {
  Eigen::MatrixXi u(N, T);
  const int slots = N * T;
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < T; ++t)
      u(n, t) = static_cast<int>((m >> (slots - 1 - (n * T + t))) & 1u);
  return u;
}

// Necessary per-hour capability conditions; used only to discard commitments
// that cannot possibly balance.
bool hour_capability_ok(const ScheduleProblem& problem,
                        const Eigen::MatrixXi& u) {
  const GridModel& g = problem.grid;
  double stor_dis = 0.0, stor_ch = 0.0;
  if (problem.with_storage) {
    for (const auto& s : g.storage_units) {
      stor_dis += s.p_max;
      stor_ch += s.p_max;
    }
  }
  for (int t = 0; t < g.horizon; ++t) {
    double demand = 0.0;
    for (const auto& bus : g.buses) demand += bus.demand[t];
    double cap = stor_dis, floor = 0.0;
    for (size_t n = 0; n < g.generators.size(); ++n) {
      if (!u(static_cast<int>(n), t)) continue;
      cap += g.generators[n].p_max;
      floor += g.generators[n].p_min;
    }
    for (int w = 0; w < problem.wind_available.rows(); ++w)
      cap += problem.wind_available(w, t);
    if (cap < demand - 1e-9) return false;
    if (floor > demand + stor_ch + 1e-9) return false;
  }
  return true;
}

double commitment_fixed_cost(const GridModel& grid, const UnitCommitment& uc) {
  double cost = 0.0;
  for (int n = 0; n < uc.u.rows(); ++n)
    for (int t = 0; t < uc.u.cols(); ++t) {
      const auto& gen = grid.generators[n];
      cost += gen.pr_su * uc.alpha(n, t) + gen.pr_sd * uc.beta(n, t);
      cost += gen.c * uc.u(n, t);
    }
  return cost;
}

// Cheap lower bound on the fuel+wind cost of any dispatch: serve what wind
// and storage cannot cover at the cheapest linear rate in the fleet.
double fuel_lower_bound(const ScheduleProblem& problem) {
  const GridModel& g = problem.grid;
  double bmin = kInf;
  for (const auto& gen : g.generators) bmin = std::min(bmin, gen.b);
  if (bmin < 0.0) return -kInf;  // negative linear cost defeats this bound
  bmin = std::max(bmin, 0.0);
  double stor_dis = 0.0;
  if (problem.with_storage)
    for (const auto& s : g.storage_units) stor_dis += s.p_max;
  double lb = 0.0;
  for (int t = 0; t < g.horizon; ++t) {
    double demand = 0.0;
    for (const auto& bus : g.buses) demand += bus.demand[t];
    double wind = 0.0;
    for (int w = 0; w < problem.wind_available.rows(); ++w)
      wind += problem.wind_available(w, t);
    lb += bmin * std::max(0.0, demand - wind - stor_dis);
  }
  return lb;
}

DispatchSolution assemble_solution(const ScheduleProblem& problem,
                                   const UnitCommitment& uc,
                                   const detail::CommitmentDispatch& cd) {
  const GridModel& g = problem.grid;
  const int T = g.horizon;
  const int B = static_cast<int>(g.storage_units.size());

  DispatchSolution sol;
  sol.commitment = uc;
  sol.p = cd.p;
  sol.p_wind = cd.p_wind;
  sol.p_ch = Eigen::MatrixXd::Zero(B, T);
  sol.p_dis = Eigen::MatrixXd::Zero(B, T);
  sol.e = Eigen::MatrixXd::Zero(B, T);
  for (int b = 0; b < B; ++b) {
    double e = g.storage_units[b].e_initial;
    for (int t = 0; t < T; ++t) {
      const double d = cd.d.size() > 0 ? cd.d(b, t) : 0.0;
      const auto& su = g.storage_units[b];
      sol.p_ch(b, t) = detail::charge_power(su, d);
      sol.p_dis(b, t) = detail::discharge_power(su, d);
      e += su.eta_ch * sol.p_ch(b, t) - sol.p_dis(b, t) / su.eta_dis;
      sol.e(b, t) = e;
    }
  }
  sol.costs = evaluate_costs(g, sol);

  Curtailment cur;
  cur.per_hour.assign(T, 0.0);
  for (int t = 0; t < T; ++t)
    for (int w = 0; w < sol.p_wind.rows(); ++w)
      cur.per_hour[t] += problem.wind_available(w, t) - sol.p_wind(w, t);
  sol.curtailment_mwh =
      std::accumulate(cur.per_hour.begin(), cur.per_hour.end(), 0.0);

  if (problem.network_constraints) {
    std::map<int, int> bus_pos;
    for (int i = 0; i < g.bus_count(); ++i) bus_pos[g.buses[i].id] = i;
    Eigen::MatrixXd flows(g.branch_count(), T);
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd inj = Eigen::VectorXd::Zero(g.bus_count());
      for (int i = 0; i < g.bus_count(); ++i) inj(i) -= g.buses[i].demand[t];
      for (size_t n = 0; n < g.generators.size(); ++n)
        inj(bus_pos.at(g.generators[n].bus)) += sol.p(static_cast<int>(n), t);
      for (int w = 0; w < sol.p_wind.rows(); ++w)
        inj(bus_pos.at(g.wind_farms[w].bus)) += sol.p_wind(w, t);
      for (int b = 0; b < B; ++b)
        inj(bus_pos.at(g.storage_units[b].bus)) +=
            sol.p_dis(b, t) - sol.p_ch(b, t);
      inj -= Eigen::VectorXd::Constant(g.bus_count(), inj.sum() / g.bus_count());
      flows.col(t) = dc_power_flow(g, inj);
    }
    sol.flows = flows;
  }
  return sol;
}

}  // namespace

UnitCommitment make_commitment(const GridModel& grid,
                               const Eigen::MatrixXi& u) {
  UnitCommitment uc;
  uc.u = u;
  uc.alpha = Eigen::MatrixXi::Zero(u.rows(), u.cols());
  uc.beta = Eigen::MatrixXi::Zero(u.rows(), u.cols());
  for (int n = 0; n < u.rows(); ++n)
    for (int t = 0; t < u.cols(); ++t) {
      const int prev = prev_state(grid, u, n, t);
      uc.alpha(n, t) = std::max(u(n, t) - prev, 0);
      uc.beta(n, t) = std::max(prev - u(n, t), 0);
    }
  return uc;
}

CostBreakdown evaluate_costs(const GridModel& grid,
                             const DispatchSolution& sol) {
  const int N = static_cast<int>(grid.generators.size());
  const int W = static_cast<int>(grid.wind_farms.size());
  const int B = static_cast<int>(grid.storage_units.size());
  const int T = grid.horizon;
  if (sol.commitment.u.rows() != N || sol.commitment.u.cols() != T ||
      sol.p.rows() != N || sol.p.cols() != T || sol.p_wind.rows() != W ||
      sol.p_wind.cols() != T || sol.p_ch.rows() != B || sol.p_dis.rows() != B)
    throw DimensionMismatch("candidate dimensions do not match grid/horizon");

  CostBreakdown c;
  for (int n = 0; n < N; ++n) {
    const auto& gen = grid.generators[n];
    for (int t = 0; t < T; ++t) {
      c.c_ss += gen.pr_su * sol.commitment.alpha(n, t) +
                gen.pr_sd * sol.commitment.beta(n, t);
      const double p = sol.p(n, t);
      // The constant term is charged only while the unit is on.
      c.c_f += gen.a * p * p + gen.b * p + gen.c * sol.commitment.u(n, t);
    }
  }
  for (int w = 0; w < W; ++w)
    for (int t = 0; t < T; ++t)
      c.c_w += grid.wind_farms[w].lambda_price * sol.p_wind(w, t);
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < T; ++t)
      c.c_b += grid.storage_units[b].s_ch * sol.p_ch(b, t) +
               grid.storage_units[b].s_dis * sol.p_dis(b, t);
  c.objective = c.c_ss + c.c_f + c.c_w + c.c_b;
  return c;
}

std::vector<Violation> check_feasibility(const ScheduleProblem& problem,
                                         const DispatchSolution& sol) {
  const GridModel& g = problem.grid;
  const int N = static_cast<int>(g.generators.size());
  const int W = static_cast<int>(g.wind_farms.size());
  const int B = static_cast<int>(g.storage_units.size());
  const int T = g.horizon;
  std::vector<Violation> v;
  auto flag = [&](const std::string& what, double mag) {
    v.push_back({what, mag});
  };

  // (i) commitment transition logic
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < T; ++t) {
      const int prev = prev_state(g, sol.commitment.u, n, t);
      const int up = sol.commitment.u(n, t) - prev;
      if (up > sol.commitment.alpha(n, t))
        flag("start-up flag missing for generator " + std::to_string(n) +
                 " hour " + std::to_string(t),
             up - sol.commitment.alpha(n, t));
      if (-up > sol.commitment.beta(n, t))
        flag("shutdown flag missing for generator " + std::to_string(n) +
                 " hour " + std::to_string(t),
             -up - sol.commitment.beta(n, t));
      if (sol.commitment.alpha(n, t) + sol.commitment.beta(n, t) > 1)
        flag("simultaneous start-up and shutdown, generator " +
                 std::to_string(n) + " hour " + std::to_string(t),
             1.0);
    }

  // (ii) generator output bounds
  for (int n = 0; n < N; ++n)
    for (int t = 0; t < T; ++t) {
      const auto& gen = g.generators[n];
      const double lopass = gen.p_min * sol.commitment.u(n, t) - 1e-9;
      const double hipass = gen.p_max * sol.commitment.u(n, t) + 1e-9;
      if (sol.p(n, t) < lopass || sol.p(n, t) > hipass)
        flag("generator " + std::to_string(n) + " output out of bounds, hour " +
                 std::to_string(t),
             sol.p(n, t));
    }

  // (iii) wind dispatch within availability
  for (int w = 0; w < W; ++w)
    for (int t = 0; t < T; ++t)
      if (sol.p_wind(w, t) < -1e-9 ||
          sol.p_wind(w, t) > problem.wind_available(w, t) + 1e-9)
        flag("wind farm " + std::to_string(w) +
                 " dispatch outside availability, hour " + std::to_string(t),
             sol.p_wind(w, t));

  // (iv)-(vi) storage power/energy bounds, recursion, cyclic condition
  for (int b = 0; b < B; ++b) {
    const auto& su = g.storage_units[b];
    double e = su.e_initial;
    for (int t = 0; t < T; ++t) {
      const double ch = sol.p_ch(b, t), dis = sol.p_dis(b, t);
      if (ch < su.p_min - 1e-9 || ch > su.p_max + 1e-9)
        flag("storage " + std::to_string(b) + " charge power out of bounds",
             ch);
      if (dis < su.p_min - 1e-9 || dis > su.p_max + 1e-9)
        flag("storage " + std::to_string(b) + " discharge power out of bounds",
             dis);
      e += su.eta_ch * ch - dis / su.eta_dis;
      const double diff = std::abs(sol.e(b, t) - e);
      if (diff > 1e-9 * (1.0 + std::abs(e)))
        flag("storage " + std::to_string(b) + " energy recursion broken, hour " +
                 std::to_string(t),
             diff);
      e = sol.e(b, t);
      if (e < su.e_min - 1e-9 || e > su.e_max + 1e-9)
        flag("storage " + std::to_string(b) + " energy out of bounds, hour " +
                 std::to_string(t),
             e);
    }
    if (std::abs(e - su.e_initial) > 1e-6)
      flag("storage " + std::to_string(b) + " cyclic condition broken",
           e - su.e_initial);
  }

  // (vii) hourly system balance
  for (int t = 0; t < T; ++t) {
    double supply = sol.p.col(t).sum();
    if (W > 0) supply += sol.p_wind.col(t).sum();
    for (int b = 0; b < B; ++b) supply += sol.p_dis(b, t) - sol.p_ch(b, t);
    double demand = 0.0;
    for (const auto& bus : g.buses) demand += bus.demand[t];
    if (std::abs(supply - demand) > 1e-6)
      flag("hourly balance broken at hour " + std::to_string(t),
           supply - demand);
  }

  // (viii) line limits
  if (problem.network_constraints) {
    std::map<int, int> bus_pos;
    for (int i = 0; i < g.bus_count(); ++i) bus_pos[g.buses[i].id] = i;
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd inj = Eigen::VectorXd::Zero(g.bus_count());
      for (int i = 0; i < g.bus_count(); ++i) inj(i) -= g.buses[i].demand[t];
      for (int n = 0; n < N; ++n)
        inj(bus_pos.at(g.generators[n].bus)) += sol.p(n, t);
      for (int w = 0; w < W; ++w)
        inj(bus_pos.at(g.wind_farms[w].bus)) += sol.p_wind(w, t);
      for (int b = 0; b < B; ++b)
        inj(bus_pos.at(g.storage_units[b].bus)) +=
            sol.p_dis(b, t) - sol.p_ch(b, t);
      if (std::abs(inj.sum()) > 1e-6) continue;  // already flagged by (vii)
      inj -= Eigen::VectorXd::Constant(g.bus_count(),
                                       inj.sum() / g.bus_count());
      const Eigen::VectorXd flows = dc_power_flow(g, inj);
      for (int l = 0; l < flows.size(); ++l)
        if (std::abs(flows(l)) > g.branches[l].flow_limit + 1e-6)
          flag("line " + std::to_string(g.branches[l].id) +
                   " overloaded at hour " + std::to_string(t),
               std::abs(flows(l)) - g.branches[l].flow_limit);
    }
  }
  return v;
}

namespace {

DispatchSolution solve_exact(const ScheduleProblem& problem) {
  const GridModel& g = problem.grid;
  const int N = static_cast<int>(g.generators.size());
  const int T = g.horizon;
  const int slots = N * T;
  if (slots > kExactBudgetSlots)
    throw BudgetExceeded("exact solver limited to " +
                         std::to_string(kExactBudgetSlots) +
                         " commitment slots, got " + std::to_string(slots));

  const double fuel_lb = fuel_lower_bound(problem);
  double best = kInf;
  std::optional<DispatchSolution> best_sol;
  for (std::uint64_t m = 0; m < (1ull << slots); ++m) {
    const Eigen::MatrixXi u = decode_commitment(m, N, T);
    if (!hour_capability_ok(problem, u)) continue;
    const UnitCommitment uc = make_commitment(g, u);
    const double fixed = commitment_fixed_cost(g, uc);
    if (fixed + fuel_lb >= best - 1e-9) continue;
    const auto cd = detail::solve_commitment_dispatch(problem, u);
    if (!cd.feasible) continue;
    const double total = fixed + cd.variable_cost;
    if (total < best - 1e-9) {
      best = total;
      best_sol = assemble_solution(problem, uc, cd);
    }
  }
  if (!best_sol)
    throw Infeasible("no commitment can serve the demand profile");
  return *best_sol;
}

DispatchSolution solve_heuristic(const ScheduleProblem& problem) {
  const GridModel& g = problem.grid;
  const int N = static_cast<int>(g.generators.size());
  const int T = g.horizon;

  // Merit order by average cost at full output.
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& gx = g.generators[x];
    const auto& gy = g.generators[y];
    const double cx =
        gx.p_max > 0 ? (gx.a * gx.p_max * gx.p_max + gx.b * gx.p_max + gx.c) /
                           gx.p_max
                     : kInf;
    const double cy =
        gy.p_max > 0 ? (gy.a * gy.p_max * gy.p_max + gy.b * gy.p_max + gy.c) /
                           gy.p_max
                     : kInf;
    if (cx != cy) return cx < cy;
    return x < y;
  });

  Eigen::MatrixXi u = Eigen::MatrixXi::Zero(N, T);
  for (int t = 0; t < T; ++t) {
    double demand = 0.0;
    for (const auto& bus : g.buses) demand += bus.demand[t];
    double cap = 0.0;
    for (int n : order) {
      if (cap >= demand) break;
      u(n, t) = 1;
      cap += g.generators[n].p_max;
    }
  }

  auto attempt = [&](const Eigen::MatrixXi& uu)
      -> std::optional<std::pair<double, detail::CommitmentDispatch>> {
    if (!hour_capability_ok(problem, uu)) return std::nullopt;
    const auto cd = detail::solve_commitment_dispatch(problem, uu);
    if (!cd.feasible) return std::nullopt;
    const double total =
        commitment_fixed_cost(g, make_commitment(g, uu)) + cd.variable_cost;
    return std::make_pair(total, cd);
  };

  auto cur = attempt(u);
  if (!cur) {
    u.setOnes();
    cur = attempt(u);
  }
  if (!cur) throw Infeasible("heuristic found no feasible commitment");

  // Single-swap local search over commitment bits.
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (int n = 0; n < N; ++n)
      for (int t = 0; t < T; ++t) {
        Eigen::MatrixXi trial = u;
        trial(n, t) = 1 - trial(n, t);
        const auto res = attempt(trial);
        if (res && res->first < cur->first - 1e-9) {
          u = trial;
          cur = res;
          improved = true;
        }
      }
    if (!improved) break;
  }
  return assemble_solution(problem, make_commitment(g, u), cur->second);
}

// ---------------------------------------------------------------------------
// Brute-force oracle: exhaustive commitments, refined grid-search dispatch.
// Kept free of the production dispatch machinery.
// ---------------------------------------------------------------------------

struct OracleUnit {
  double a, b, p_min, p_max;
  int bus;
};

struct OracleHour {
  std::vector<OracleUnit> units;
  double demand = 0.0;
  Eigen::VectorXd base_flow;   // network only
  Eigen::MatrixXd unit_cols;   // network only
};

constexpr double kOracleStep = 1e-5;

// Coarse-to-fine Cartesian search. `eval` returns +inf when infeasible;
// `snaps(k, prefix_sum)` supplies candidate values for dimension k that
// depend on the already-fixed dimensions.
template <typename Eval, typename Snaps>
double refine_search(std::vector<std::pair<double, double>> ranges, Eval eval,
                     Snaps snaps, std::vector<double>* best_point) {
  const int dims = static_cast<int>(ranges.size());
  std::vector<double> point(dims, 0.0);
  if (dims == 0) {
    const double val = eval(point);
    if (best_point) *best_point = point;
    return val;
  }
  double best = kInf;
  std::vector<double> best_pt(dims, 0.0);
  bool have_best = false;
  const std::vector<std::pair<double, double>> orig = ranges;

  constexpr int kPoints = 9;
  for (int level = 0; level < 120; ++level) {
    std::vector<double> cand_best(dims, 0.0);
    double level_best = kInf;

    std::function<void(int, double)> recurse = [&](int k, double prefix) {
      const auto [lo, hi] = ranges[k];
      std::vector<double> cands;
      for (int i = 0; i < kPoints; ++i)
        cands.push_back(lo + (hi - lo) * i / (kPoints - 1));
      for (double s : snaps(k, prefix))
        if (s >= lo - 1e-12 && s <= hi + 1e-12)
          cands.push_back(std::clamp(s, lo, hi));
      if (have_best)
        cands.push_back(std::clamp(best_pt[k], lo, hi));
      for (double c : cands) {
        point[k] = c;
        if (k + 1 < dims) {
          recurse(k + 1, prefix + c);
        } else {
          const double val = eval(point);
          if (val < level_best) {
            level_best = val;
            cand_best = point;
          }
        }
      }
    };
    recurse(0, 0.0);

    if (level_best < best) {
      best = level_best;
      best_pt = cand_best;
      have_best = true;
    }
    double max_cell = 0.0;
    for (const auto& [lo, hi] : ranges)
      max_cell = std::max(max_cell, (hi - lo) / (kPoints - 1));
    if (max_cell <= kOracleStep && level >= 1) break;
    if (!have_best) break;  // nothing feasible at the coarse level
    for (int k = 0; k < dims; ++k) {
      auto& [lo, hi] = ranges[k];
      const double width = hi - lo;
      const double cell = width / (kPoints - 1);
      const auto [olo, ohi] = orig[k];
      // When the incumbent sits at the window edge the optimum may lie
      // outside: pan the window (same width) instead of shrinking, so the
      // search can travel across the original range.
      if (best_pt[k] <= lo + cell + 1e-12 && lo > olo + 1e-12) {
        lo = std::max(olo, best_pt[k] - width / 2.0);
        hi = std::min(ohi, lo + width);
      } else if (best_pt[k] >= hi - cell - 1e-12 && hi < ohi - 1e-12) {
        hi = std::min(ohi, best_pt[k] + width / 2.0);
        lo = std::max(olo, hi - width);
      } else {
        const double half = std::max(1.5 * cell, 0.5 * kOracleStep);
        lo = std::max(lo, best_pt[k] - half);
        hi = std::min(hi, best_pt[k] + half);
      }
    }
  }
  if (best_point) *best_point = best_pt;
  return best;
}

// Minimum fuel+wind cost of one hour at net load R; the last unit absorbs
// the residual so the balance holds exactly at every evaluated point.
double oracle_hour_cost(const OracleHour& hour, double R, bool network,
                        const std::vector<double>& caps,
                        std::vector<double>* out_y) {
  const int m = static_cast<int>(hour.units.size());
  auto point_cost = [&](const std::vector<double>& y) {
    double cost = 0.0;
    for (int i = 0; i < m; ++i) {
      if (y[i] < hour.units[i].p_min - 1e-9 ||
          y[i] > hour.units[i].p_max + 1e-9)
        return kInf;
      cost += hour.units[i].a * y[i] * y[i] + hour.units[i].b * y[i];
    }
    if (network) {
      Eigen::VectorXd f = hour.base_flow;
      for (int i = 0; i < m; ++i) f += hour.unit_cols.col(i) * y[i];
      for (int l = 0; l < f.size(); ++l)
        if (std::abs(f(l)) > caps[l] + 1e-6) return kInf;
    }
    return cost;
  };

  if (m == 0) {
    if (std::abs(R) > 1e-6) return kInf;
    if (out_y) out_y->clear();
    return network ? point_cost({}) : 0.0;
  }

  std::vector<std::pair<double, double>> ranges;
  for (int i = 0; i + 1 < m; ++i)
    ranges.emplace_back(hour.units[i].p_min, hour.units[i].p_max);

  std::vector<double> full(m, 0.0);
  auto eval = [&](const std::vector<double>& frees) {
    double sum = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
      full[i] = frees[i];
      sum += frees[i];
    }
    full[m - 1] = R - sum;
    return point_cost(full);
  };
  auto snaps = [&](int k, double prefix) {
    std::vector<double> s;
    // Candidates putting every later unit (including the dependent one)
    // exactly at a bound: optima often sit on such corners, off any grid.
    if (m - 1 - k <= 6) {
      std::vector<double> sums{0.0};
      for (int j = k + 1; j < m; ++j) {
        std::vector<double> next;
        next.reserve(2 * sums.size());
        for (double partial : sums) {
          next.push_back(partial + hour.units[j].p_min);
          next.push_back(partial + hour.units[j].p_max);
        }
        sums.swap(next);
      }
      for (double partial : sums) s.push_back(R - prefix - partial);
    }
    return s;
  };

  std::vector<double> best_frees;
  const double cost = refine_search(ranges, eval, snaps, &best_frees);
  if (out_y && cost < kInf) {
    double sum = 0.0;
    out_y->assign(m, 0.0);
    for (int i = 0; i + 1 < m; ++i) {
      (*out_y)[i] = best_frees[i];
      sum += best_frees[i];
    }
    (*out_y)[m - 1] = R - sum;
  }
  return cost;
}

struct OracleDispatch {
  double variable_cost = kInf;
  Eigen::MatrixXd p, p_wind, d;
};

OracleDispatch oracle_dispatch(const ScheduleProblem& problem,
                               const Eigen::MatrixXi& u,
                               const Eigen::MatrixXd& ptdf) {
  const GridModel& g = problem.grid;
  const int T = g.horizon;
  const int W = static_cast<int>(g.wind_farms.size());
  const bool network = problem.network_constraints;
  const int nb =
      problem.with_storage ? static_cast<int>(g.storage_units.size()) : 0;
  if (nb > 1)
    throw BudgetExceeded("brute-force oracle handles at most one storage unit");

  std::map<int, int> bus_pos;
  for (int i = 0; i < g.bus_count(); ++i) bus_pos[g.buses[i].id] = i;
  std::vector<double> caps;
  for (const auto& br : g.branches) caps.push_back(br.flow_limit);

  std::vector<OracleHour> hours(T);
  for (int t = 0; t < T; ++t) {
    OracleHour& hr = hours[t];
    for (size_t n = 0; n < g.generators.size(); ++n) {
      if (!u(static_cast<int>(n), t)) continue;
      const auto& gen = g.generators[n];
      hr.units.push_back(
          {gen.a, gen.b, gen.p_min, gen.p_max, bus_pos.at(gen.bus)});
    }
    for (int w = 0; w < W; ++w)
      hr.units.push_back({0.0, g.wind_farms[w].lambda_price, 0.0,
                          problem.wind_available(w, t),
                          bus_pos.at(g.wind_farms[w].bus)});
    for (const auto& bus : g.buses) hr.demand += bus.demand[t];
    if (network) {
      Eigen::VectorXd inj = Eigen::VectorXd::Zero(g.bus_count());
      for (int i = 0; i < g.bus_count(); ++i) inj(i) -= g.buses[i].demand[t];
      hr.base_flow = ptdf * inj;
      hr.unit_cols.resize(ptdf.rows(), hr.units.size());
      for (size_t i = 0; i < hr.units.size(); ++i)
        hr.unit_cols.col(static_cast<int>(i)) = ptdf.col(hr.units[i].bus);
    }
  }

  OracleDispatch out;
  out.p = Eigen::MatrixXd::Zero(g.generators.size(), T);
  out.p_wind = Eigen::MatrixXd::Zero(W, T);
  out.d = Eigen::MatrixXd::Zero(g.storage_units.size(), T);

  auto hour_cost_at = [&](int t, double storage_out,
                          std::vector<double>* y) -> double {
    OracleHour hr = hours[t];
    if (network && nb == 1 && storage_out != 0.0)
      hr.base_flow += ptdf.col(bus_pos.at(g.storage_units[0].bus)) *
                      storage_out;
    return oracle_hour_cost(hr, hr.demand - storage_out, network, caps, y);
  };

  auto fill_solution = [&](const std::vector<double>& dvec) {
    for (int t = 0; t < T; ++t) {
      const double d = nb == 1 ? dvec[t] : 0.0;
      const double s =
          nb == 1 ? detail::storage_net_output(g.storage_units[0], d) : 0.0;
      std::vector<double> y;
      hour_cost_at(t, s, &y);
      int idx = 0;
      for (size_t n = 0; n < g.generators.size(); ++n)
        if (u(static_cast<int>(n), t))
          out.p(static_cast<int>(n), t) = y[idx++];
      for (int w = 0; w < W; ++w) out.p_wind(w, t) = y[idx++];
      if (nb == 1) out.d(0, t) = d;
    }
  };

  if (nb == 0) {
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
      const double c = hour_cost_at(t, 0.0, nullptr);
      if (c == kInf) return out;
      total += c;
    }
    out.variable_cost = total;
    fill_solution({});
    return out;
  }

  const StorageUnit& su = g.storage_units[0];
  std::vector<std::pair<double, double>> ranges(
      T - 1, {detail::delta_min(su), detail::delta_max(su)});

  std::vector<double> dvec(T, 0.0);
  auto eval = [&](const std::vector<double>& frees) {
    double sum = 0.0;
    for (int t = 0; t + 1 < T; ++t) {
      dvec[t] = frees[t];
      sum += frees[t];
    }
    dvec[T - 1] = -sum;
    if (dvec[T - 1] < detail::delta_min(su) - 1e-9 ||
        dvec[T - 1] > detail::delta_max(su) + 1e-9)
      return kInf;
    double e = su.e_initial, total = 0.0;
    for (int t = 0; t < T; ++t) {
      e += dvec[t];
      if (e < su.e_min - 1e-9 || e > su.e_max + 1e-9) return kInf;
    }
    for (int t = 0; t < T; ++t) {
      const double s = detail::storage_net_output(su, dvec[t]);
      const double c = hour_cost_at(t, s, nullptr);
      if (c == kInf) return kInf;
      total += c + detail::storage_use_cost(su, dvec[t]);
    }
    return total;
  };
  auto snaps = [&](int k, double prefix) {
    std::vector<double> s{0.0, detail::delta_min(su), detail::delta_max(su),
                          su.e_min - (su.e_initial + prefix),
                          su.e_max - (su.e_initial + prefix)};
    if (k == T - 2) {
      s.push_back(-prefix - detail::delta_min(su));
      s.push_back(-prefix - detail::delta_max(su));
      s.push_back(-prefix);  // dependent delta exactly zero
    }
    return s;
  };

  std::vector<double> best_frees;
  const double cost = refine_search(ranges, eval, snaps, &best_frees);
  if (cost == kInf) return out;
  double storage_cost = 0.0;
  {
    double sum = 0.0;
    for (int t = 0; t + 1 < T; ++t) {
      dvec[t] = best_frees[t];
      sum += best_frees[t];
    }
    dvec[T - 1] = -sum;
    for (int t = 0; t < T; ++t)
      storage_cost += detail::storage_use_cost(su, dvec[t]);
  }
  out.variable_cost = cost;
  fill_solution(dvec);
  return out;
}

}  // namespace

DispatchSolution solve_schedule(const ScheduleProblem& problem) {
  problem.grid.validate();
  require_problem_shape(problem);
  return problem.solver == SolverKind::Exact ? solve_exact(problem)
                                             : solve_heuristic(problem);
}

DispatchSolution brute_force_schedule(const ScheduleProblem& problem) {
  problem.grid.validate();
  require_problem_shape(problem);
  const GridModel& g = problem.grid;
  const int N = static_cast<int>(g.generators.size());
  const int T = g.horizon;
  const int slots = N * T;
  if (slots > kBruteForceBudgetSlots)
    throw BudgetExceeded("brute-force oracle limited to " +
                         std::to_string(kBruteForceBudgetSlots) +
                         " commitment slots, got " + std::to_string(slots));

  Eigen::MatrixXd ptdf;
  if (problem.network_constraints) ptdf = power_transfer_matrix(g);

  double best = kInf;
  std::optional<DispatchSolution> best_sol;
  for (std::uint64_t m = 0; m < (1ull << slots); ++m) {
    const Eigen::MatrixXi u = decode_commitment(m, N, T);
    if (!hour_capability_ok(problem, u)) continue;
    const UnitCommitment uc = make_commitment(g, u);
    const auto od = oracle_dispatch(problem, u, ptdf);
    if (od.variable_cost == kInf) continue;
    const double total = commitment_fixed_cost(g, uc) + od.variable_cost;
    if (total < best - 1e-9) {
      best = total;
      detail::CommitmentDispatch cd;
      cd.feasible = true;
      cd.p = od.p;
      cd.p_wind = od.p_wind;
      cd.d = od.d;
      cd.variable_cost = od.variable_cost;
      best_sol = assemble_solution(problem, uc, cd);
    }
  }
  if (!best_sol)
    throw Infeasible("no commitment can serve the demand profile");
  return *best_sol;
}

Curtailment compute_curtailment(const ScheduleProblem& problem,
                                const DispatchSolution& sol) {
  const int T = problem.grid.horizon;
  Curtailment cur;
  cur.per_hour.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int w = 0; w < sol.p_wind.rows(); ++w) {
      const double c = problem.wind_available(w, t) - sol.p_wind(w, t);
      if (c < -1e-9)
        throw NegativeCurtailment("wind dispatch exceeds availability at hour " +
                                  std::to_string(t));
      cur.per_hour[t] += std::max(c, 0.0);
    }
    cur.total_mwh += cur.per_hour[t];
  }
  return cur;
}

Eigen::MatrixXd scenario_wind_matrix(const GridModel& grid,
                                     const ScenarioSet& scenarios, int s) {
  if (s < 0 || s >= scenarios.count())
    throw InvalidArgument("scenario index out of range");
  const int W = static_cast<int>(grid.wind_farms.size());
  // Single-farm scenario series are replicated across farms.
  Eigen::MatrixXd wind(W, grid.horizon);
  for (int w = 0; w < W; ++w)
    for (int t = 0; t < grid.horizon; ++t)
      wind(w, t) = std::min(scenarios.scenarios(s, t % scenarios.horizon()),
                            grid.wind_farms[w].capacity);
  return wind;
}

BatchResult stochastic_batch(const GridModel& grid,
                             const ScenarioSet& scenarios, bool with_storage,
                             bool network_constraints, SolverKind solver) {
  const int S = scenarios.count();
  BatchResult out;
  out.solutions.resize(S);
  out.failures.resize(S);

  std::vector<double> objectives;
  for (int s = 0; s < S; ++s) {
    ScheduleProblem problem;
    problem.grid = grid;
    problem.with_storage = with_storage;
    problem.network_constraints = network_constraints;
    problem.solver = solver;
    problem.wind_available = scenario_wind_matrix(grid, scenarios, s);
    try {
      out.solutions[s] = solve_schedule(problem);
      objectives.push_back(out.solutions[s]->costs.objective);
    } catch (const Error& e) {
      out.failures[s] = e.what();
    }
  }

  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const size_t i = static_cast<size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
  };

  BatchStats& st = out.stats;
  st.solved = static_cast<int>(objectives.size());
  st.failed = S - st.solved;
  if (!objectives.empty()) {
    st.mean = std::accumulate(objectives.begin(), objectives.end(), 0.0) /
              static_cast<double>(objectives.size());
    st.median = quantile(objectives, 0.5);
    st.q25 = quantile(objectives, 0.25);
    st.q75 = quantile(objectives, 0.75);
    st.min = *std::min_element(objectives.begin(), objectives.end());
    st.max = *std::max_element(objectives.begin(), objectives.end());
  }
  return out;
}

}  // namespace windgrid
