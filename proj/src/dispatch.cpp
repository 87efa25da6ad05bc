#include "windgrid/detail/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "windgrid/errors.hpp"

namespace windgrid::detail {

namespace {

// Slope of the convex extension used when an hour's net load falls outside
// the committed capability; must dominate any realistic marginal cost.
constexpr double kBalanceSlope = 1e7;
constexpr double kFlowTol = 1e-6;

double marginal(const HourUnit& un, double p) { return un.b + 2.0 * un.a * p; }

// Sum of box-clamped unit outputs at marginal price mu. For a == 0 units the
// upper branch is taken at mu >= b, which makes the map right-continuous.
double total_at_price(const std::vector<HourUnit>& units, double mu) {
  double s = 0.0;
  for (const auto& un : units) {
    if (un.a > 0.0)
      s += std::clamp((mu - un.b) / (2.0 * un.a), un.p_min, un.p_max);
    else
      s += (mu >= un.b) ? un.p_max : un.p_min;
  }
  return s;
}

}  // namespace

bool economic_dispatch(const std::vector<HourUnit>& units, double target,
                       std::vector<double>& out, double* cost) {
  out.assign(units.size(), 0.0);
  double sum_min = 0.0, sum_max = 0.0;
  for (const auto& un : units) {
    sum_min += un.p_min;
    sum_max += un.p_max;
  }
  if (target < sum_min - 1e-9 || target > sum_max + 1e-9) return false;
  target = std::clamp(target, sum_min, sum_max);

  if (units.empty()) {
    if (cost) *cost = 0.0;
    return true;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& un : units) {
    lo = std::min(lo, marginal(un, un.p_min));
    hi = std::max(hi, marginal(un, un.p_max));
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_at_price(units, mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  const double mu = hi;

  // Assign the continuous part, leave plateau units (a == 0 with b at the
  // clearing price) at their minimum, then fill them in order.
  const double price_tol = 1e-7 * (1.0 + std::abs(mu));
  double assigned = 0.0;
  std::vector<size_t> plateau;
  for (size_t i = 0; i < units.size(); ++i) {
    const auto& un = units[i];
    if (un.a > 0.0) {
      out[i] = std::clamp((mu - un.b) / (2.0 * un.a), un.p_min, un.p_max);
    } else if (un.b < mu - price_tol) {
      out[i] = un.p_max;
    } else if (un.b > mu + price_tol) {
      out[i] = un.p_min;
    } else {
      out[i] = un.p_min;
      plateau.push_back(i);
    }
    assigned += out[i];
  }
  double residual = target - assigned;
  for (size_t i : plateau) {
    const double add =
        std::clamp(residual, 0.0, units[i].p_max - units[i].p_min);
    out[i] += add;
    residual -= add;
  }
  if (std::abs(residual) > 1e-7) {
    // Bisection landed a hair off a breakpoint; absorb into any headroom.
    for (size_t i = 0; i < units.size() && std::abs(residual) > 1e-12; ++i) {
      const double room = residual > 0.0 ? units[i].p_max - out[i]
                                         : units[i].p_min - out[i];
      const double add = residual > 0.0 ? std::min(residual, room)
                                        : std::max(residual, room);
      out[i] += add;
      residual -= add;
    }
  }
  if (cost) {
    double c = 0.0;
    for (size_t i = 0; i < units.size(); ++i)
      c += units[i].a * out[i] * out[i] + units[i].b * out[i];
    *cost = c;
  }
  return true;
}

namespace {

struct HourProblem {
  std::vector<HourUnit> units;   // committed thermal, then wind farms
  std::vector<int> gen_rows;     // generator row per thermal unit
  std::vector<int> wind_rows;    // wind farm row per wind unit
  double demand = 0.0;           // total system demand this hour
  Eigen::VectorXd base_flow;     // network mode: PTDF * (-demand per bus)
  Eigen::MatrixXd unit_cols;     // network mode: L x m flow sensitivities
  Eigen::MatrixXd storage_cols;  // network mode: L x B_storage
};

struct HourSolution {
  double cost = 0.0;          // fuel + wind + penalty + balance extension
  double balance_gap = 0.0;   // MW outside the committed capability
  double flow_violation = 0.0;
  std::vector<double> y;
  Eigen::VectorXd flows;
};

double penalty_term(const Eigen::VectorXd& flows,
                    const std::vector<double>& caps, double w,
                    double* max_violation) {
  double pen = 0.0, mv = 0.0;
  for (int l = 0; l < flows.size(); ++l) {
    const double v = std::abs(flows(l)) - caps[l];
    if (v > 0.0) {
      pen += v * v;
      mv = std::max(mv, v);
    }
  }
  if (max_violation) *max_violation = mv;
  return w * pen;
}

// Projection of z onto {sum(y) = target} intersected with the unit boxes.
void project_simplex_box(const std::vector<HourUnit>& units,
                         const Eigen::VectorXd& z, double target,
                         Eigen::VectorXd& y) {
  const int m = static_cast<int>(units.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    lo = std::min(lo, z(i) - units[i].p_max);
    hi = std::max(hi, z(i) - units[i].p_min);
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200; ++it) {
    const double nu = 0.5 * (lo + hi);
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      s += std::clamp(z(i) - nu, units[i].p_min, units[i].p_max);
    if (s >= target)
      lo = nu;
    else
      hi = nu;
  }
  const double nu = lo;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    y(i) = std::clamp(z(i) - nu, units[i].p_min, units[i].p_max);
    s += y(i);
  }
  double residual = target - s;
  for (int i = 0; i < m && std::abs(residual) > 1e-12; ++i) {
    const double room =
        residual > 0.0 ? units[i].p_max - y(i) : units[i].p_min - y(i);
    const double add = residual > 0.0 ? std::min(residual, room)
                                      : std::max(residual, room);
    y(i) += add;
    residual -= add;
  }
}

class CommitmentSolver {
 public:
  CommitmentSolver(const ScheduleProblem& problem, const Eigen::MatrixXi& u)
      : prob_(problem), u_(u) {
    const GridModel& g = prob_.grid;
    T_ = g.horizon;
    nb_storage_ = prob_.with_storage
                      ? static_cast<int>(g.storage_units.size())
                      : 0;
    if (prob_.network_constraints) {
      ptdf_ = power_transfer_matrix(g);
      caps_.reserve(g.branches.size());
      for (const auto& br : g.branches) caps_.push_back(br.flow_limit);
    }
    build_hours();
    d_ = Eigen::MatrixXd::Zero(std::max(nb_storage_, 1), T_);
    warm_.resize(T_);
    hour_cache_.assign(T_, HourSolution{});
  }

  CommitmentDispatch run() {
    penalty_w_ = prob_.network_constraints ? 100.0 : 0.0;
    for (int round = 0;; ++round) {
      refresh_all_hours();
      if (nb_storage_ > 0) descend_storage();
      if (!prob_.network_constraints) break;
      const double mv = max_flow_violation();
      if (mv < kFlowTol || penalty_w_ > 1e13) break;
      penalty_w_ *= 2.0;
    }
    return finalize();
  }

 private:
  void build_hours() {
    const GridModel& g = prob_.grid;
    const int W = static_cast<int>(g.wind_farms.size());
    std::map<int, int> bus_pos;
    for (int i = 0; i < g.bus_count(); ++i) bus_pos[g.buses[i].id] = i;

    hours_.resize(T_);
    for (int t = 0; t < T_; ++t) {
      HourProblem& hp = hours_[t];
      for (size_t n = 0; n < g.generators.size(); ++n) {
        if (!u_(static_cast<int>(n), t)) continue;
        const auto& gen = g.generators[n];
        hp.units.push_back(
            {gen.a, gen.b, gen.p_min, gen.p_max, bus_pos.at(gen.bus)});
        hp.gen_rows.push_back(static_cast<int>(n));
      }
      for (int w = 0; w < W; ++w) {
        const auto& wf = g.wind_farms[w];
        hp.units.push_back({0.0, wf.lambda_price, 0.0,
                            prob_.wind_available(w, t), bus_pos.at(wf.bus)});
        hp.wind_rows.push_back(w);
      }
      double dem = 0.0;
      for (const auto& bus : g.buses) dem += bus.demand[t];
      hp.demand = dem;

      if (prob_.network_constraints) {
        Eigen::VectorXd inj = Eigen::VectorXd::Zero(g.bus_count());
        for (int i = 0; i < g.bus_count(); ++i) inj(i) -= g.buses[i].demand[t];
        hp.base_flow = ptdf_ * inj;
        hp.unit_cols.resize(ptdf_.rows(), hp.units.size());
        for (size_t i = 0; i < hp.units.size(); ++i)
          hp.unit_cols.col(static_cast<int>(i)) = ptdf_.col(hp.units[i].bus);
        hp.storage_cols.resize(ptdf_.rows(), std::max(nb_storage_, 1));
        hp.storage_cols.setZero();
        for (int b = 0; b < nb_storage_; ++b)
          hp.storage_cols.col(b) =
              ptdf_.col(bus_pos.at(g.storage_units[b].bus));
      }
    }
  }

  // Net grid output of each storage unit at hour t for a given delta column.
  Eigen::VectorXd storage_outputs(const Eigen::VectorXd& dcol) const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(std::max(nb_storage_, 1));
    for (int b = 0; b < nb_storage_; ++b)
      s(b) = storage_net_output(prob_.grid.storage_units[b], dcol(b));
    return s;
  }

  HourSolution solve_hour(int t, const Eigen::VectorXd& s_storage) {
    const HourProblem& hp = hours_[t];
    const int m = static_cast<int>(hp.units.size());
    double target = hp.demand - s_storage.head(std::max(nb_storage_, 1)).sum();

    double sum_min = 0.0, sum_max = 0.0;
    for (const auto& un : hp.units) {
      sum_min += un.p_min;
      sum_max += un.p_max;
    }
    HourSolution sol;
    const double clamped = std::clamp(target, sum_min, sum_max);
    sol.balance_gap = std::abs(target - clamped);

    if (!prob_.network_constraints) {
      double cost = 0.0;
      economic_dispatch(hp.units, clamped, sol.y, &cost);
      sol.cost = cost + kBalanceSlope * sol.balance_gap;
      return sol;
    }

    // Network mode: projected gradient on the penalized objective.
    Eigen::VectorXd fixed_flow = hp.base_flow;
    for (int b = 0; b < nb_storage_; ++b)
      fixed_flow += hp.storage_cols.col(b) * s_storage(b);

    Eigen::VectorXd y(m);
    if (warm_[t].size() == static_cast<Eigen::Index>(m)) {
      y = warm_[t];
      project_simplex_box(hp.units, y, clamped, y);
    } else {
      std::vector<double> y0;
      economic_dispatch(hp.units, clamped, y0, nullptr);
      for (int i = 0; i < m; ++i) y(i) = y0[i];
    }

    auto objective = [&](const Eigen::VectorXd& yy, Eigen::VectorXd* flows) {
      Eigen::VectorXd f = fixed_flow + hp.unit_cols * yy;
      double cost = 0.0;
      for (int i = 0; i < m; ++i)
        cost += hp.units[i].a * yy(i) * yy(i) + hp.units[i].b * yy(i);
      cost += penalty_term(f, caps_, penalty_w_, nullptr);
      if (flows) *flows = std::move(f);
      return cost;
    };

    double fy = objective(y, nullptr);
    double step = 1.0;
    Eigen::VectorXd grad(m), yc(m);
    for (int it = 0; it < 4000 && m > 0; ++it) {
      Eigen::VectorXd f = fixed_flow + hp.unit_cols * y;
      for (int i = 0; i < m; ++i)
        grad(i) = hp.units[i].b + 2.0 * hp.units[i].a * y(i);
      for (int l = 0; l < f.size(); ++l) {
        const double v = std::abs(f(l)) - caps_[l];
        if (v > 0.0) {
          const double coef =
              2.0 * penalty_w_ * v * (f(l) > 0.0 ? 1.0 : -1.0);
          grad += coef * hp.unit_cols.row(l).transpose();
        }
      }
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        project_simplex_box(hp.units, y - step * grad, clamped, yc);
        const Eigen::VectorXd dy = yc - y;
        const double fc = objective(yc, nullptr);
        if (fc <= fy + grad.dot(dy) + dy.squaredNorm() / (2.0 * step) + 1e-14) {
          const double shift = dy.lpNorm<Eigen::Infinity>();
          y = yc;
          fy = fc;
          moved = shift > 1e-11 * (1.0 + y.lpNorm<Eigen::Infinity>());
          step = std::min(step * 1.5, 1e6);
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (!moved) break;
    }

    warm_[t] = y;
    sol.y.assign(m, 0.0);
    for (int i = 0; i < m; ++i) sol.y[i] = y(i);
    sol.flows = fixed_flow + hp.unit_cols * y;
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      cost += hp.units[i].a * y(i) * y(i) + hp.units[i].b * y(i);
    cost += penalty_term(sol.flows, caps_, penalty_w_, &sol.flow_violation);
    sol.cost = cost + kBalanceSlope * sol.balance_gap;
    return sol;
  }

  void refresh_all_hours() {
    for (int t = 0; t < T_; ++t)
      hour_cache_[t] = solve_hour(t, storage_outputs(d_.col(t)));
  }

  double storage_cost_col(int b, double dval) const {
    return storage_use_cost(prob_.grid.storage_units[b], dval);
  }

  double max_flow_violation() const {
    double mv = 0.0;
    for (const auto& hs : hour_cache_) mv = std::max(mv, hs.flow_violation);
    return mv;
  }

  // Pairwise transfers of stored energy between hours; each move keeps the
  // cyclic sum and all energy bounds exact.
  void descend_storage() {
    const auto& storages = prob_.grid.storage_units;
    for (int sweep = 0; sweep < 200; ++sweep) {
      double improved = 0.0;
      for (int b = 0; b < nb_storage_; ++b) {
        const StorageUnit& su = storages[b];
        for (int t1 = 0; t1 < T_; ++t1) {
          for (int t2 = t1 + 1; t2 < T_; ++t2) {
            improved += try_pair_move(b, su, t1, t2);
          }
        }
      }
      if (improved < 1e-9) break;
    }
  }

  double try_pair_move(int b, const StorageUnit& su, int t1, int t2) {
    const double d1 = d_(b, t1), d2 = d_(b, t2);
    double lo = delta_min(su) - d1;
    double hi = delta_max(su) - d1;
    lo = std::max(lo, d2 - delta_max(su));
    hi = std::min(hi, d2 - delta_min(su));
    // Energy level over [t1, t2) shifts by eps.
    double e = su.e_initial;
    for (int t = 0; t < t2; ++t) {
      e += d_(b, t);
      if (t >= t1) {
        lo = std::max(lo, su.e_min - e);
        hi = std::min(hi, su.e_max - e);
      }
    }
    if (hi - lo < 1e-12) return 0.0;

    auto eval = [&](double eps) {
      Eigen::VectorXd dc1 = d_.col(t1), dc2 = d_.col(t2);
      dc1(b) = d1 + eps;
      dc2(b) = d2 - eps;
      const HourSolution h1 = solve_hour(t1, storage_outputs(dc1));
      const HourSolution h2 = solve_hour(t2, storage_outputs(dc2));
      return h1.cost + h2.cost + storage_cost_col(b, d1 + eps) +
             storage_cost_col(b, d2 - eps);
    };

    const double base = hour_cache_[t1].cost + hour_cache_[t2].cost +
                        storage_cost_col(b, d1) + storage_cost_col(b, d2);

    // Golden-section over the feasible interval, then kink candidates.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, c = hi;
    double x1 = c - phi * (c - a), x2 = a + phi * (c - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 80 && (c - a) > 1e-10 * (1.0 + std::abs(a)); ++it) {
      if (f1 <= f2) {
        c = x2;
        x2 = x1;
        f2 = f1;
        x1 = c - phi * (c - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (c - a);
        f2 = eval(x2);
      }
    }
    double best_eps = f1 <= f2 ? x1 : x2;
    double best = std::min(f1, f2);
    for (double cand : {lo, hi, -d1, d2, 0.0}) {
      if (cand < lo || cand > hi) continue;
      const double fc = eval(cand);
      if (fc < best) {
        best = fc;
        best_eps = cand;
      }
    }
    if (best >= base - 1e-10 || best_eps == 0.0) return 0.0;

    d_(b, t1) = d1 + best_eps;
    d_(b, t2) = d2 - best_eps;
    hour_cache_[t1] = solve_hour(t1, storage_outputs(d_.col(t1)));
    hour_cache_[t2] = solve_hour(t2, storage_outputs(d_.col(t2)));
    return base - best;
  }

  CommitmentDispatch finalize() {
    const GridModel& g = prob_.grid;
    CommitmentDispatch out;
    out.p = Eigen::MatrixXd::Zero(g.generators.size(), T_);
    out.p_wind = Eigen::MatrixXd::Zero(g.wind_farms.size(), T_);
    out.d = Eigen::MatrixXd::Zero(g.storage_units.size(), T_);
    if (nb_storage_ > 0) {
      // Remove accumulated rounding from the cyclic sums.
      for (int b = 0; b < nb_storage_; ++b) {
        const double drift = d_.row(b).sum();
        if (std::abs(drift) > 0.0) d_(b, T_ - 1) -= drift;
      }
      out.d.topRows(nb_storage_) = d_.topRows(nb_storage_);
      refresh_all_hours();
    }

    double cost = 0.0;
    bool feasible = true;
    for (int t = 0; t < T_; ++t) {
      const HourSolution& hs = hour_cache_[t];
      if (hs.balance_gap > 1e-9) feasible = false;
      if (prob_.network_constraints && hs.flow_violation > kFlowTol)
        feasible = false;
      const HourProblem& hp = hours_[t];
      const size_t nth = hp.gen_rows.size();
      for (size_t i = 0; i < nth; ++i) {
        out.p(hp.gen_rows[i], t) = hs.y[i];
        const auto& un = hp.units[i];
        cost += un.a * hs.y[i] * hs.y[i] + un.b * hs.y[i];
      }
      for (size_t i = 0; i < hp.wind_rows.size(); ++i) {
        const double pw = hs.y[nth + i];
        out.p_wind(hp.wind_rows[i], t) = pw;
        cost += hp.units[nth + i].b * pw;
      }
      for (int b = 0; b < nb_storage_; ++b)
        cost += storage_cost_col(b, d_(b, t));
    }
    out.variable_cost = cost;
    out.feasible = feasible;
    return out;
  }

  const ScheduleProblem& prob_;
  const Eigen::MatrixXi& u_;
  int T_ = 0;
  int nb_storage_ = 0;
  double penalty_w_ = 0.0;
  Eigen::MatrixXd ptdf_;
  std::vector<double> caps_;
  std::vector<HourProblem> hours_;
  std::vector<HourSolution> hour_cache_;
  std::vector<Eigen::VectorXd> warm_;
  Eigen::MatrixXd d_;
};

}  // namespace

CommitmentDispatch solve_commitment_dispatch(const ScheduleProblem& problem,
                                             const Eigen::MatrixXi& u) {
  CommitmentSolver solver(problem, u);
  return solver.run();
}

}  // namespace windgrid::detail
