#include "windgrid/grid.hpp"

#include <cmath>
#include <map>
#include <queue>
#include <set>

namespace windgrid {

namespace {

std::vector<double> effective_reactances(
    const GridModel& grid, const std::optional<PerturbationPlan>& plan) {
  std::vector<double> x(grid.branches.size());
  for (size_t l = 0; l < grid.branches.size(); ++l) {
    double d = plan ? plan->deltas[l] : 0.0;
    x[l] = grid.branches[l].reactance * (1.0 + d);
    if (x[l] <= 0.0) {
      throw NonPositiveReactance("branch " +
                                 std::to_string(grid.branches[l].id) +
                                 " effective reactance <= 0");
    }
  }
  return x;
}

}  // namespace

void GridModel::validate() const {
  if (horizon <= 0) throw InvalidArgument("horizon must be positive");
  if (generators.empty()) throw InvalidArgument("at least one generator required");

  std::set<int> bus_ids;
  for (const auto& bus : buses) {
    if (!bus_ids.insert(bus.id).second)
      throw InvalidArgument("duplicate bus id " + std::to_string(bus.id));
    if (static_cast<int>(bus.demand.size()) != horizon)
      throw InvalidArgument("bus " + std::to_string(bus.id) +
                            " demand length != horizon");
    for (double d : bus.demand)
      if (d < 0.0)
        throw InvalidArgument("bus " + std::to_string(bus.id) +
                              " has negative demand");
  }
  auto check_bus = [&](int b, const std::string& what) {
    if (!bus_ids.count(b))
      throw InvalidArgument(what + " references unknown bus " +
                            std::to_string(b));
  };
  for (const auto& br : branches) {
    if (br.from_bus == br.to_bus)
      throw InvalidArgument("branch " + std::to_string(br.id) +
                            " is a self loop");
    if (br.reactance <= 0.0)
      throw InvalidArgument("branch " + std::to_string(br.id) +
                            " reactance must be > 0");
    if (br.flow_limit <= 0.0)
      throw InvalidArgument("branch " + std::to_string(br.id) +
                            " flow_limit must be > 0");
    check_bus(br.from_bus, "branch");
    check_bus(br.to_bus, "branch");
  }
  for (const auto& g : generators) {
    check_bus(g.bus, "generator");
    if (g.p_min < 0.0 || g.p_min > g.p_max)
      throw InvalidArgument("generator " + std::to_string(g.id) +
                            " requires 0 <= p_min <= p_max");
    if (g.a < 0.0)
      throw InvalidArgument("generator " + std::to_string(g.id) +
                            " fuel cost must be convex (a >= 0)");
    if (g.pr_su < 0.0 || g.pr_sd < 0.0)
      throw InvalidArgument("generator " + std::to_string(g.id) +
                            " start/stop prices must be >= 0");
  }
  for (const auto& s : storage_units) {
    check_bus(s.bus, "storage unit");
    if (s.e_min > s.e_initial || s.e_initial > s.e_max)
      throw InvalidArgument("storage " + std::to_string(s.id) +
                            " requires e_min <= e_initial <= e_max");
    if (s.eta_ch <= 0.0 || s.eta_ch > 1.0 || s.eta_dis <= 0.0 ||
        s.eta_dis > 1.0)
      throw InvalidArgument("storage " + std::to_string(s.id) +
                            " efficiencies must be in (0, 1]");
    if (s.s_ch < 0.0 || s.s_dis < 0.0)
      throw InvalidArgument("storage " + std::to_string(s.id) +
                            " prices must be >= 0");
  }
  for (const auto& w : wind_farms) {
    check_bus(w.bus, "wind farm");
    if (w.capacity <= 0.0)
      throw InvalidArgument("wind farm " + std::to_string(w.id) +
                            " capacity must be > 0");
    if (w.lambda_price < 0.0)
      throw InvalidArgument("wind farm " + std::to_string(w.id) +
                            " lambda_price must be >= 0");
  }

  // Connectivity over the branch graph.
  if (buses.size() > 1) {
    std::map<int, std::vector<int>> adj;
    for (const auto& br : branches) {
      adj[br.from_bus].push_back(br.to_bus);
      adj[br.to_bus].push_back(br.from_bus);
    }
    std::set<int> seen{buses.front().id};
    std::queue<int> frontier;
    frontier.push(buses.front().id);
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int v : adj[u])
        if (seen.insert(v).second) frontier.push(v);
    }
    if (seen.size() != buses.size())
      throw InvalidArgument("grid graph is not connected");
  }
}

void PerturbationPlan::validate(const GridModel& grid) const {
  if (deltas.size() != grid.branches.size())
    throw PlanMismatch("plan has " + std::to_string(deltas.size()) +
                       " deltas for " + std::to_string(grid.branches.size()) +
                       " branches");
  for (size_t l = 0; l < deltas.size(); ++l) {
    const double d = deltas[l];
    if (d == 0.0) continue;
    if (!grid.branches[l].dfacts)
      throw PlanMismatch("nonzero delta on non-D-FACTS branch " +
                         std::to_string(grid.branches[l].id));
    const double mag = std::abs(d);
    if (mag < range_low || mag > range_high)
      throw PlanMismatch("delta magnitude " + std::to_string(mag) +
                         " outside [" + std::to_string(range_low) + ", " +
                         std::to_string(range_high) + "]");
    if (1.0 + d <= 0.0)
      throw NonPositiveReactance("delta " + std::to_string(d) +
                                 " drives reactance non-positive");
  }
}

bool PerturbationPlan::is_zero() const {
  for (double d : deltas)
    if (d != 0.0) return false;
  return true;
}

Eigen::MatrixXd build_incidence_matrix(const GridModel& grid) {
  const int B = grid.bus_count();
  const int L = grid.branch_count();
  // Bus ids are validated unique; map id -> row.
  std::map<int, int> row;
  for (int i = 0; i < B; ++i) row[grid.buses[i].id] = i;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(B, L);
  for (int j = 0; j < L; ++j) {
    A(row.at(grid.branches[j].from_bus), j) = 1.0;
    A(row.at(grid.branches[j].to_bus), j) = -1.0;
  }
  return A;
}

MeasurementMatrix build_measurement_matrix(
    const GridModel& grid, const std::optional<PerturbationPlan>& plan) {
  if (plan) plan->validate(grid);
  const auto x = effective_reactances(grid, plan);
  const int B = grid.bus_count();
  const int L = grid.branch_count();

  const Eigen::MatrixXd A = build_incidence_matrix(grid);
  Eigen::VectorXd dinv(L);
  for (int l = 0; l < L; ++l) dinv(l) = 1.0 / x[l];
  const Eigen::MatrixXd DAt = dinv.asDiagonal() * A.transpose();

  MeasurementMatrix H;
  H.branch_rows = L;
  H.entries.resize(2 * L + B, B);
  H.entries.topRows(L) = DAt;
  H.entries.middleRows(L, L) = -DAt;
  H.entries.bottomRows(B) = A * DAt;
  return H;
}

Eigen::VectorXd dc_power_flow(const GridModel& grid,
                              const Eigen::VectorXd& injections,
                              const std::optional<PerturbationPlan>& plan) {
  const int B = grid.bus_count();
  const int L = grid.branch_count();
  if (injections.size() != B)
    throw InvalidArgument("injection vector length != bus count");
  if (std::abs(injections.sum()) > 1e-6)
    throw UnbalancedInjections("injections sum to " +
                               std::to_string(injections.sum()) + " MW");
  if (plan) plan->validate(grid);
  const auto x = effective_reactances(grid, plan);

  const Eigen::MatrixXd A = build_incidence_matrix(grid);
  Eigen::VectorXd dinv(L);
  for (int l = 0; l < L; ++l) dinv(l) = 1.0 / x[l];
  const Eigen::MatrixXd Bbus = A * dinv.asDiagonal() * A.transpose();

  // Drop the reference bus (index 0) row/column.
  const Eigen::MatrixXd Bred = Bbus.bottomRightCorner(B - 1, B - 1);
  const Eigen::VectorXd pred = injections.tail(B - 1);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(Bred);
  if (!lu.isInvertible())
    throw SingularNetwork("reduced susceptance matrix is singular");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(B);
  theta.tail(B - 1) = lu.solve(pred);

  return dinv.asDiagonal() * A.transpose() * theta;
}

GridModel apply_perturbation(const GridModel& grid,
                             const PerturbationPlan& plan) {
  plan.validate(grid);
  GridModel out = grid;
  for (size_t l = 0; l < out.branches.size(); ++l)
    out.branches[l].reactance *= (1.0 + plan.deltas[l]);
  return out;
}

Eigen::MatrixXd power_transfer_matrix(const GridModel& grid) {
  const int B = grid.bus_count();
  Eigen::MatrixXd ptdf(grid.branch_count(), B);
  // Column b: flows for a unit injection at bus b withdrawn at the reference.
  for (int b = 0; b < B; ++b) {
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(B);
    if (b != 0) {
      inj(b) = 1.0;
      inj(0) = -1.0;
      ptdf.col(b) = dc_power_flow(grid, inj);
    } else {
      ptdf.col(b).setZero();
    }
  }
  return ptdf;
}

}  // namespace windgrid
