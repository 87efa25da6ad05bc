#include "windgrid/grid_io.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "windgrid/errors.hpp"

namespace windgrid {

namespace {

using nlohmann::json;

void warn_unknown(const json& obj, const std::set<std::string>& known,
                  const std::string& where, std::ostream& warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      warnings << "warning: unknown field '" << it.key() << "' in " << where
               << " ignored\n";
  }
}

const json& require(const json& obj, const std::string& key,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError("missing required field '" + key + "' in " + where);
  return *it;
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<T>();
}

}  // namespace

GridModel parse_grid_json(const std::string& text, std::ostream* warnings) {
  std::ostream& warn = warnings ? *warnings : std::cerr;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("grid JSON: ") + e.what());
  }

  warn_unknown(doc, {"buses", "branches", "generators", "storage",
                     "wind_farms", "horizon"},
               "grid document", warn);

  GridModel grid;
  grid.horizon = require(doc, "horizon", "grid document").get<int>();

  for (const auto& j : require(doc, "buses", "grid document")) {
    warn_unknown(j, {"id", "demand"}, "bus", warn);
    Bus b;
    b.id = require(j, "id", "bus").get<int>();
    b.demand = require(j, "demand", "bus").get<std::vector<double>>();
    grid.buses.push_back(std::move(b));
  }
  for (const auto& j : require(doc, "branches", "grid document")) {
    warn_unknown(j, {"id", "from_bus", "to_bus", "reactance", "flow_limit",
                     "dfacts"},
                 "branch", warn);
    Branch br;
    br.id = require(j, "id", "branch").get<int>();
    br.from_bus = require(j, "from_bus", "branch").get<int>();
    br.to_bus = require(j, "to_bus", "branch").get<int>();
    br.reactance = require(j, "reactance", "branch").get<double>();
    br.flow_limit = require(j, "flow_limit", "branch").get<double>();
    br.dfacts = get_or(j, "dfacts", false);
    grid.branches.push_back(br);
  }
  for (const auto& j : require(doc, "generators", "grid document")) {
    warn_unknown(j, {"id", "bus", "a", "b", "c", "p_min", "p_max", "pr_su",
                     "pr_sd", "initial_on"},
                 "generator", warn);
    Generator g;
    g.id = require(j, "id", "generator").get<int>();
    g.bus = require(j, "bus", "generator").get<int>();
    g.a = require(j, "a", "generator").get<double>();
    g.b = require(j, "b", "generator").get<double>();
    g.c = require(j, "c", "generator").get<double>();
    g.p_min = require(j, "p_min", "generator").get<double>();
    g.p_max = require(j, "p_max", "generator").get<double>();
    g.pr_su = get_or(j, "pr_su", 0.0);
    g.pr_sd = get_or(j, "pr_sd", 0.0);
    g.initial_on = get_or(j, "initial_on", false);
    grid.generators.push_back(g);
  }
  if (doc.contains("storage")) {
    for (const auto& j : doc["storage"]) {
      warn_unknown(j, {"id", "bus", "p_min", "p_max", "e_min", "e_max",
                       "e_initial", "eta_ch", "eta_dis", "s_ch", "s_dis"},
                   "storage unit", warn);
      StorageUnit s;
      s.id = require(j, "id", "storage unit").get<int>();
      s.bus = require(j, "bus", "storage unit").get<int>();
      s.p_min = get_or(j, "p_min", 0.0);
      s.p_max = require(j, "p_max", "storage unit").get<double>();
      s.e_min = get_or(j, "e_min", 0.0);
      s.e_max = require(j, "e_max", "storage unit").get<double>();
      s.e_initial = require(j, "e_initial", "storage unit").get<double>();
      s.eta_ch = get_or(j, "eta_ch", 0.95);
      s.eta_dis = get_or(j, "eta_dis", 0.95);
      s.s_ch = get_or(j, "s_ch", 2.5);
      s.s_dis = get_or(j, "s_dis", 2.5);
      grid.storage_units.push_back(s);
    }
  }
  if (doc.contains("wind_farms")) {
    for (const auto& j : doc["wind_farms"]) {
      warn_unknown(j, {"id", "bus", "capacity", "lambda_price"}, "wind farm",
                   warn);
      WindFarm w;
      w.id = require(j, "id", "wind farm").get<int>();
      w.bus = require(j, "bus", "wind farm").get<int>();
      w.capacity = require(j, "capacity", "wind farm").get<double>();
      w.lambda_price = get_or(j, "lambda_price", 1e-4);
      grid.wind_farms.push_back(w);
    }
  }

  grid.validate();
  return grid;
}

GridModel load_grid_json(const std::string& path, std::ostream* warnings) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open grid file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid_json(buf.str(), warnings);
}

std::string grid_to_json(const GridModel& grid) {
  json doc;
  doc["horizon"] = grid.horizon;
  doc["buses"] = json::array();
  for (const auto& b : grid.buses)
    doc["buses"].push_back({{"id", b.id}, {"demand", b.demand}});
  doc["branches"] = json::array();
  for (const auto& br : grid.branches)
    doc["branches"].push_back({{"id", br.id},
                               {"from_bus", br.from_bus},
                               {"to_bus", br.to_bus},
                               {"reactance", br.reactance},
                               {"flow_limit", br.flow_limit},
                               {"dfacts", br.dfacts}});
  doc["generators"] = json::array();
  for (const auto& g : grid.generators)
    doc["generators"].push_back({{"id", g.id},
                                 {"bus", g.bus},
                                 {"a", g.a},
                                 {"b", g.b},
                                 {"c", g.c},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"pr_su", g.pr_su},
                                 {"pr_sd", g.pr_sd},
                                 {"initial_on", g.initial_on}});
  doc["storage"] = json::array();
  for (const auto& s : grid.storage_units)
    doc["storage"].push_back({{"id", s.id},
                              {"bus", s.bus},
                              {"p_min", s.p_min},
                              {"p_max", s.p_max},
                              {"e_min", s.e_min},
                              {"e_max", s.e_max},
                              {"e_initial", s.e_initial},
                              {"eta_ch", s.eta_ch},
                              {"eta_dis", s.eta_dis},
                              {"s_ch", s.s_ch},
                              {"s_dis", s.s_dis}});
  doc["wind_farms"] = json::array();
  for (const auto& w : grid.wind_farms)
    doc["wind_farms"].push_back({{"id", w.id},
                                 {"bus", w.bus},
                                 {"capacity", w.capacity},
                                 {"lambda_price", w.lambda_price}});
  return doc.dump(2);
}

}  // namespace windgrid
