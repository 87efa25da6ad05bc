#include "commands.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "windgrid/dataset.hpp"
#include "windgrid/ddm.hpp"
#include "windgrid/forest.hpp"
#include "windgrid/grid_io.hpp"
#include "windgrid/metrics.hpp"
#include "windgrid/model_io.hpp"
#include "windgrid/scenario.hpp"
#include "windgrid/scheduler.hpp"

namespace windgrid::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Manifest plumbing.
// ---------------------------------------------------------------------------

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& path, const std::string& subcommand,
                    std::uint64_t seed, const std::string& config) {
  json doc;
  doc["tool"] = "windgrid";
  doc["version"] = WINDGRID_VERSION;
  doc["subcommand"] = subcommand;
  doc["seed"] = seed;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(config)));
  doc["config_hash"] = hash;
  doc["timestamp"] = utc_timestamp();  // the only nondeterministic field
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

TimeSeries load_series(const std::string& path, const std::string& column) {
  const Dataset data = load_timeseries_csv(path);
  int col = data.column_index(column);
  if (col < 0) {
    if (data.column_count() == 1 && column.empty())
      col = 0;
    else
      throw ParseError("no column named '" + column + "' in " + path);
  }
  TimeSeries series;
  for (int r = 0; r < data.row_count(); ++r) {
    if (data.mask[static_cast<size_t>(col)][static_cast<size_t>(r)])
      throw ParseError("column '" + column + "' has a missing value at row " +
                       std::to_string(r + 2) + "; impute the file first");
    series.values.push_back(
        data.values[static_cast<size_t>(col)][static_cast<size_t>(r)]);
  }
  if (series.values.empty())
    throw ParseError("column '" + column + "' in " + path + " is empty");
  return series;
}

double resolve_capacity(double requested, const TimeSeries& series) {
  if (requested > 0.0) return requested;
  double top = 0.0;
  for (double v : series.values) top = std::max(top, v);
  if (top <= 0.0)
    throw InvalidArgument("cannot infer capacity from a nonpositive series");
  return top;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json imatrix_to_json(const Eigen::MatrixXi& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json costs_to_json(const CostBreakdown& c) {
  return {{"c_ss", c.c_ss},
          {"c_f", c.c_f},
          {"c_w", c.c_w},
          {"c_b", c.c_b},
          {"objective", c.objective}};
}

json solution_to_json(const DispatchSolution& s) {
  json doc;
  doc["u"] = imatrix_to_json(s.commitment.u);
  doc["alpha"] = imatrix_to_json(s.commitment.alpha);
  doc["beta"] = imatrix_to_json(s.commitment.beta);
  doc["p"] = matrix_to_json(s.p);
  doc["p_wind"] = matrix_to_json(s.p_wind);
  doc["p_ch"] = matrix_to_json(s.p_ch);
  doc["p_dis"] = matrix_to_json(s.p_dis);
  doc["e"] = matrix_to_json(s.e);
  if (s.flows) doc["flows"] = matrix_to_json(*s.flows);
  doc["costs"] = costs_to_json(s.costs);
  doc["curtailment_mwh"] = s.curtailment_mwh;
  return doc;
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << doc.dump(2) << '\n';
}

std::string fmt10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (...) {
      throw InvalidArgument("cannot parse " + what + " entry '" + tok + "'");
    }
  }
  if (out.empty()) throw InvalidArgument(what + " list is empty");
  return out;
}

// ---------------------------------------------------------------------------
// impute
// ---------------------------------------------------------------------------

struct ImputeOpts {
  std::string data, out, mask_out;
  int trees = 100, max_depth = 12, min_leaf = 5;
  std::uint64_t seed = 0;
};

json cmd_impute(const ImputeOpts& opt) {
  const Dataset data = load_timeseries_csv(opt.data);

  ForestConfig config;
  config.tree_count = opt.trees;
  config.max_depth = opt.max_depth;
  config.min_leaf = opt.min_leaf;
  config.seed = opt.seed;

  std::map<std::string, ForestModel> models;
  json per_column = json::object();
  for (int c = 0; c < data.column_count(); ++c) {
    int miss = 0;
    for (int r = 0; r < data.row_count(); ++r)
      miss += data.mask[static_cast<size_t>(c)][static_cast<size_t>(r)] ? 1 : 0;
    if (miss == 0) continue;
    const std::string& name = data.columns[static_cast<size_t>(c)];
    const ForestModel model = fit_imputer(data, name, config);
    per_column[name] = {{"missing", miss},
                        {"oob_r2", model.oob_defined ? json(model.oob_r2)
                                                     : json(nullptr)}};
    models.emplace(name, model);
  }

  const Dataset imputed = impute_missing(data, models);
  write_dataset_csv(imputed, opt.out);

  if (!opt.mask_out.empty()) {
    std::ofstream file(opt.mask_out);
    if (!file)
      throw FileNotFound("cannot open '" + opt.mask_out + "' for writing");
    file << "row,column\n";
    for (int r = 0; r < data.row_count(); ++r)
      for (int c = 0; c < data.column_count(); ++c)
        if (data.mask[static_cast<size_t>(c)][static_cast<size_t>(r)])
          file << r << ',' << data.columns[static_cast<size_t>(c)] << '\n';
  }

  json summary;
  summary["rows"] = data.row_count();
  summary["columns"] = data.column_count();
  summary["imputed_cells"] = data.missing_count();
  summary["models"] = std::move(per_column);
  return summary;
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

struct ForecastOpts {
  std::string data, column = "wind_mw", out, model_out, model_in, trace;
  int horizon = 24, window = 24, epochs = 60;
  double capacity = 0.0;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

NetworkSpec default_forecaster_spec() {
  NetworkSpec spec;
  spec.loss = LossKind::Mse;
  spec.layers = {{LayerSpec::Kind::Bilstm, 8, 0, 1, Activation::Linear},
                 {LayerSpec::Kind::Dense, 1, 0, 1, Activation::Linear}};
  return spec;
}

json cmd_forecast(const ForecastOpts& opt) {
  const TimeSeries history = load_series(opt.data, opt.column);

  ForecastModel model;
  std::vector<double> loss_history;
  if (!opt.model_in.empty()) {
    const SavedModel saved = load_model(opt.model_in);
    model.spec = saved.spec;
    model.params = saved.params;
    model.window = static_cast<int>(saved.extras.count("window")
                                        ? saved.extras.at("window")
                                        : 24);
    model.capacity = saved.extras.count("capacity")
                         ? saved.extras.at("capacity")
                         : resolve_capacity(opt.capacity, history);
  } else {
    const double capacity = resolve_capacity(opt.capacity, history);
    TrainConfig config;
    config.learning_rate = opt.learning_rate;
    config.epochs = opt.epochs;
    config.batch_size = 16;
    config.seed = opt.seed;
    config.gradient_clip = 5.0;
    model = train_forecaster(history, capacity, default_forecaster_spec(),
                             opt.window, config, &loss_history);
  }

  const TimeSeries forecast = forecast_wind(model, history, opt.horizon);
  {
    std::ofstream file(opt.out);
    if (!file) throw FileNotFound("cannot open '" + opt.out + "' for writing");
    file << "hour,forecast_mw\n";
    for (size_t t = 0; t < forecast.values.size(); ++t)
      file << t << ',' << fmt10(forecast.values[t]) << '\n';
  }
  if (!opt.model_out.empty())
    save_model(opt.model_out, model.spec, model.params, opt.seed,
               {{"window", static_cast<double>(model.window)},
                {"capacity", model.capacity}});
  if (!opt.trace.empty()) write_loss_trace(opt.trace, loss_history);

  json summary;
  summary["horizon"] = opt.horizon;
  summary["window"] = model.window;
  summary["capacity"] = model.capacity;
  summary["first_hour_mw"] =
      forecast.values.empty() ? 0.0 : forecast.values.front();
  return summary;
}

// ---------------------------------------------------------------------------
// scenarios
// ---------------------------------------------------------------------------

struct ScenarioOpts {
  std::string mode = "bootstrap";
  std::string data, column = "wind_mw", out, stats, model_in, model_out, trace;
  int count = 10, horizon = 24, epochs = 300, latent = 16;
  double capacity = 0.0;
  double learning_rate = 0.002;
  std::uint64_t seed = 0;
};

json cmd_scenarios(const ScenarioOpts& opt) {
  if (opt.mode != "gan" && opt.mode != "bootstrap")
    throw InvalidArgument("mode must be gan or bootstrap");

  ScenarioSet set;
  std::vector<GanTraceRow> trace;
  if (opt.mode == "gan") {
    GanGeneratorModel generator;
    if (!opt.model_in.empty()) {
      const SavedModel saved = load_model(opt.model_in);
      generator.spec = saved.spec;
      generator.params = saved.params;
      generator.latent_dim = static_cast<int>(
          saved.extras.count("latent_dim") ? saved.extras.at("latent_dim")
                                           : 16);
      generator.horizon = static_cast<int>(
          saved.extras.count("horizon") ? saved.extras.at("horizon") : 24);
      if (!saved.extras.count("capacity"))
        throw ParseError("generator model file lacks a capacity extra");
      generator.capacity = saved.extras.at("capacity");
    } else {
      const TimeSeries history = load_series(opt.data, opt.column);
      const double capacity = resolve_capacity(opt.capacity, history);
      TrainConfig config;
      config.learning_rate = opt.learning_rate;
      config.epochs = opt.epochs;
      config.batch_size = 16;
      config.seed = opt.seed;
      config.gradient_clip = 5.0;
      generator = train_scenario_gan(history, capacity, opt.horizon, config,
                                     opt.latent, {}, {}, &trace);
      if (!opt.model_out.empty())
        save_model(opt.model_out, generator.spec, generator.params, opt.seed,
                   {{"latent_dim", static_cast<double>(generator.latent_dim)},
                    {"horizon", static_cast<double>(generator.horizon)},
                    {"capacity", generator.capacity}});
    }
    set = generate_scenarios_gan(generator, opt.count, opt.seed,
                                 generator.capacity);
  } else {
    const TimeSeries history = load_series(opt.data, opt.column);
    const double capacity = resolve_capacity(opt.capacity, history);
    // Hour-of-day mean profile as the base forecast.
    const int blocks = static_cast<int>(history.values.size()) / opt.horizon;
    if (blocks < 1)
      throw InsufficientHistory("history shorter than one scenario block");
    TimeSeries base;
    base.values.assign(static_cast<size_t>(opt.horizon), 0.0);
    for (int b = 0; b < blocks; ++b)
      for (int h = 0; h < opt.horizon; ++h)
        base.values[static_cast<size_t>(h)] +=
            history.values[static_cast<size_t>(b * opt.horizon + h)] / blocks;
    set = generate_scenarios_bootstrap(base, history, opt.horizon, opt.count,
                                       opt.seed, capacity);
  }

  write_scenario_csv(set, 0, opt.out);
  if (!opt.stats.empty()) write_stats_csv(scenario_stats(set), opt.stats);
  if (!opt.trace.empty()) write_gan_trace(opt.trace, trace);

  json summary;
  summary["mode"] = set.provenance;
  summary["count"] = set.count();
  summary["horizon"] = set.horizon();
  summary["mean_mw"] = set.scenarios.mean();
  return summary;
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

struct ScheduleOpts {
  std::string grid, scenarios, out;
  std::string case_mode;           // bes | nobes
  std::string network = "off";     // on | off
  std::string solver = "exact";    // exact | heuristic
};

json cmd_schedule(const ScheduleOpts& opt) {
  if (opt.case_mode != "bes" && opt.case_mode != "nobes")
    throw InvalidArgument("--case must be bes or nobes");
  if (opt.network != "on" && opt.network != "off")
    throw InvalidArgument("--network must be on or off");
  if (opt.solver != "exact" && opt.solver != "heuristic")
    throw InvalidArgument("--solver must be exact or heuristic");

  const GridModel grid = load_grid_json(opt.grid);
  const ScenarioSet set = read_scenario_csv(opt.scenarios);
  const bool with_storage = opt.case_mode == "bes";
  const bool network = opt.network == "on";
  const SolverKind solver =
      opt.solver == "exact" ? SolverKind::Exact : SolverKind::Heuristic;

  const BatchResult batch =
      stochastic_batch(grid, set, with_storage, network, solver);
  if (batch.stats.solved == 0)
    throw Infeasible("no scenario could be scheduled: " +
                     (batch.failures.empty() ? std::string("empty batch")
                                             : batch.failures.front()));

  json doc;
  doc["case"] = opt.case_mode;
  doc["network"] = network;
  doc["solver"] = opt.solver;
  doc["scenario_count"] = set.count();
  doc["stats"] = {{"mean", batch.stats.mean},     {"median", batch.stats.median},
                  {"q25", batch.stats.q25},       {"q75", batch.stats.q75},
                  {"min", batch.stats.min},       {"max", batch.stats.max},
                  {"solved", batch.stats.solved}, {"failed", batch.stats.failed}};
  json rows = json::array();
  int first_solved = -1;
  for (int s = 0; s < set.count(); ++s) {
    json row;
    row["scenario_id"] = s;
    if (batch.solutions[static_cast<size_t>(s)]) {
      const DispatchSolution& sol = *batch.solutions[static_cast<size_t>(s)];
      row["status"] = "ok";
      row["costs"] = costs_to_json(sol.costs);
      row["curtailment_mwh"] = sol.curtailment_mwh;
      if (first_solved < 0) first_solved = s;
    } else {
      row["status"] = "failed";
      row["error"] = batch.failures[static_cast<size_t>(s)];
    }
    rows.push_back(std::move(row));
  }
  doc["scenarios"] = std::move(rows);
  doc["solution_scenario_id"] = first_solved;
  doc["solution"] =
      solution_to_json(*batch.solutions[static_cast<size_t>(first_solved)]);
  write_json_file(doc, opt.out);

  json summary;
  summary["mean_objective"] = batch.stats.mean;
  summary["solved"] = batch.stats.solved;
  summary["failed"] = batch.stats.failed;
  return summary;
}

// ---------------------------------------------------------------------------
// ddm
// ---------------------------------------------------------------------------

struct DdmOpts {
  std::string grid, scenarios, out;
  std::string delta_list = "0.70,0.75,0.80,0.85,0.90,0.95,0.99";
  std::string range = "0.05:0.5";
  std::string levels;  // empty -> range endpoints
  std::string case_mode = "nobes";
  std::string network = "on";
  int attacks = 10000;
  bool stealthy = false;
  std::uint64_t seed = 0;
};

json cmd_ddm(const DdmOpts& opt) {
  if (opt.case_mode != "bes" && opt.case_mode != "nobes")
    throw InvalidArgument("--case must be bes or nobes");
  if (opt.network != "on")
    throw InvalidArgument(
        "--network must be on: reactance perturbation cannot change a "
        "copper-plate dispatch");

  const GridModel grid = load_grid_json(opt.grid);
  const ScenarioSet set = read_scenario_csv(opt.scenarios);

  const auto colon = opt.range.find(':');
  if (colon == std::string::npos)
    throw InvalidArgument("--range must look like low:high");
  DdmConfig config;
  config.range_low = std::stod(opt.range.substr(0, colon));
  config.range_high = std::stod(opt.range.substr(colon + 1));
  config.attack_count = opt.attacks;
  config.attack_seed = opt.seed;
  config.stealthy_attacks = opt.stealthy;
  if (!opt.levels.empty()) {
    config.candidate_levels = parse_double_list(opt.levels, "levels");
  } else {
    if (config.range_low > 0.0)
      config.candidate_levels.push_back(config.range_low);
    config.candidate_levels.push_back(config.range_high);
  }
  const std::vector<double> deltas =
      parse_double_list(opt.delta_list, "delta");
  config.delta = deltas.front();

  ScheduleProblem base;
  base.grid = grid;
  base.with_storage = opt.case_mode == "bes";
  base.network_constraints = true;
  base.solver = SolverKind::Exact;
  base.wind_available = scenario_wind_matrix(grid, set, 0);

  const TradeoffCurve curve =
      tradeoff_sweep(grid, base, deltas, config, base.with_storage);

  {
    std::ofstream file(opt.out);
    if (!file) throw FileNotFound("cannot open '" + opt.out + "' for writing");
    file << "delta,success_rate,cost_increment,plan_id\n";
    for (const TradeoffRow& row : curve.rows) {
      file << fmt10(row.delta) << ',';
      if (row.error.empty())
        file << fmt10(row.success_rate) << ',' << fmt10(row.cost_increment)
             << ',' << row.plan_id;
      else
        file << ",,-1";
      file << '\n';
    }
  }

  json doc;
  doc["attack_seed"] = curve.attack_seed;
  doc["attacks"] = opt.attacks;
  doc["stealthy"] = opt.stealthy;
  doc["range"] = {config.range_low, config.range_high};
  doc["levels"] = config.candidate_levels;
  doc["case"] = opt.case_mode;
  json plans = json::array();
  for (size_t p = 0; p < curve.plans.size(); ++p)
    plans.push_back({{"plan_id", static_cast<int>(p)},
                     {"deltas", curve.plans[p].deltas}});
  doc["plans"] = std::move(plans);
  json rows = json::array();
  for (const TradeoffRow& row : curve.rows) {
    json j;
    j["delta"] = row.delta;
    if (row.error.empty()) {
      j["success_rate"] = row.success_rate;
      j["cost_increment"] = row.cost_increment;
      j["plan_id"] = row.plan_id;
    } else {
      j["error"] = row.error;
    }
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  write_json_file(doc, opt.out + ".json");

  json summary;
  summary["deltas"] = deltas.size();
  summary["plans"] = curve.plans.size();
  if (!curve.rows.empty() && curve.rows.front().error.empty()) {
    summary["first_success_rate"] = curve.rows.front().success_rate;
    summary["first_cost_increment"] = curve.rows.front().cost_increment;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// demo
// ---------------------------------------------------------------------------

struct DemoOpts {
  std::string out;
  std::string fixtures = "fixtures";
  std::uint64_t seed = 7;
};

json cmd_demo(const DemoOpts& opt) {
  const std::string d = opt.out;
  std::filesystem::create_directories(d);
  json summary;

  ImputeOpts impute;
  impute.data = opt.fixtures + "/impute_linear.csv";
  impute.out = d + "/imputed.csv";
  impute.mask_out = d + "/imputed_cells.csv";
  impute.trees = 25;
  impute.seed = opt.seed;
  summary["impute"] = cmd_impute(impute);

  ForecastOpts forecast;
  forecast.data = opt.fixtures + "/wind_series.csv";
  forecast.out = d + "/forecast.csv";
  forecast.model_out = d + "/forecaster.json";
  forecast.epochs = 8;
  forecast.capacity = 80.0;
  forecast.seed = opt.seed;
  summary["forecast"] = cmd_forecast(forecast);

  ScenarioOpts scenarios;
  scenarios.mode = "bootstrap";
  scenarios.data = opt.fixtures + "/wind_series.csv";
  scenarios.out = d + "/scenarios.csv";
  scenarios.stats = d + "/scenario_stats.csv";
  scenarios.count = 10;
  scenarios.capacity = 80.0;
  scenarios.seed = opt.seed;
  summary["scenarios"] = cmd_scenarios(scenarios);

  for (const std::string case_mode : {"nobes", "bes"}) {
    ScheduleOpts schedule;
    schedule.grid = opt.fixtures + "/grid5.json";
    schedule.scenarios = d + "/scenarios.csv";
    schedule.case_mode = case_mode;
    schedule.network = "on";
    schedule.out = d + "/schedule_" + case_mode + ".json";
    summary["schedule_" + case_mode] = cmd_schedule(schedule);
  }

  DdmOpts ddm;
  ddm.grid = opt.fixtures + "/grid3.json";
  ddm.scenarios = d + "/scenarios.csv";
  ddm.out = d + "/ddm_sweep.csv";
  ddm.range = "0.05:0.5";
  ddm.seed = opt.seed;
  summary["ddm"] = cmd_ddm(ddm);

  write_json_file(summary, d + "/summary.json");
  return summary;
}

// ---------------------------------------------------------------------------
// Dispatch.
// ---------------------------------------------------------------------------

int map_error(const Error& e) {
  if (dynamic_cast<const Infeasible*>(&e) ||
      dynamic_cast<const SingularNetwork*>(&e))
    return 3;
  if (dynamic_cast<const NonFiniteValue*>(&e) ||
      dynamic_cast<const BudgetExceeded*>(&e) ||
      dynamic_cast<const NegativeIncrement*>(&e) ||
      dynamic_cast<const DegenerateAttack*>(&e))
    return 4;
  return 2;
}

// Joins the CLI arguments for the manifest's config hash. The --out path is
// skipped: it decides where results land, not what they contain, and the same
// invocation must hash identically regardless of the output location.
std::string joined_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out") {
      ++i;  // skip the value too
      continue;
    }
    if (arg.rfind("--out=", 0) == 0) continue;
    if (!out.empty()) out += ' ';
    out += arg;
  }
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Wind-integration pipeline: imputation, forecasting, scenario "
               "generation, storage-aware unit commitment, and reactance-"
               "perturbation defense analysis"};
  app.require_subcommand(1);

  ImputeOpts impute;
  CLI::App* c_impute =
      app.add_subcommand("impute", "Fill missing CSV cells with a regression "
                                   "forest");
  c_impute->add_option("--data", impute.data, "Input CSV")->required();
  c_impute->add_option("--out", impute.out, "Imputed CSV")->required();
  c_impute->add_option("--mask-out", impute.mask_out,
                       "CSV of imputed cells (row,column)");
  c_impute->add_option("--trees", impute.trees, "Trees per forest");
  c_impute->add_option("--max-depth", impute.max_depth, "Tree depth limit");
  c_impute->add_option("--min-leaf", impute.min_leaf, "Minimum leaf size");
  c_impute->add_option("--seed", impute.seed, "Random seed");

  ForecastOpts forecast;
  CLI::App* c_forecast =
      app.add_subcommand("forecast", "Train a sequence model and roll out a "
                                     "wind forecast");
  c_forecast->add_option("--data", forecast.data, "History CSV")->required();
  c_forecast->add_option("--column", forecast.column, "Series column name");
  c_forecast->add_option("--horizon", forecast.horizon, "Forecast hours");
  c_forecast->add_option("--window", forecast.window, "Input window hours");
  c_forecast->add_option("--epochs", forecast.epochs, "Training epochs");
  c_forecast->add_option("--capacity", forecast.capacity,
                         "Clip bound MW (default: series max)");
  c_forecast->add_option("--lr", forecast.learning_rate, "Learning rate");
  c_forecast->add_option("--seed", forecast.seed, "Random seed");
  c_forecast->add_option("--out", forecast.out, "Forecast CSV")->required();
  c_forecast->add_option("--model-out", forecast.model_out, "Model JSON out");
  c_forecast->add_option("--model", forecast.model_in,
                         "Load a trained model instead of training");
  c_forecast->add_option("--trace", forecast.trace, "Loss trace CSV");

  ScenarioOpts scenarios;
  CLI::App* c_scenarios =
      app.add_subcommand("scenarios", "Generate wind availability scenarios");
  c_scenarios->add_option("--mode", scenarios.mode, "gan or bootstrap");
  c_scenarios->add_option("--data", scenarios.data, "History CSV");
  c_scenarios->add_option("--column", scenarios.column, "Series column name");
  c_scenarios->add_option("--count", scenarios.count, "Scenario count");
  c_scenarios->add_option("--horizon", scenarios.horizon, "Hours per scenario");
  c_scenarios->add_option("--epochs", scenarios.epochs, "GAN training epochs");
  c_scenarios->add_option("--latent", scenarios.latent, "GAN latent channels");
  c_scenarios->add_option("--capacity", scenarios.capacity,
                          "Clip bound MW (default: series max)");
  c_scenarios->add_option("--lr", scenarios.learning_rate, "Learning rate");
  c_scenarios->add_option("--seed", scenarios.seed, "Random seed");
  c_scenarios->add_option("--out", scenarios.out, "Scenario CSV")->required();
  c_scenarios->add_option("--stats", scenarios.stats, "Per-hour stats CSV");
  c_scenarios->add_option("--model", scenarios.model_in,
                          "Load a trained generator");
  c_scenarios->add_option("--model-out", scenarios.model_out,
                          "Generator JSON out");
  c_scenarios->add_option("--trace", scenarios.trace, "GAN loss trace CSV");

  ScheduleOpts schedule;
  CLI::App* c_schedule =
      app.add_subcommand("schedule", "Cost-benefit unit commitment over a "
                                     "scenario batch");
  c_schedule->add_option("--grid", schedule.grid, "Grid JSON")->required();
  c_schedule->add_option("--scenarios", schedule.scenarios, "Scenario CSV")
      ->required();
  c_schedule->add_option("--case", schedule.case_mode, "bes or nobes")
      ->required();
  c_schedule->add_option("--network", schedule.network, "on or off");
  c_schedule->add_option("--solver", schedule.solver, "exact or heuristic");
  c_schedule->add_option("--out", schedule.out, "Solution JSON")->required();

  DdmOpts ddm;
  CLI::App* c_ddm = app.add_subcommand(
      "ddm", "Reactance-perturbation detectability/cost trade-off sweep");
  c_ddm->add_option("--grid", ddm.grid, "Grid JSON")->required();
  c_ddm->add_option("--scenarios", ddm.scenarios,
                    "Scenario CSV (row 0 fixes the base dispatch)")
      ->required();
  c_ddm->add_option("--delta-list", ddm.delta_list,
                    "Comma-separated detection thresholds");
  c_ddm->add_option("--attacks", ddm.attacks, "Sampled attack vectors");
  c_ddm->add_option("--range", ddm.range, "Perturbation bounds low:high");
  c_ddm->add_option("--levels", ddm.levels,
                    "Candidate |delta| levels (default: range endpoints)");
  c_ddm->add_option("--case", ddm.case_mode, "bes or nobes");
  c_ddm->add_option("--network", ddm.network, "must be on");
  c_ddm->add_flag("--stealthy", ddm.stealthy,
                  "Draw attacks from the measurement row space");
  c_ddm->add_option("--seed", ddm.seed, "Attack sampling seed");
  c_ddm->add_option("--out", ddm.out, "Sweep CSV (JSON sidecar added)")
      ->required();

  DemoOpts demo;
  CLI::App* c_demo = app.add_subcommand(
      "demo", "Full pipeline on the bundled fixtures");
  c_demo->add_option("--out", demo.out, "Output directory")->required();
  c_demo->add_option("--fixtures", demo.fixtures, "Fixture directory");
  c_demo->add_option("--seed", demo.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string config = joined_args(argc, argv);
  try {
    json summary;
    std::string name, manifest_path;
    std::uint64_t seed = 0;
    if (c_impute->parsed()) {
      summary = cmd_impute(impute);
      name = "impute";
      manifest_path = impute.out + ".manifest.json";
      seed = impute.seed;
    } else if (c_forecast->parsed()) {
      summary = cmd_forecast(forecast);
      name = "forecast";
      manifest_path = forecast.out + ".manifest.json";
      seed = forecast.seed;
    } else if (c_scenarios->parsed()) {
      summary = cmd_scenarios(scenarios);
      name = "scenarios";
      manifest_path = scenarios.out + ".manifest.json";
      seed = scenarios.seed;
    } else if (c_schedule->parsed()) {
      summary = cmd_schedule(schedule);
      name = "schedule";
      manifest_path = schedule.out + ".manifest.json";
      seed = 0;
    } else if (c_ddm->parsed()) {
      summary = cmd_ddm(ddm);
      name = "ddm";
      manifest_path = ddm.out + ".manifest.json";
      seed = ddm.seed;
    } else if (c_demo->parsed()) {
      summary = cmd_demo(demo);
      name = "demo";
      manifest_path = demo.out + "/manifest.json";
      seed = demo.seed;
    }
    write_manifest(manifest_path, name, seed, config);
    std::cout << summary.dump(2) << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return map_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}

}  // namespace windgrid::cli
