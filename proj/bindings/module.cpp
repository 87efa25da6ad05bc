// Python bindings for the windgrid core library.
//
// The module mirrors the C++ public headers: datasets and forest imputation,
// forecasting and scenario generation, storage-aware unit commitment, and the
// reactance-perturbation defense analyzer. Matrices cross the boundary as
// numpy arrays via pybind11's Eigen support.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "windgrid/dataset.hpp"
#include "windgrid/ddm.hpp"
#include "windgrid/errors.hpp"
#include "windgrid/forest.hpp"
#include "windgrid/grid.hpp"
#include "windgrid/grid_io.hpp"
#include "windgrid/metrics.hpp"
#include "windgrid/nn.hpp"
#include "windgrid/scenario.hpp"
#include "windgrid/scenario_set.hpp"
#include "windgrid/scheduler.hpp"

namespace py = pybind11;
using namespace windgrid;

PYBIND11_MODULE(_windgrid, m) {
  m.doc() =
      "Wind-integration toolkit: imputation, forecasting, scenario "
      "generation, storage-aware unit commitment, and reactance-perturbation "
      "defense analysis.";

  // ---------------------------------------------------------------- errors
  static py::exception<Error> base_error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const FileNotFound& e) {
      PyErr_SetString(PyExc_FileNotFoundError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(base_error.ptr(), e.what());
    }
  });

  // --------------------------------------------------------------- dataset
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("columns", &Dataset::columns)
      .def_readwrite("values", &Dataset::values)
      .def_readwrite("mask", &Dataset::mask)
      .def("row_count", &Dataset::row_count)
      .def("column_count", &Dataset::column_count)
      .def("column_index", &Dataset::column_index)
      .def("missing_count", &Dataset::missing_count);

  m.def("load_timeseries_csv", &load_timeseries_csv, py::arg("path"),
        py::arg("schema") = std::vector<std::string>{});
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("data"),
        py::arg("path"));

  // ---------------------------------------------------------------- forest
  py::class_<ForestConfig>(m, "ForestConfig")
      .def(py::init<>())
      .def_readwrite("tree_count", &ForestConfig::tree_count)
      .def_readwrite("max_depth", &ForestConfig::max_depth)
      .def_readwrite("min_leaf", &ForestConfig::min_leaf)
      .def_readwrite("feature_subset", &ForestConfig::feature_subset)
      .def_readwrite("seed", &ForestConfig::seed);

  py::class_<ForestModel>(m, "ForestModel")
      .def_readonly("target", &ForestModel::target)
      .def_readonly("features", &ForestModel::features)
      .def_readonly("oob_r2", &ForestModel::oob_r2)
      .def_readonly("oob_defined", &ForestModel::oob_defined)
      .def("predict", &ForestModel::predict, py::arg("x"));

  m.def("fit_forest", &fit_forest, py::arg("x"), py::arg("y"),
        py::arg("config"));
  m.def("fit_imputer", &fit_imputer, py::arg("data"),
        py::arg("target_column"), py::arg("config"));
  m.def("impute_missing", &impute_missing, py::arg("data"), py::arg("models"));
  m.def("serialize_forest", &serialize_forest, py::arg("model"));

  // --------------------------------------------------------------- metrics
  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("mse", &MetricsReport::mse)
      .def_readonly("nrmse", &MetricsReport::nrmse)
      .def_readonly("mape", &MetricsReport::mape)
      .def_readonly("nmae", &MetricsReport::nmae)
      .def_readonly("r2", &MetricsReport::r2)
      .def_readonly("y_max", &MetricsReport::y_max);

  m.def("eval_metrics", &eval_metrics, py::arg("y_true"), py::arg("y_pred"));

  // ------------------------------------------------------------------ grid
  py::class_<Bus>(m, "Bus")
      .def(py::init<>())
      .def_readwrite("id", &Bus::id)
      .def_readwrite("demand", &Bus::demand);

  py::class_<Branch>(m, "Branch")
      .def(py::init<>())
      .def_readwrite("id", &Branch::id)
      .def_readwrite("from_bus", &Branch::from_bus)
      .def_readwrite("to_bus", &Branch::to_bus)
      .def_readwrite("reactance", &Branch::reactance)
      .def_readwrite("flow_limit", &Branch::flow_limit)
      .def_readwrite("dfacts", &Branch::dfacts);

  py::class_<Generator>(m, "Generator")
      .def(py::init<>())
      .def_readwrite("id", &Generator::id)
      .def_readwrite("bus", &Generator::bus)
      .def_readwrite("a", &Generator::a)
      .def_readwrite("b", &Generator::b)
      .def_readwrite("c", &Generator::c)
      .def_readwrite("p_min", &Generator::p_min)
      .def_readwrite("p_max", &Generator::p_max)
      .def_readwrite("pr_su", &Generator::pr_su)
      .def_readwrite("pr_sd", &Generator::pr_sd)
      .def_readwrite("initial_on", &Generator::initial_on);

  py::class_<StorageUnit>(m, "StorageUnit")
      .def(py::init<>())
      .def_readwrite("id", &StorageUnit::id)
      .def_readwrite("bus", &StorageUnit::bus)
      .def_readwrite("p_min", &StorageUnit::p_min)
      .def_readwrite("p_max", &StorageUnit::p_max)
      .def_readwrite("e_min", &StorageUnit::e_min)
      .def_readwrite("e_max", &StorageUnit::e_max)
      .def_readwrite("e_initial", &StorageUnit::e_initial)
      .def_readwrite("eta_ch", &StorageUnit::eta_ch)
      .def_readwrite("eta_dis", &StorageUnit::eta_dis)
      .def_readwrite("s_ch", &StorageUnit::s_ch)
      .def_readwrite("s_dis", &StorageUnit::s_dis);

  py::class_<WindFarm>(m, "WindFarm")
      .def(py::init<>())
      .def_readwrite("id", &WindFarm::id)
      .def_readwrite("bus", &WindFarm::bus)
      .def_readwrite("capacity", &WindFarm::capacity)
      .def_readwrite("lambda_price", &WindFarm::lambda_price);

  py::class_<GridModel>(m, "GridModel")
      .def(py::init<>())
      .def_readwrite("buses", &GridModel::buses)
      .def_readwrite("branches", &GridModel::branches)
      .def_readwrite("generators", &GridModel::generators)
      .def_readwrite("storage_units", &GridModel::storage_units)
      .def_readwrite("wind_farms", &GridModel::wind_farms)
      .def_readwrite("horizon", &GridModel::horizon)
      .def("bus_count", &GridModel::bus_count)
      .def("branch_count", &GridModel::branch_count)
      .def("validate", &GridModel::validate);

  py::class_<PerturbationPlan>(m, "PerturbationPlan")
      .def(py::init<>())
      .def_readwrite("deltas", &PerturbationPlan::deltas)
      .def_readwrite("range_low", &PerturbationPlan::range_low)
      .def_readwrite("range_high", &PerturbationPlan::range_high)
      .def("validate", &PerturbationPlan::validate, py::arg("grid"))
      .def("is_zero", &PerturbationPlan::is_zero);

  py::class_<MeasurementMatrix>(m, "MeasurementMatrix")
      .def_readonly("entries", &MeasurementMatrix::entries)
      .def_readonly("branch_rows", &MeasurementMatrix::branch_rows)
      .def("rows", &MeasurementMatrix::rows)
      .def("cols", &MeasurementMatrix::cols);

  m.def(
      "load_grid_json",
      [](const std::string& path) { return load_grid_json(path); },
      py::arg("path"));
  m.def(
      "parse_grid_json",
      [](const std::string& text) { return parse_grid_json(text); },
      py::arg("text"));
  m.def("grid_to_json", &grid_to_json, py::arg("grid"));
  m.def("build_incidence_matrix", &build_incidence_matrix, py::arg("grid"));
  m.def("build_measurement_matrix", &build_measurement_matrix, py::arg("grid"),
        py::arg("plan") = std::optional<PerturbationPlan>{});
  m.def("dc_power_flow", &dc_power_flow, py::arg("grid"),
        py::arg("injections"),
        py::arg("plan") = std::optional<PerturbationPlan>{});
  m.def("apply_perturbation", &apply_perturbation, py::arg("grid"),
        py::arg("plan"));
  m.def("power_transfer_matrix", &power_transfer_matrix, py::arg("grid"));

  // ----------------------------------------------------- networks/training
  py::enum_<Activation>(m, "Activation")
      .value("Relu", Activation::Relu)
      .value("Tanh", Activation::Tanh)
      .value("Sigmoid", Activation::Sigmoid)
      .value("Linear", Activation::Linear);

  py::enum_<LayerSpec::Kind>(m, "LayerKind")
      .value("Dense", LayerSpec::Kind::Dense)
      .value("Lstm", LayerSpec::Kind::Lstm)
      .value("Bilstm", LayerSpec::Kind::Bilstm)
      .value("Conv1d", LayerSpec::Kind::Conv1d)
      .value("ActivationOnly", LayerSpec::Kind::ActivationOnly);

  py::class_<LayerSpec>(m, "LayerSpec")
      .def(py::init<>())
      .def_readwrite("kind", &LayerSpec::kind)
      .def_readwrite("units", &LayerSpec::units)
      .def_readwrite("kernel", &LayerSpec::kernel)
      .def_readwrite("stride", &LayerSpec::stride)
      .def_readwrite("activation", &LayerSpec::activation);

  py::enum_<LossKind>(m, "LossKind")
      .value("Mse", LossKind::Mse)
      .value("GanGenerator", LossKind::GanGenerator)
      .value("GanDiscriminator", LossKind::GanDiscriminator);

  py::class_<NetworkSpec>(m, "NetworkSpec")
      .def(py::init<>())
      .def_readwrite("layers", &NetworkSpec::layers)
      .def_readwrite("loss", &NetworkSpec::loss)
      .def("check", &NetworkSpec::check)
      .def("output_dim", &NetworkSpec::output_dim, py::arg("input_dim"));

  py::enum_<TrainConfig::Optimizer>(m, "Optimizer")
      .value("Sgd", TrainConfig::Optimizer::Sgd)
      .value("Adam", TrainConfig::Optimizer::Adam);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("optimizer", &TrainConfig::optimizer)
      .def_readwrite("gradient_clip", &TrainConfig::gradient_clip);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("loss_history", &TrainResult::loss_history)
      .def_readonly("final_loss", &TrainResult::final_loss);

  m.def("param_count", &param_count, py::arg("spec"), py::arg("input_dim"));
  m.def("init_params", &init_params, py::arg("spec"), py::arg("input_dim"),
        py::arg("seed"));
  m.def("forward_model", &forward_model, py::arg("spec"), py::arg("params"),
        py::arg("input"));
  m.def("train_model", &train_model, py::arg("spec"), py::arg("inputs"),
        py::arg("targets"), py::arg("config"));
  m.def("gradient_check", &gradient_check, py::arg("spec"), py::arg("params"),
        py::arg("inputs"), py::arg("targets"));

  // ------------------------------------------------ forecasting/scenarios
  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init<>())
      .def_readwrite("values", &TimeSeries::values)
      .def_readwrite("start_index", &TimeSeries::start_index)
      .def_readwrite("farm_id", &TimeSeries::farm_id);

  py::class_<ForecastModel>(m, "ForecastModel")
      .def(py::init<>())
      .def_readwrite("spec", &ForecastModel::spec)
      .def_readwrite("params", &ForecastModel::params)
      .def_readwrite("window", &ForecastModel::window)
      .def_readwrite("capacity", &ForecastModel::capacity);

  py::class_<GanGeneratorModel>(m, "GanGeneratorModel")
      .def(py::init<>())
      .def_readwrite("spec", &GanGeneratorModel::spec)
      .def_readwrite("params", &GanGeneratorModel::params)
      .def_readwrite("latent_dim", &GanGeneratorModel::latent_dim)
      .def_readwrite("horizon", &GanGeneratorModel::horizon)
      .def_readwrite("capacity", &GanGeneratorModel::capacity);

  py::class_<ScenarioSet>(m, "ScenarioSet")
      .def(py::init<>())
      .def_readwrite("scenarios", &ScenarioSet::scenarios)
      .def_readwrite("weights", &ScenarioSet::weights)
      .def_readwrite("provenance", &ScenarioSet::provenance)
      .def_readwrite("seed", &ScenarioSet::seed)
      .def("count", &ScenarioSet::count)
      .def("horizon", &ScenarioSet::horizon);

  py::class_<HourStats>(m, "HourStats")
      .def_readonly("mean", &HourStats::mean)
      .def_readonly("std", &HourStats::std)
      .def_readonly("min", &HourStats::min)
      .def_readonly("q25", &HourStats::q25)
      .def_readonly("median", &HourStats::median)
      .def_readonly("q75", &HourStats::q75)
      .def_readonly("max", &HourStats::max);

  m.def(
      "train_forecaster",
      [](const TimeSeries& history, double capacity, const NetworkSpec& spec,
         int window, const TrainConfig& config) {
        std::vector<double> losses;
        ForecastModel model =
            train_forecaster(history, capacity, spec, window, config, &losses);
        return py::make_tuple(model, losses);
      },
      py::arg("history"), py::arg("capacity"), py::arg("spec"),
      py::arg("window"), py::arg("config"),
      "Returns (model, per-epoch loss history).");
  m.def("forecast_wind", &forecast_wind, py::arg("model"), py::arg("history"),
        py::arg("horizon"));
  m.def("persistence_forecast", &persistence_forecast, py::arg("history"),
        py::arg("horizon"));
  m.def(
      "train_scenario_gan",
      [](const TimeSeries& history, double capacity, int horizon,
         const TrainConfig& config, int latent_dim, NetworkSpec generator_spec,
         NetworkSpec discriminator_spec) {
        return train_scenario_gan(history, capacity, horizon, config,
                                  latent_dim, std::move(generator_spec),
                                  std::move(discriminator_spec));
      },
      py::arg("history"), py::arg("capacity"), py::arg("horizon"),
      py::arg("config"), py::arg("latent_dim") = 16,
      py::arg("generator_spec") = NetworkSpec{},
      py::arg("discriminator_spec") = NetworkSpec{});
  m.def("default_gan_generator_spec", &default_gan_generator_spec);
  m.def("default_gan_discriminator_spec", &default_gan_discriminator_spec);
  m.def("generate_scenarios_gan", &generate_scenarios_gan,
        py::arg("generator"), py::arg("count"), py::arg("seed"),
        py::arg("capacity"));
  m.def("generate_scenarios_bootstrap", &generate_scenarios_bootstrap,
        py::arg("base_forecast"), py::arg("history"), py::arg("block_length"),
        py::arg("count"), py::arg("seed"), py::arg("capacity"));
  m.def("scenario_stats", &scenario_stats, py::arg("set"));
  m.def("write_scenario_csv", &write_scenario_csv, py::arg("set"),
        py::arg("farm_id"), py::arg("path"));
  m.def("read_scenario_csv", &read_scenario_csv, py::arg("path"),
        py::arg("farm_id") = -1);

  // ------------------------------------------------------------- scheduler
  py::enum_<SolverKind>(m, "SolverKind")
      .value("Exact", SolverKind::Exact)
      .value("Heuristic", SolverKind::Heuristic);

  py::class_<UnitCommitment>(m, "UnitCommitment")
      .def_readonly("u", &UnitCommitment::u)
      .def_readonly("alpha", &UnitCommitment::alpha)
      .def_readonly("beta", &UnitCommitment::beta);

  py::class_<CostBreakdown>(m, "CostBreakdown")
      .def_readonly("c_ss", &CostBreakdown::c_ss)
      .def_readonly("c_f", &CostBreakdown::c_f)
      .def_readonly("c_w", &CostBreakdown::c_w)
      .def_readonly("c_b", &CostBreakdown::c_b)
      .def_readonly("objective", &CostBreakdown::objective);

  py::class_<DispatchSolution>(m, "DispatchSolution")
      .def_readonly("commitment", &DispatchSolution::commitment)
      .def_readonly("p", &DispatchSolution::p)
      .def_readonly("p_wind", &DispatchSolution::p_wind)
      .def_readonly("p_ch", &DispatchSolution::p_ch)
      .def_readonly("p_dis", &DispatchSolution::p_dis)
      .def_readonly("e", &DispatchSolution::e)
      .def_readonly("costs", &DispatchSolution::costs)
      .def_readonly("curtailment_mwh", &DispatchSolution::curtailment_mwh)
      .def_readonly("flows", &DispatchSolution::flows);

  py::class_<ScheduleProblem>(m, "ScheduleProblem")
      .def(py::init<>())
      .def_readwrite("grid", &ScheduleProblem::grid)
      .def_readwrite("wind_available", &ScheduleProblem::wind_available)
      .def_readwrite("with_storage", &ScheduleProblem::with_storage)
      .def_readwrite("network_constraints",
                     &ScheduleProblem::network_constraints)
      .def_readwrite("solver", &ScheduleProblem::solver);

  py::class_<Violation>(m, "Violation")
      .def_readonly("what", &Violation::what)
      .def_readonly("magnitude", &Violation::magnitude);

  py::class_<BatchStats>(m, "BatchStats")
      .def_readonly("mean", &BatchStats::mean)
      .def_readonly("median", &BatchStats::median)
      .def_readonly("q25", &BatchStats::q25)
      .def_readonly("q75", &BatchStats::q75)
      .def_readonly("min", &BatchStats::min)
      .def_readonly("max", &BatchStats::max)
      .def_readonly("solved", &BatchStats::solved)
      .def_readonly("failed", &BatchStats::failed);

  py::class_<BatchResult>(m, "BatchResult")
      .def_readonly("solutions", &BatchResult::solutions)
      .def_readonly("failures", &BatchResult::failures)
      .def_readonly("stats", &BatchResult::stats);

  m.def("evaluate_costs", &evaluate_costs, py::arg("grid"),
        py::arg("candidate"));
  m.def("check_feasibility", &check_feasibility, py::arg("problem"),
        py::arg("candidate"));
  m.def("solve_schedule", &solve_schedule, py::arg("problem"));
  m.def("brute_force_schedule", &brute_force_schedule, py::arg("problem"));
  m.def("scenario_wind_matrix", &scenario_wind_matrix, py::arg("grid"),
        py::arg("scenarios"), py::arg("s"));
  m.def("stochastic_batch", &stochastic_batch, py::arg("grid"),
        py::arg("scenarios"), py::arg("with_storage"),
        py::arg("network_constraints"),
        py::arg("solver") = SolverKind::Exact);

  // ------------------------------------------------------------------- ddm
  py::class_<AttackBatch>(m, "AttackBatch")
      .def_readonly("vectors", &AttackBatch::vectors)
      .def_readonly("seed", &AttackBatch::seed)
      .def("count", &AttackBatch::count)
      .def("dimension", &AttackBatch::dimension);

  py::class_<DdmConfig>(m, "DdmConfig")
      .def(py::init<>())
      .def_readwrite("delta", &DdmConfig::delta)
      .def_readwrite("range_low", &DdmConfig::range_low)
      .def_readwrite("range_high", &DdmConfig::range_high)
      .def_readwrite("candidate_levels", &DdmConfig::candidate_levels)
      .def_readwrite("attack_count", &DdmConfig::attack_count)
      .def_readwrite("attack_seed", &DdmConfig::attack_seed)
      .def_readwrite("stealthy_attacks", &DdmConfig::stealthy_attacks)
      .def("validate", &DdmConfig::validate);

  py::class_<DdmChoice>(m, "DdmChoice")
      .def_readonly("plan", &DdmChoice::plan)
      .def_readonly("plan_id", &DdmChoice::plan_id)
      .def_readonly("success_rate", &DdmChoice::success_rate)
      .def_readonly("cost_increment", &DdmChoice::cost_increment);

  py::class_<TradeoffRow>(m, "TradeoffRow")
      .def_readonly("delta", &TradeoffRow::delta)
      .def_readonly("success_rate", &TradeoffRow::success_rate)
      .def_readonly("cost_increment", &TradeoffRow::cost_increment)
      .def_readonly("plan_id", &TradeoffRow::plan_id)
      .def_readonly("error", &TradeoffRow::error);

  py::class_<TradeoffCurve>(m, "TradeoffCurve")
      .def_readonly("rows", &TradeoffCurve::rows)
      .def_readonly("plans", &TradeoffCurve::plans)
      .def_readonly("attack_seed", &TradeoffCurve::attack_seed);

  m.def("sample_attack_vectors", &sample_attack_vectors, py::arg("dimension"),
        py::arg("n"), py::arg("seed"));
  m.def("sample_stealthy_attack_vectors", &sample_stealthy_attack_vectors,
        py::arg("H"), py::arg("n"), py::arg("seed"));
  m.def("attack_change_ratios", &attack_change_ratios, py::arg("H"),
        py::arg("H_perturbed"), py::arg("attacks"));
  m.def("detection_success_rate", &detection_success_rate, py::arg("H"),
        py::arg("H_perturbed"), py::arg("attacks"), py::arg("delta"));
  m.def("cost_increment", &cost_increment, py::arg("grid"), py::arg("plan"),
        py::arg("base_problem"));
  m.def("enumerate_candidate_plans", &enumerate_candidate_plans,
        py::arg("grid"), py::arg("config"));
  m.def("optimize_ddm", &optimize_ddm, py::arg("grid"), py::arg("config"),
        py::arg("base_problem"), py::arg("with_storage"));
  m.def("tradeoff_sweep", &tradeoff_sweep, py::arg("grid"),
        py::arg("base_problem"), py::arg("delta_list"), py::arg("config"),
        py::arg("with_storage"));

  // Everything defined above is public API; list it for the package facade.
  py::list names;
  for (auto item : m.attr("__dict__"))
    if (py::str(item).cast<std::string>().rfind("_", 0) != 0)
      names.append(item);
  m.attr("__all__") = names;
}
