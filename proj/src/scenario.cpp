#include "windgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "windgrid/errors.hpp"
#include "windgrid/rng.hpp"

namespace windgrid {

namespace {

double clip(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

std::string format_mw(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

ForecastModel train_forecaster(const TimeSeries& history, double capacity,
                               const NetworkSpec& spec, int window,
                               const TrainConfig& config,
                               std::vector<double>* loss_history) {
  if (window < 1) throw InvalidArgument("window must be >= 1");
  if (capacity <= 0.0) throw InvalidArgument("capacity must be > 0");
  const int n = static_cast<int>(history.values.size());
  if (n < window + 1)
    throw InsufficientHistory("need at least window+1 observations to train");

  std::vector<Eigen::MatrixXd> inputs, targets;
  for (int t = window; t < n; ++t) {
    Eigen::MatrixXd in(window, 1);
    for (int k = 0; k < window; ++k) in(k, 0) = history.values[t - window + k];
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = history.values[t];
    inputs.push_back(std::move(in));
    targets.push_back(std::move(out));
  }
  const TrainResult trained = train_model(spec, inputs, targets, config);
  if (loss_history)
    loss_history->insert(loss_history->end(), trained.loss_history.begin(),
                         trained.loss_history.end());

  ForecastModel model;
  model.spec = spec;
  model.params = trained.params;
  model.window = window;
  model.capacity = capacity;
  return model;
}

TimeSeries forecast_wind(const ForecastModel& model, const TimeSeries& history,
                         int horizon) {
  if (horizon < 0) throw InvalidArgument("horizon must be >= 0");
  TimeSeries out;
  out.farm_id = history.farm_id;
  out.start_index = history.start_index + static_cast<int>(history.values.size());
  if (horizon == 0) return out;
  if (static_cast<int>(history.values.size()) < model.window)
    throw InsufficientHistory("history shorter than the model window");
  if (model.params.size() == 0)
    throw ModelMissing("forecaster has no trained parameters");

  std::vector<double> buffer(history.values.end() - model.window,
                             history.values.end());
  for (int t = 0; t < horizon; ++t) {
    Eigen::MatrixXd in(model.window, 1);
    for (int k = 0; k < model.window; ++k) in(k, 0) = buffer[k];
    const Eigen::MatrixXd pred = forward_model(model.spec, model.params, in);
    const double y =
        clip(pred(pred.rows() - 1, 0), 0.0, model.capacity);
    out.values.push_back(y);
    buffer.erase(buffer.begin());
    buffer.push_back(y);
  }
  return out;
}

TimeSeries persistence_forecast(const TimeSeries& history, int horizon) {
  if (horizon < 0) throw InvalidArgument("horizon must be >= 0");
  if (history.values.empty())
    throw InsufficientHistory("persistence needs at least one observation");
  TimeSeries out;
  out.farm_id = history.farm_id;
  out.start_index = history.start_index + static_cast<int>(history.values.size());
  out.values.assign(static_cast<size_t>(horizon), history.values.back());
  return out;
}

NetworkSpec default_gan_generator_spec() {
  NetworkSpec spec;
  spec.loss = LossKind::GanGenerator;
  spec.layers = {
      {LayerSpec::Kind::Dense, 16, 0, 1, Activation::Linear},
      {LayerSpec::Kind::ActivationOnly, 0, 0, 1, Activation::Tanh},
      {LayerSpec::Kind::Conv1d, 8, 5, 1, Activation::Linear},
      {LayerSpec::Kind::ActivationOnly, 0, 0, 1, Activation::Tanh},
      {LayerSpec::Kind::Dense, 1, 0, 1, Activation::Linear},
      {LayerSpec::Kind::ActivationOnly, 0, 0, 1, Activation::Sigmoid},
  };
  return spec;
}

NetworkSpec default_gan_discriminator_spec() {
  NetworkSpec spec;
  spec.loss = LossKind::GanDiscriminator;
  spec.layers = {
      {LayerSpec::Kind::Conv1d, 8, 5, 1, Activation::Linear},
      {LayerSpec::Kind::ActivationOnly, 0, 0, 1, Activation::Tanh},
      {LayerSpec::Kind::Dense, 8, 0, 1, Activation::Linear},
      {LayerSpec::Kind::ActivationOnly, 0, 0, 1, Activation::Tanh},
      {LayerSpec::Kind::Dense, 1, 0, 1, Activation::Linear},
  };
  return spec;
}

GanGeneratorModel train_scenario_gan(const TimeSeries& history,
                                     double capacity, int horizon,
                                     const TrainConfig& config, int latent_dim,
                                     NetworkSpec generator_spec,
                                     NetworkSpec discriminator_spec,
                                     std::vector<GanTraceRow>* trace) {
  if (capacity <= 0.0) throw InvalidArgument("capacity must be > 0");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  const int rows = static_cast<int>(history.values.size()) / horizon;
  if (rows < 2)
    throw InsufficientHistory("need at least two day-length blocks of history");
  if (generator_spec.layers.empty())
    generator_spec = default_gan_generator_spec();
  if (discriminator_spec.layers.empty())
    discriminator_spec = default_gan_discriminator_spec();

  Eigen::MatrixXd real(rows, horizon);
  for (int r = 0; r < rows; ++r)
    for (int t = 0; t < horizon; ++t)
      real(r, t) = clip(history.values[static_cast<size_t>(r * horizon + t)] /
                            capacity,
                        0.0, 1.0);

  const GanResult trained = train_convgan(generator_spec, discriminator_spec,
                                          real, config, latent_dim);
  if (trace)
    trace->insert(trace->end(), trained.trace.begin(), trained.trace.end());

  GanGeneratorModel model;
  model.spec = generator_spec;
  model.params = trained.generator_params;
  model.latent_dim = latent_dim;
  model.horizon = horizon;
  model.capacity = capacity;
  return model;
}

ScenarioSet generate_scenarios_gan(const GanGeneratorModel& generator,
                                   int count, std::uint64_t seed,
                                   double capacity) {
  if (count < 1) throw InvalidArgument("scenario count must be >= 1");
  if (generator.params.size() == 0)
    throw ModelMissing("GAN generator has no trained parameters");
  if (generator.capacity <= 0.0)
    throw InvalidArgument("generator capacity must be > 0");
  ScenarioSet set;
  set.provenance = "gan";
  set.seed = seed;
  set.scenarios = generator.capacity *
                  gan_sample(generator.spec, generator.params,
                             generator.latent_dim, count, generator.horizon,
                             seed);
  for (Eigen::Index r = 0; r < set.scenarios.rows(); ++r)
    for (Eigen::Index c = 0; c < set.scenarios.cols(); ++c)
      set.scenarios(r, c) = clip(set.scenarios(r, c), 0.0, capacity);
  set.weights = Eigen::VectorXd::Constant(count, 1.0 / count);
  return set;
}

ScenarioSet generate_scenarios_bootstrap(const TimeSeries& base_forecast,
                                         const TimeSeries& history,
                                         int block_length, int count,
                                         std::uint64_t seed, double capacity) {
  if (count < 1) throw InvalidArgument("scenario count must be >= 1");
  if (block_length < 1) throw InvalidArgument("block length must be >= 1");
  if (base_forecast.values.empty())
    throw InvalidArgument("base forecast must be nonempty");
  const int blocks = static_cast<int>(history.values.size()) / block_length;
  if (blocks < 1)
    throw InsufficientHistory("history shorter than one residual block");

  // Hour-of-block mean profile over the complete blocks.
  std::vector<double> profile(block_length, 0.0);
  for (int b = 0; b < blocks; ++b)
    for (int h = 0; h < block_length; ++h)
      profile[h] += history.values[b * block_length + h];
  for (double& v : profile) v /= blocks;

  const int horizon = static_cast<int>(base_forecast.values.size());
  ScenarioSet set;
  set.provenance = "bootstrap";
  set.seed = seed;
  set.scenarios.resize(count, horizon);
  Rng rng(seed);
  for (int s = 0; s < count; ++s) {
    const int b = static_cast<int>(rng.below(blocks));
    for (int t = 0; t < horizon; ++t) {
      const int h = t % block_length;
      const double residual = history.values[b * block_length + h] - profile[h];
      set.scenarios(s, t) =
          clip(base_forecast.values[t] + residual, 0.0, capacity);
    }
  }
  set.weights = Eigen::VectorXd::Constant(count, 1.0 / count);
  return set;
}

std::vector<HourStats> scenario_stats(const ScenarioSet& set) {
  if (set.count() < 1) throw InvalidArgument("scenario set is empty");
  const double wsum = set.weights.sum();
  if (set.weights.size() != set.count() || set.weights.minCoeff() < 0.0 ||
      std::abs(wsum - 1.0) > 1e-12)
    throw InvalidArgument("weights must be nonnegative and sum to 1");

  std::vector<HourStats> out(static_cast<size_t>(set.horizon()));
  for (int t = 0; t < set.horizon(); ++t) {
    std::vector<std::pair<double, double>> vw;  // (value, weight)
    double mean = 0.0;
    for (int s = 0; s < set.count(); ++s) {
      vw.emplace_back(set.scenarios(s, t), set.weights(s));
      mean += set.weights(s) * set.scenarios(s, t);
    }
    double var = 0.0;
    for (const auto& [v, w] : vw) var += w * (v - mean) * (v - mean);
    std::sort(vw.begin(), vw.end());

    auto quantile = [&vw](double q) {
      double cum = 0.0;
      for (const auto& [v, w] : vw) {
        cum += w;
        if (cum >= q - 1e-15) return v;
      }
      return vw.back().first;
    };

    HourStats& h = out[static_cast<size_t>(t)];
    h.mean = mean;
    h.std = std::sqrt(std::max(0.0, var));
    h.min = vw.front().first;
    h.max = vw.back().first;
    h.q25 = quantile(0.25);
    h.median = quantile(0.5);
    h.q75 = quantile(0.75);
  }
  return out;
}

void write_scenario_csv(const ScenarioSet& set, int farm_id,
                        const std::string& path) {
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << "scenario_id,farm_id,hour,available_mw\n";
  for (int s = 0; s < set.count(); ++s)
    for (int t = 0; t < set.horizon(); ++t)
      file << s << ',' << farm_id << ',' << t << ','
           << format_mw(set.scenarios(s, t)) << '\n';
}

ScenarioSet read_scenario_csv(const std::string& path, int farm_id) {
  std::ifstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(file, line))
    throw HeaderMismatch("scenario CSV is empty");
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "scenario_id,farm_id,hour,available_mw")
    throw HeaderMismatch("scenario CSV header must be "
                         "scenario_id,farm_id,hour,available_mw");

  std::map<std::pair<int, int>, double> cells;
  std::set<int> farms;
  int max_s = -1, max_t = -1;
  int row = 1;
  while (std::getline(file, line)) {
    ++row;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    int vals_i[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ss, tok, ','))
        throw ParseError("scenario CSV row " + std::to_string(row) +
                         ": too few fields");
      try {
        vals_i[k] = std::stoi(tok);
      } catch (...) {
        throw ParseError("scenario CSV row " + std::to_string(row) +
                         " column " + std::to_string(k + 1) +
                         ": not an integer");
      }
    }
    if (!std::getline(ss, tok, ','))
      throw ParseError("scenario CSV row " + std::to_string(row) +
                       ": missing available_mw");
    double mw;
    try {
      size_t used = 0;
      mw = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (...) {
      throw ParseError("scenario CSV row " + std::to_string(row) +
                       " column 4: not a number");
    }
    if (farm_id >= 0 && vals_i[1] != farm_id) continue;
    farms.insert(vals_i[1]);
    if (farms.size() > 1)
      throw ParseError("scenario CSV mixes multiple farms; pass a farm id");
    cells[{vals_i[0], vals_i[2]}] = mw;
    max_s = std::max(max_s, vals_i[0]);
    max_t = std::max(max_t, vals_i[2]);
  }
  if (cells.empty()) throw ParseError("scenario CSV holds no usable rows");
  const int S = max_s + 1, T = max_t + 1;
  if (cells.size() != static_cast<size_t>(S) * static_cast<size_t>(T))
    throw ParseError("scenario CSV is not a dense scenario x hour grid");

  ScenarioSet set;
  set.provenance = "file";
  set.scenarios.resize(S, T);
  for (const auto& [key, mw] : cells) set.scenarios(key.first, key.second) = mw;
  set.weights = Eigen::VectorXd::Constant(S, 1.0 / S);
  return set;
}

void write_stats_csv(const std::vector<HourStats>& stats,
                     const std::string& path) {
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << "hour,mean,std,min,q25,median,q75,max\n";
  for (size_t t = 0; t < stats.size(); ++t) {
    const HourStats& h = stats[t];
    file << t << ',' << format_mw(h.mean) << ',' << format_mw(h.std) << ','
         << format_mw(h.min) << ',' << format_mw(h.q25) << ','
         << format_mw(h.median) << ',' << format_mw(h.q75) << ','
         << format_mw(h.max) << '\n';
  }
}

}  // namespace windgrid
