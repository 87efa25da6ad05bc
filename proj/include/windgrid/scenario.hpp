#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "windgrid/nn.hpp"
#include "windgrid/scenario_set.hpp"

namespace windgrid {

struct TimeSeries {
  std::vector<double> values;  // MW per hour
  int start_index = 0;
  int farm_id = 0;
};

// Autoregressive one-step forecaster over a sliding window of recent values.
struct ForecastModel {
  NetworkSpec spec;
  Eigen::VectorXd params;
  int window = 24;
  double capacity = 0.0;  // clip bound for rollouts
};

// Trained GAN generator ready for sampling. The network works in per-unit
// space (series / capacity); samples are rescaled by capacity.
struct GanGeneratorModel {
  NetworkSpec spec;
  Eigen::VectorXd params;
  int latent_dim = 16;
  int horizon = 24;
  double capacity = 0.0;
};

// Chops the history into day-length rows, normalizes by capacity, and runs
// adversarial training. Default architectures are used when the specs have
// no layers. The per-epoch trace is appended to *trace when provided.
GanGeneratorModel train_scenario_gan(const TimeSeries& history,
                                     double capacity, int horizon,
                                     const TrainConfig& config,
                                     int latent_dim = 16,
                                     NetworkSpec generator_spec = {},
                                     NetworkSpec discriminator_spec = {},
                                     std::vector<GanTraceRow>* trace = nullptr);

NetworkSpec default_gan_generator_spec();
NetworkSpec default_gan_discriminator_spec();

// Sliding-window training of a forecaster on a single series. The per-epoch
// loss history is appended to *loss_history when provided.
ForecastModel train_forecaster(const TimeSeries& history, double capacity,
                               const NetworkSpec& spec, int window,
                               const TrainConfig& config,
                               std::vector<double>* loss_history = nullptr);

// Rollout: each step consumes the window of most recent observed-then-
// predicted values; outputs clipped to [0, capacity].
TimeSeries forecast_wind(const ForecastModel& model, const TimeSeries& history,
                         int horizon);

// Last observed value held for the whole horizon (reference baseline).
TimeSeries persistence_forecast(const TimeSeries& history, int horizon);

ScenarioSet generate_scenarios_gan(const GanGeneratorModel& generator,
                                   int count, std::uint64_t seed,
                                   double capacity);

// Day-block residual resampling around a base forecast: residual blocks are
// day-length segments of history minus its per-hour-of-day mean profile.
ScenarioSet generate_scenarios_bootstrap(const TimeSeries& base_forecast,
                                         const TimeSeries& history,
                                         int block_length, int count,
                                         std::uint64_t seed, double capacity);

struct HourStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

// Weighted per-hour statistics; quantiles are weighted lower quantiles.
std::vector<HourStats> scenario_stats(const ScenarioSet& set);

// Long-format CSV: scenario_id,farm_id,hour,available_mw.
void write_scenario_csv(const ScenarioSet& set, int farm_id,
                        const std::string& path);
ScenarioSet read_scenario_csv(const std::string& path, int farm_id = -1);

// Stats CSV: hour,mean,std,min,q25,median,q75,max.
void write_stats_csv(const std::vector<HourStats>& stats,
                     const std::string& path);

}  // namespace windgrid
