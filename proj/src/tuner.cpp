#include "windgrid/tuner.hpp"

#include <cmath>

#include "windgrid/errors.hpp"
#include "windgrid/rng.hpp"

namespace windgrid {

TuneResult tune_hyperparams(
    const SearchSpace& space,
    const std::function<double(const TrialConfig&)>& objective, int trials,
    std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("tuner needs trials >= 1");
  if (space.empty()) throw InvalidArgument("search space must be nonempty");
  for (const auto& dim : space.categorical)
    if (dim.options.empty())
      throw InvalidArgument("categorical dimension '" + dim.name +
                            "' has no options");
  for (const auto& dim : space.continuous) {
    if (!(dim.low < dim.high) || (dim.log_scale && dim.low <= 0.0))
      throw InvalidArgument("continuous dimension '" + dim.name +
                            "' has invalid bounds");
  }

  Rng rng(seed);
  TuneResult result;
  for (int trial = 0; trial < trials; ++trial) {
    TrialRecord record;
    record.config.seed = seed + static_cast<std::uint64_t>(trial);
    for (const auto& dim : space.categorical)
      record.config.choices[dim.name] =
          dim.options[rng.below(dim.options.size())];
    for (const auto& dim : space.continuous) {
      double v;
      if (dim.log_scale)
        v = std::exp(rng.uniform(std::log(dim.low), std::log(dim.high)));
      else
        v = rng.uniform(dim.low, dim.high);
      record.config.values[dim.name] = v;
    }
    try {
      record.loss = objective(record.config);
      if (record.loss < result.best_loss) {
        result.best_loss = record.loss;
        result.best = record.config;
      }
    } catch (const std::exception& e) {
      record.error = e.what();
    }
    result.trials.push_back(std::move(record));
  }
  if (!std::isfinite(result.best_loss) && result.best.choices.empty() &&
      result.best.values.empty())
    throw InvalidArgument("every tuning trial failed");
  return result;
}

}  // namespace windgrid
