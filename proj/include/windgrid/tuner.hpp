#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace windgrid {

struct SearchSpace {
  struct Categorical {
    std::string name;
    std::vector<std::string> options;
  };
  struct Continuous {
    std::string name;
    double low = 0.0;
    double high = 0.0;
    bool log_scale = true;
  };
  std::vector<Categorical> categorical;
  std::vector<Continuous> continuous;

  bool empty() const { return categorical.empty() && continuous.empty(); }
};

struct TrialConfig {
  std::map<std::string, std::string> choices;
  std::map<std::string, double> values;
  std::uint64_t seed = 0;  // per-trial seed = base seed + trial index
};

struct TrialRecord {
  TrialConfig config;
  double loss = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // nonempty when the evaluator failed
};

struct TuneResult {
  TrialConfig best;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<TrialRecord> trials;
};

// Seeded random search; evaluator failures are recorded per trial, not fatal.
TuneResult tune_hyperparams(
    const SearchSpace& space,
    const std::function<double(const TrialConfig&)>& objective, int trials,
    std::uint64_t seed);

}  // namespace windgrid
