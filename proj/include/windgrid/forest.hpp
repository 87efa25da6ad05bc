#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "windgrid/dataset.hpp"

namespace windgrid {

struct TreeNode {
  int feature = -1;        // split feature (index into the feature list)
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean
  bool is_leaf() const { return left < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  double predict(const std::vector<double>& x) const;
};

struct ForestConfig {
  int tree_count = 100;
  int max_depth = 12;
  int min_leaf = 5;
  int feature_subset = 0;  // 0 means ceil(sqrt(feature count))
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestConfig config;
  std::string target;
  std::vector<std::string> features;  // predictor columns, in order
  double oob_r2 = 0.0;
  bool oob_defined = false;  // false for zero-variance targets

  double predict(const std::vector<double>& x) const;  // mean over trees
};

// Bagged variance-reduction regression trees on a feature matrix (row-major
// sample rows). Midpoint thresholds; the feature subset is resampled at
// every node; per-tree bootstrap seed is config.seed + tree index.
ForestModel fit_forest(const std::vector<std::vector<double>>& x,
                       const std::vector<double>& y,
                       const ForestConfig& config);

// Forest for one target column trained on rows where the target and every
// other column are present.
ForestModel fit_imputer(const Dataset& data, const std::string& target_column,
                        const ForestConfig& config);

// Fill every masked cell, most-complete column first. Missing predictor
// values fall back to the column's observed mean; a row missing every
// feature of some model is an error.
Dataset impute_missing(const Dataset& data,
                       const std::map<std::string, ForestModel>& models);

// Canonical textual form (used for determinism checks and model files).
std::string serialize_forest(const ForestModel& model);

}  // namespace windgrid
