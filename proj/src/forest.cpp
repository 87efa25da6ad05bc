#include "windgrid/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "windgrid/errors.hpp"
#include "windgrid/rng.hpp"

namespace windgrid {

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& y;
  int max_depth;
  int min_leaf;
  int feature_subset;
  Rng& rng;
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    double mean = 0.0;
    for (int r : rows) mean += y[static_cast<size_t>(r)];
    mean /= static_cast<double>(rows.size());

    TreeNode node;
    node.value = mean;
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);

    if (depth >= max_depth ||
        static_cast<int>(rows.size()) < 2 * min_leaf)
      return id;

    double base_sse = 0.0;
    for (int r : rows) {
      const double d = y[static_cast<size_t>(r)] - mean;
      base_sse += d * d;
    }
    if (base_sse <= 1e-12) return id;

    // Feature subset resampled per node (draw without replacement).
    const int d_total = static_cast<int>(x[0].size());
    std::vector<int> feats(static_cast<size_t>(d_total));
    std::iota(feats.begin(), feats.end(), 0);
    for (size_t i = feats.size(); i > 1; --i)
      std::swap(feats[i - 1], feats[rng.below(i)]);
    feats.resize(static_cast<size_t>(std::min(d_total, feature_subset)));
    std::sort(feats.begin(), feats.end());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_sse = base_sse - 1e-12;

    for (int f : feats) {
      std::vector<std::pair<double, double>> fv;  // (feature value, target)
      fv.reserve(rows.size());
      for (int r : rows)
        fv.emplace_back(x[static_cast<size_t>(r)][static_cast<size_t>(f)],
                        y[static_cast<size_t>(r)]);
      std::sort(fv.begin(), fv.end());

      // Prefix sums over the sorted order; candidate cuts sit between
      // distinct adjacent feature values.
      double left_sum = 0.0, left_sq = 0.0;
      double total_sum = 0.0, total_sq = 0.0;
      for (const auto& [fx, ty] : fv) {
        total_sum += ty;
        total_sq += ty * ty;
      }
      const int n = static_cast<int>(fv.size());
      for (int i = 0; i < n - 1; ++i) {
        left_sum += fv[static_cast<size_t>(i)].second;
        left_sq += fv[static_cast<size_t>(i)].second *
                   fv[static_cast<size_t>(i)].second;
        const int nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        if (fv[static_cast<size_t>(i)].first ==
            fv[static_cast<size_t>(i + 1)].first)
          continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = f;
          best_threshold = 0.5 * (fv[static_cast<size_t>(i)].first +
                                  fv[static_cast<size_t>(i + 1)].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      if (x[static_cast<size_t>(r)][static_cast<size_t>(best_feature)] <=
          best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) return id;

    tree.nodes[static_cast<size_t>(id)].feature = best_feature;
    tree.nodes[static_cast<size_t>(id)].threshold = best_threshold;
    const int left = build(left_rows, depth + 1);
    tree.nodes[static_cast<size_t>(id)].left = left;
    const int right = build(right_rows, depth + 1);
    tree.nodes[static_cast<size_t>(id)].right = right;
    return id;
  }
};

}  // namespace

double Tree::predict(const std::vector<double>& x) const {
  int at = 0;
  while (!nodes[static_cast<size_t>(at)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<size_t>(at)];
    at = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(at)].value;
}

double ForestModel::predict(const std::vector<double>& x) const {
  if (trees.empty()) throw ModelMissing("forest holds no trees");
  if (static_cast<int>(x.size()) != static_cast<int>(features.size()) &&
      !features.empty())
    throw InvalidArgument("feature vector length does not match the model");
  double sum = 0.0;
  for (const Tree& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

ForestModel fit_forest(const std::vector<std::vector<double>>& x,
                       const std::vector<double>& y,
                       const ForestConfig& config) {
  if (config.tree_count < 1 || config.max_depth < 1 || config.min_leaf < 1)
    throw InvalidArgument("forest config values must be >= 1");
  if (x.empty() || x.size() != y.size())
    throw InsufficientData("need equal nonempty sample and target counts");
  const int n = static_cast<int>(x.size());
  const int d = static_cast<int>(x[0].size());
  if (d < 1) throw InsufficientData("need at least one feature");
  for (const auto& row : x)
    if (static_cast<int>(row.size()) != d)
      throw InvalidArgument("ragged feature matrix");

  ForestModel model;
  model.config = config;
  if (model.config.feature_subset <= 0)
    model.config.feature_subset =
        static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  // Out-of-bag accumulators.
  std::vector<double> oob_sum(static_cast<size_t>(n), 0.0);
  std::vector<int> oob_count(static_cast<size_t>(n), 0);

  for (int t = 0; t < config.tree_count; ++t) {
    Rng rng(config.seed + static_cast<std::uint64_t>(t));
    std::vector<int> bag(static_cast<size_t>(n));
    std::vector<bool> in_bag(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      const int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      bag[static_cast<size_t>(i)] = pick;
      in_bag[static_cast<size_t>(pick)] = true;
    }
    TreeBuilder builder{x, y, model.config.max_depth, model.config.min_leaf,
                        model.config.feature_subset, rng, {}};
    builder.build(bag, 0);
    model.trees.push_back(std::move(builder.tree));

    for (int i = 0; i < n; ++i) {
      if (in_bag[static_cast<size_t>(i)]) continue;
      oob_sum[static_cast<size_t>(i)] +=
          model.trees.back().predict(x[static_cast<size_t>(i)]);
      ++oob_count[static_cast<size_t>(i)];
    }
  }

  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  double ss_tot = 0.0, ss_res = 0.0;
  int scored = 0;
  for (int i = 0; i < n; ++i) {
    if (oob_count[static_cast<size_t>(i)] == 0) continue;
    const double pred = oob_sum[static_cast<size_t>(i)] /
                        oob_count[static_cast<size_t>(i)];
    const double yi = y[static_cast<size_t>(i)];
    ss_res += (yi - pred) * (yi - pred);
    ss_tot += (yi - y_mean) * (yi - y_mean);
    ++scored;
  }
  if (scored > 1 && ss_tot > 1e-12) {
    model.oob_r2 = 1.0 - ss_res / ss_tot;
    model.oob_defined = true;
  }
  return model;
}

ForestModel fit_imputer(const Dataset& data, const std::string& target_column,
                        const ForestConfig& config) {
  const int target = data.column_index(target_column);
  if (target < 0)
    throw InvalidArgument("no column named '" + target_column + "'");
  if (data.column_count() < 2)
    throw InsufficientData("imputation needs at least one predictor column");

  std::vector<std::string> features;
  std::vector<int> feature_cols;
  for (int c = 0; c < data.column_count(); ++c) {
    if (c == target) continue;
    features.push_back(data.columns[static_cast<size_t>(c)]);
    feature_cols.push_back(c);
  }

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int r = 0; r < data.row_count(); ++r) {
    bool complete = !data.mask[static_cast<size_t>(target)][static_cast<size_t>(r)];
    for (int c : feature_cols)
      complete = complete &&
                 !data.mask[static_cast<size_t>(c)][static_cast<size_t>(r)];
    if (!complete) continue;
    std::vector<double> row;
    for (int c : feature_cols)
      row.push_back(data.values[static_cast<size_t>(c)][static_cast<size_t>(r)]);
    x.push_back(std::move(row));
    y.push_back(data.values[static_cast<size_t>(target)][static_cast<size_t>(r)]);
  }
  if (static_cast<int>(x.size()) < 20)
    throw InsufficientData("need >= 20 complete rows for '" + target_column +
                           "', have " + std::to_string(x.size()));

  ForestModel model = fit_forest(x, y, config);
  model.target = target_column;
  model.features = std::move(features);
  return model;
}

Dataset impute_missing(const Dataset& data,
                       const std::map<std::string, ForestModel>& models) {
  Dataset out = data;

  // Observed column means back missing predictors during prediction.
  std::vector<double> col_mean(static_cast<size_t>(data.column_count()), 0.0);
  std::vector<int> col_n(static_cast<size_t>(data.column_count()), 0);
  for (int c = 0; c < data.column_count(); ++c) {
    for (int r = 0; r < data.row_count(); ++r) {
      if (data.mask[static_cast<size_t>(c)][static_cast<size_t>(r)]) continue;
      col_mean[static_cast<size_t>(c)] +=
          data.values[static_cast<size_t>(c)][static_cast<size_t>(r)];
      ++col_n[static_cast<size_t>(c)];
    }
    if (col_n[static_cast<size_t>(c)] > 0)
      col_mean[static_cast<size_t>(c)] /= col_n[static_cast<size_t>(c)];
  }

  // Most-complete column first.
  std::vector<std::pair<int, int>> by_missing;  // (missing count, column)
  for (int c = 0; c < data.column_count(); ++c) {
    int miss = 0;
    for (int r = 0; r < data.row_count(); ++r)
      miss += data.mask[static_cast<size_t>(c)][static_cast<size_t>(r)] ? 1 : 0;
    if (miss > 0) by_missing.emplace_back(miss, c);
  }
  std::sort(by_missing.begin(), by_missing.end());

  for (const auto& [miss, c] : by_missing) {
    (void)miss;
    const std::string& name = data.columns[static_cast<size_t>(c)];
    const auto it = models.find(name);
    if (it == models.end())
      throw MissingModel("no imputation model for column '" + name + "'");
    const ForestModel& model = it->second;

    for (int r = 0; r < data.row_count(); ++r) {
      if (!out.mask[static_cast<size_t>(c)][static_cast<size_t>(r)]) continue;
      std::vector<double> x;
      int available = 0;
      for (const std::string& feat : model.features) {
        const int fc = out.column_index(feat);
        if (fc < 0)
          throw MissingModel("model for '" + name +
                             "' references unknown column '" + feat + "'");
        if (out.mask[static_cast<size_t>(fc)][static_cast<size_t>(r)]) {
          x.push_back(col_mean[static_cast<size_t>(fc)]);
        } else {
          x.push_back(
              out.values[static_cast<size_t>(fc)][static_cast<size_t>(r)]);
          ++available;
        }
      }
      if (available == 0)
        throw CircularMissing("row " + std::to_string(r) +
                              " is missing every predictor of '" + name + "'");
      out.values[static_cast<size_t>(c)][static_cast<size_t>(r)] =
          model.predict(x);
      out.mask[static_cast<size_t>(c)][static_cast<size_t>(r)] = false;
    }
  }
  return out;
}

std::string serialize_forest(const ForestModel& model) {
  nlohmann::json doc;
  doc["target"] = model.target;
  doc["features"] = model.features;
  doc["tree_count"] = model.config.tree_count;
  doc["max_depth"] = model.config.max_depth;
  doc["min_leaf"] = model.config.min_leaf;
  doc["feature_subset"] = model.config.feature_subset;
  doc["seed"] = model.config.seed;
  doc["oob_r2"] = model.oob_defined ? nlohmann::json(model.oob_r2)
                                    : nlohmann::json(nullptr);
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes)
      nodes.push_back({{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right},
                       {"v", n.value}});
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

}  // namespace windgrid
