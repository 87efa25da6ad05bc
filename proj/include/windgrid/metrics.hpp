#pragma once

#include <vector>

namespace windgrid {

struct MetricsReport {
  double mse = 0.0;
  double nrmse = 0.0;  // 100 * sqrt(mse) / y_max
  double mape = 0.0;   // 100 * mean absolute error (no division; see README)
  double nmae = 0.0;   // 100 * mean absolute error / y_max
  double r2 = 0.0;
  double y_max = 0.0;  // max |y_true|, used for normalization
};

MetricsReport eval_metrics(const std::vector<double>& y_true,
                           const std::vector<double>& y_pred);

}  // namespace windgrid
