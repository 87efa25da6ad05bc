#include "windgrid/metrics.hpp"

#include <cmath>
#include <limits>

#include "windgrid/errors.hpp"

namespace windgrid {

MetricsReport eval_metrics(const std::vector<double>& y_true,
                           const std::vector<double>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw LengthMismatch("series must be nonempty and equal-length");

  const double n = static_cast<double>(y_true.size());
  double se = 0.0, ae = 0.0, y_max = 0.0, mean_true = 0.0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (!std::isfinite(y_true[i]) || !std::isfinite(y_pred[i]))
      throw NonFiniteValue("metric inputs must be finite");
    const double e = y_true[i] - y_pred[i];
    se += e * e;
    ae += std::abs(e);
    y_max = std::max(y_max, std::abs(y_true[i]));
    mean_true += y_true[i];
  }
  mean_true /= n;

  MetricsReport report;
  report.mse = se / n;
  report.mape = 100.0 * ae / n;
  report.y_max = y_max;
  if (y_max <= 0.0)
    throw ZeroYMax("normalized metrics need max |y_true| > 0");
  report.nrmse = 100.0 * std::sqrt(report.mse) / y_max;
  report.nmae = 100.0 * (ae / n) / y_max;

  double ss_tot = 0.0;
  for (double y : y_true) ss_tot += (y - mean_true) * (y - mean_true);
  if (ss_tot > 0.0)
    report.r2 = 1.0 - se / ss_tot;
  else
    report.r2 = se == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace windgrid
