#include "wtlstm/metrics.hpp"

#include <cmath>
#include <string>

#include "wtlstm/error.hpp"

namespace wtlstm {

RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> actual) {
  require(predicted.size() == actual.size(), "regression_metrics: length mismatch");
  require(actual.size() >= 2, "regression_metrics: need at least two points");
  const auto n = static_cast<double>(actual.size());

  double mean = 0.0;
  for (double y : actual) mean += y;
  mean /= n;

  RegressionMetrics m;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double y = actual[i];
    require(y != 0.0, "regression_metrics: MAPE undefined, actual value is zero at index " + std::to_string(i));
    const double e = predicted[i] - y;
    ss_res += e * e;
    m.mae += std::abs(e);
    m.mape += std::abs(e) / std::abs(y);
    ss_tot += (y - mean) * (y - mean);
  }
  require(ss_tot > 0.0, "regression_metrics: R^2 undefined, actual values are constant");
  m.mse = ss_res / n;
  m.mae /= n;
  m.mape /= n;
  m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

}  // namespace wtlstm
