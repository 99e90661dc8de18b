#pragma once

#include <span>

namespace wtlstm {

struct RegressionMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double mape = 0.0;  // fraction, not percent
  double r2 = 0.0;    // 1 - SS_res / SS_tot
};

/// Accuracy of `predicted` against `actual`, in the units of the inputs.
/// Throws ContractError on length mismatch, fewer than two points, a zero
/// actual value (MAPE undefined) or constant actuals (R^2 undefined).
RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> actual);

}  // namespace wtlstm
