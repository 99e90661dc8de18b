#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtlstm/backtest.hpp"
#include "wtlstm/metrics.hpp"

namespace wtlstm {

inline constexpr const char* kReportFormat = "wtlstm-report";
inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kBuyAndHoldAlgorithm = "Buy-and-Hold";

struct TickerResult {
  PredictionSeries predictions;
  RegressionMetrics metrics;  // raw price units
};

struct ReportBundle {
  std::string algorithm = "WTConv-CA-LSTM";
  std::vector<TickerResult> tickers;
  std::optional<PortfolioReport> portfolio;
  nlohmann::json metadata = nlohmann::json::object();  // config echo, seed, version
};

// Decimal form used by every CSV: 12 significant digits.
std::string format_number(double value);

/// Trading table: algorithm,asset,annualized_return,sharpe,mdd. One row per
/// ticker, "Portfolio" and "B&H Portfolio" under the bundle's algorithm, then
/// the passive per-ticker rows under "Buy-and-Hold". Header only without a
/// portfolio.
std::string trading_metrics_csv(const ReportBundle& bundle);

/// Prediction table: algorithm,asset,mse_price_sq,mae_price,mape,r2.
std::string prediction_metrics_csv(const ReportBundle& bundle);

/// date, portfolio return/equity, buy-and-hold portfolio return/equity, then
/// one equity column per ticker.
std::string equity_curve_csv(const PortfolioReport& report);

/// date,true,predicted,prev_true,return,signal
std::string predictions_csv(const PredictionSeries& series);

nlohmann::json report_json(const ReportBundle& bundle);

/// Writes trading_metrics.csv, prediction_metrics.csv, equity_curve.csv,
/// predictions_<ticker>.csv and report.json into `out_dir`.
void emit_reports(const ReportBundle& bundle, const std::string& out_dir);

/// Reads a predictions CSV. Requires date,true,predicted; prev_true is
/// optional; without it the first row only anchors the previous price and is
/// not itself a trading day.
PredictionSeries load_predictions_csv(const std::string& path, const std::string& ticker);
PredictionSeries parse_predictions_csv(const std::string& text, const std::string& ticker,
                                       const std::string& source);

// Minimal CSV reader for the files above (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};
CsvTable parse_csv(const std::string& text, const std::string& source);

}  // namespace wtlstm
