#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wtlstm/backtest.hpp"
#include "wtlstm/market_data.hpp"
#include "wtlstm/model.hpp"
#include "wtlstm/model_io.hpp"
#include "wtlstm/report.hpp"
#include "wtlstm/wavelet.hpp"

namespace wtlstm {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a run depends on besides the input CSVs. Loaded from a flat JSON
/// object; see README for the key list.
struct RunConfig {
  std::vector<std::pair<std::string, std::string>> data;  // ticker -> CSV path
  double split_ratio = 0.8;
  ModelConfig model;
  BacktestConventions backtest;
  std::string out_dir = "out";
  std::string algorithm = "WTConv-CA-LSTM";
  std::string wavelet_file;  // optional extra filter-bank table
  int jobs = 1;

  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = {});
  nlohmann::json to_json() const;
  void validate() const;

  std::vector<std::string> tickers() const;
  std::string model_path(const std::string& ticker) const;
  std::string predictions_path(const std::string& ticker) const;
  std::string loss_path(const std::string& ticker) const;
};

RunConfig load_run_config(const std::string& path);

// Filter bank named by the config, consulting the optional table file.
FilterBank resolve_bank(const RunConfig& config);

// Per-ticker model config with a seed derived from the run seed and ticker.
ModelConfig ticker_model_config(const RunConfig& config, const std::string& ticker);

struct TickerData {
  TimeSeriesFrame frame;
  std::size_t train_size = 0;
  FeatureScaler scaler;
};

/// Loads, validates and splits one ticker; checks the split leaves enough
/// training bars for at least one window.
TickerData prepare_ticker(const RunConfig& config, const std::string& ticker, const std::string& path);

/// Forecasts every test-split bar using windows warm-started from the last
/// `window` training bars; returns one record per test bar in price units.
PredictionSeries predict_test_split(const ModelArtifact& artifact, const TickerData& data);

// Subcommands. Each validates every input before writing anything and logs
// progress to `log`. Failures throw ContractError (validation) or
// RuntimeFailure (runtime).
void cmd_ingest_check(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_predict(const RunConfig& config, std::ostream& log);
void cmd_backtest(const RunConfig& config, std::ostream& log);
void cmd_report(const RunConfig& config, std::ostream& log);
void cmd_run_all(const RunConfig& config, std::ostream& log);

}  // namespace wtlstm
