#pragma once

#include <array>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "wtlstm/tensor.hpp"

namespace wtlstm {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  // Strict ISO-8601 calendar date, YYYY-MM-DD.
  static Date parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

struct OhlcvBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

// Model input channel order.
enum Feature : std::size_t { kOpen = 0, kHigh, kLow, kClose, kVolume };
inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {"open", "high", "low",
                                                                              "close", "volume"};

double feature_value(const OhlcvBar& bar, std::size_t feature);

/// Daily bars for one ticker with strictly increasing dates.
struct TimeSeriesFrame {
  std::string ticker;
  std::vector<OhlcvBar> bars;

  std::size_t size() const { return bars.size(); }
  TimeSeriesFrame slice(std::size_t begin, std::size_t end) const;
  std::vector<double> closes() const;
  // Checks price positivity, the OHLC ordering and date monotonicity.
  void validate() const;
};

/// Reads `date,open,high,low,close,volume` (columns located by header name).
/// The ticker defaults to the file stem.
TimeSeriesFrame load_ohlcv_csv(const std::string& path, std::string ticker = {});
TimeSeriesFrame parse_ohlcv_csv(std::string_view text, std::string ticker, const std::string& source);

struct FrameSplit {
  TimeSeriesFrame train;
  TimeSeriesFrame test;
};

// Chronological cut at floor(ratio * T); no shuffling.
FrameSplit train_test_split(const TimeSeriesFrame& frame, double ratio);

/// Per-feature z-score fitted on training rows only.
struct FeatureScaler {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
  std::size_t fit_rows = 0;
  Date fit_first;
  Date fit_last;

  double apply(double value, std::size_t feature) const {
    return (value - mean[feature]) / stddev[feature];
  }
  double invert(double z, std::size_t feature) const { return z * stddev[feature] + mean[feature]; }
  // [T x kFeatureCount] scaled features.
  Tensor transform(const TimeSeriesFrame& frame) const;
};

// Population statistics; throws ContractError on any zero-variance feature.
FeatureScaler fit_scaler(const TimeSeriesFrame& train);

struct WindowedDataset {
  Tensor inputs;                   // [samples x kFeatureCount x window]
  std::vector<double> targets;     // scaled close of the bar after each window
  std::vector<Date> target_dates;  // date of that bar
  std::vector<std::size_t> target_index;  // its index in the source frame
  std::size_t window = 0;

  std::size_t size() const { return targets.size(); }
};

/// Sample i covers bars [i, i + window) and targets the scaled close of bar
/// i + window; there are frame.size() - window samples.
WindowedDataset make_windows(const TimeSeriesFrame& frame, const FeatureScaler& scaler,
                             std::size_t window);

}  // namespace wtlstm
