#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wtlstm/market_data.hpp"

namespace wtlstm {

struct PredictionRecord {
  Date date;
  double true_price = 0.0;
  double predicted = 0.0;
  double prev_true = 0.0;        // true price of the previous trading day
  double realized_return = 0.0;  // true_price / prev_true - 1
};

struct PredictionSeries {
  std::string ticker;
  std::vector<PredictionRecord> records;

  std::size_t size() const { return records.size(); }
  // Dates strictly increasing, prices positive and finite, returns consistent
  // with prices to 1e-12.
  void validate() const;
};

/// Builds records from parallel arrays; realised returns are derived here.
PredictionSeries make_prediction_series(std::string ticker, std::vector<Date> dates,
                                        std::span<const double> true_prices,
                                        std::span<const double> predicted,
                                        std::span<const double> prev_true);

/// +1 when the forecast is above yesterday's true price, -1 when below. On a
/// tie the previous signal is carried, or +1 when there is none.
int indicator_signal(double predicted, double prev_true, std::optional<int> previous = std::nullopt);

// Indicator applied day by day with the carry rule.
std::vector<int> signal_series(const PredictionSeries& series);

/// sum_i signal_i * weight_i * return_i
double daily_portfolio_return(std::span<const int> signals, std::span<const double> weights,
                              std::span<const double> returns);

/// prod(1 + r_t) - 1; every r_t must exceed -1.
double total_return(std::span<const double> daily);

// V_t = prod_{s <= t}(1 + r_s), one entry per day.
std::vector<double> equity_curve(std::span<const double> daily);

/// Mean excess return over the sample (n - 1) standard deviation, times
/// sqrt(annualization). Throws on fewer than two points or zero variance.
double sharpe_ratio(std::span<const double> daily, double risk_free_daily = 0.0,
                    double annualization = 252.0);

/// |min_t (V_t - max_{s<=t} V_s) / max_{s<=t} V_s|, single pass.
double max_drawdown(std::span<const double> curve);

double buy_and_hold_return(double first_price, double last_price);

/// (1 + t_r)^(periods_per_year / days) - 1
double annualized_return(double total, std::size_t days, double periods_per_year = 252.0);

struct BacktestConventions {
  double risk_free_daily = 0.0;
  double periods_per_year = 252.0;
};

/// One traded return stream and everything derived from it. The drawdown is
/// measured on the equity curve with the starting capital V_0 = 1 included.
struct StrategyReport {
  std::string name;
  std::vector<double> daily_returns;
  std::vector<double> equity;  // V_1 .. V_T
  double total_return = 0.0;
  double annualized_return = 0.0;
  std::optional<double> sharpe;  // empty when undefined (T < 2 or zero variance)
  double max_drawdown = 0.0;
};

StrategyReport make_strategy_report(std::string name, std::vector<double> daily,
                                    const BacktestConventions& conventions);

/// Equal-weight long-short book rebalanced daily over a fixed ticker set.
struct PortfolioSpec {
  std::vector<std::string> tickers;
  std::vector<double> weights;

  static PortfolioSpec equal_weight(std::vector<std::string> tickers);
  void validate() const;
};

struct PortfolioReport {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  std::vector<std::vector<int>> signals;  // [ticker][day]
  StrategyReport portfolio;
  std::vector<StrategyReport> per_ticker;    // whole book on one ticker
  std::vector<StrategyReport> buy_and_hold;  // per ticker, passive long
  StrategyReport buy_and_hold_portfolio;     // equal initial allocation, never rebalanced
  BacktestConventions conventions;
  bool frictionless = true;  // no costs, slippage or borrow fees are modelled
};

/// Runs the daily long-short simulation plus per-ticker and buy-and-hold
/// benchmarks. All series must share one date axis; otherwise throws naming the
/// first divergent date.
PortfolioReport run_backtest(const std::vector<PredictionSeries>& predictions, const PortfolioSpec& spec,
                             const BacktestConventions& conventions = {});

}  // namespace wtlstm
