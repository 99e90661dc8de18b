#include "wtlstm/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wtlstm/error.hpp"

namespace wtlstm {

void PredictionSeries::validate() const {
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    const std::string where = ticker + " " + r.date.to_string();
    require(std::isfinite(r.true_price) && r.true_price > 0, where + ": true price must be positive");
    require(std::isfinite(r.prev_true) && r.prev_true > 0, where + ": previous price must be positive");
    require(std::isfinite(r.predicted), where + ": prediction must be finite");
    require(std::abs(r.realized_return - (r.true_price / r.prev_true - 1.0)) <= 1e-12,
            where + ": realized return inconsistent with prices");
    if (t > 0) require(records[t - 1].date < r.date, where + ": dates must be strictly increasing");
  }
}

PredictionSeries make_prediction_series(std::string ticker, std::vector<Date> dates,
                                        std::span<const double> true_prices,
                                        std::span<const double> predicted,
                                        std::span<const double> prev_true) {
  require(dates.size() == true_prices.size() && dates.size() == predicted.size() &&
              dates.size() == prev_true.size(),
          "prediction series: column lengths differ");
  PredictionSeries s{std::move(ticker), {}};
  for (std::size_t t = 0; t < dates.size(); ++t)
    s.records.push_back({dates[t], true_prices[t], predicted[t], prev_true[t],
                         true_prices[t] / prev_true[t] - 1.0});
  s.validate();
  return s;
}

int indicator_signal(double predicted, double prev_true, std::optional<int> previous) {
  require(std::isfinite(predicted) && std::isfinite(prev_true), "indicator: non-finite price");
  require(prev_true > 0.0, "indicator: previous price must be positive");
  if (predicted > prev_true) return 1;
  if (predicted < prev_true) return -1;
  return previous.value_or(1);
}

std::vector<int> signal_series(const PredictionSeries& series) {
  std::vector<int> out;
  out.reserve(series.size());
  std::optional<int> prev;
  for (const auto& r : series.records) {
    prev = indicator_signal(r.predicted, r.prev_true, prev);
    out.push_back(*prev);
  }
  return out;
}

double daily_portfolio_return(std::span<const int> signals, std::span<const double> weights,
                              std::span<const double> returns) {
  require(signals.size() == weights.size() && signals.size() == returns.size(),
          "daily_portfolio_return: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < signals.size(); ++i) s += signals[i] * weights[i] * returns[i];
  return s;
}

double total_return(std::span<const double> daily) {
  double v = 1.0;
  for (std::size_t t = 0; t < daily.size(); ++t) {
    require(daily[t] > -1.0, "total_return: daily return <= -1 on day " + std::to_string(t + 1));
    v *= 1.0 + daily[t];
  }
  return v - 1.0;
}

std::vector<double> equity_curve(std::span<const double> daily) {
  std::vector<double> out;
  out.reserve(daily.size());
  double v = 1.0;
  for (double r : daily) {
    v *= 1.0 + r;
    out.push_back(v);
  }
  return out;
}

double sharpe_ratio(std::span<const double> daily, double risk_free_daily, double annualization) {
  require(daily.size() >= 2, "sharpe_ratio: need at least two returns");
  require(annualization > 0.0, "sharpe_ratio: annualization factor must be positive");
  const auto n = static_cast<double>(daily.size());
  double mean = 0.0;
  for (double r : daily) mean += r - risk_free_daily;
  mean /= n;
  double ss = 0.0;
  for (double r : daily) {
    const double d = r - risk_free_daily - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  require(sd > 0.0, "sharpe_ratio: zero variance, ratio undefined");
  return mean / sd * std::sqrt(annualization);
}

double max_drawdown(std::span<const double> curve) {
  require(!curve.empty(), "max_drawdown: empty equity curve");
  double peak = curve[0];
  double worst = 0.0;
  for (double v : curve) {
    require(v > 0.0, "max_drawdown: equity must stay positive");
    peak = std::max(peak, v);
    worst = std::min(worst, (v - peak) / peak);
  }
  return std::abs(worst);
}

double buy_and_hold_return(double first_price, double last_price) {
  require(first_price > 0.0, "buy_and_hold_return: initial price must be positive");
  return (last_price - first_price) / first_price;
}

double annualized_return(double total, std::size_t days, double periods_per_year) {
  require(days >= 1, "annualized_return: need at least one day");
  require(total > -1.0, "annualized_return: total return must exceed -1");
  return std::pow(1.0 + total, periods_per_year / static_cast<double>(days)) - 1.0;
}

StrategyReport make_strategy_report(std::string name, std::vector<double> daily,
                                    const BacktestConventions& conv) {
  require(!daily.empty(), "strategy report '" + name + "': no trading days");
  StrategyReport r;
  r.name = std::move(name);
  r.total_return = total_return(daily);
  r.equity = equity_curve(daily);
  r.annualized_return = annualized_return(r.total_return, daily.size(), conv.periods_per_year);
  try {
    r.sharpe = sharpe_ratio(daily, conv.risk_free_daily, conv.periods_per_year);
  } catch (const ContractError&) {
    r.sharpe.reset();
  }
  std::vector<double> with_start;
  with_start.reserve(r.equity.size() + 1);
  with_start.push_back(1.0);
  with_start.insert(with_start.end(), r.equity.begin(), r.equity.end());
  r.max_drawdown = max_drawdown(with_start);
  r.daily_returns = std::move(daily);
  return r;
}

PortfolioSpec PortfolioSpec::equal_weight(std::vector<std::string> tickers) {
  PortfolioSpec s;
  const double w = 1.0 / static_cast<double>(tickers.size());
  s.weights.assign(tickers.size(), w);
  s.tickers = std::move(tickers);
  s.validate();
  return s;
}

void PortfolioSpec::validate() const {
  require(!tickers.empty(), "portfolio: no tickers");
  require(weights.size() == tickers.size(), "portfolio: one weight per ticker required");
  const double w = 1.0 / static_cast<double>(tickers.size());
  for (double x : weights) require(x == w, "portfolio: weights must all equal 1/N");
}

PortfolioReport run_backtest(const std::vector<PredictionSeries>& predictions, const PortfolioSpec& spec,
                             const BacktestConventions& conventions) {
  spec.validate();
  require(predictions.size() == spec.tickers.size(), "run_backtest: expected " +
                                                         std::to_string(spec.tickers.size()) +
                                                         " prediction series, got " +
                                                         std::to_string(predictions.size()));
  std::map<std::string, const PredictionSeries*> by_ticker;
  for (const auto& s : predictions) {
    s.validate();
    by_ticker[s.ticker] = &s;
  }
  std::vector<const PredictionSeries*> ordered;
  for (const auto& t : spec.tickers) {
    auto it = by_ticker.find(t);
    require(it != by_ticker.end(), "run_backtest: no predictions for ticker " + t);
    ordered.push_back(it->second);
  }

  const PredictionSeries& ref = *ordered.front();
  require(ref.size() >= 1, "run_backtest: empty prediction series for " + ref.ticker);
  for (const auto* s : ordered) {
    const std::size_t common = std::min(s->size(), ref.size());
    for (std::size_t t = 0; t < common; ++t)
      require(s->records[t].date == ref.records[t].date,
              "run_backtest: dates diverge at day " + std::to_string(t + 1) + ": " + ref.ticker + " has " +
                  ref.records[t].date.to_string() + ", " + s->ticker + " has " +
                  s->records[t].date.to_string());
    if (s->size() != ref.size()) {
      const auto& longer = s->size() > ref.size() ? *s : ref;
      throw ContractError("run_backtest: dates diverge at " + longer.records[common].date.to_string() +
                          ": " + ref.ticker + " has " + std::to_string(ref.size()) + " days, " + s->ticker +
                          " has " + std::to_string(s->size()));
    }
  }

  const std::size_t n = ordered.size(), days = ref.size();
  PortfolioReport rep;
  rep.conventions = conventions;
  rep.tickers = spec.tickers;
  for (const auto& r : ref.records) rep.dates.push_back(r.date);
  for (const auto* s : ordered) rep.signals.push_back(signal_series(*s));

  std::vector<double> book(days);
  std::vector<int> sig(n);
  std::vector<double> ret(n);
  for (std::size_t t = 0; t < days; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      sig[i] = rep.signals[i][t];
      ret[i] = ordered[i]->records[t].realized_return;
    }
    book[t] = daily_portfolio_return(sig, spec.weights, ret);
  }
  rep.portfolio = make_strategy_report("Portfolio", std::move(book), conventions);

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> own(days), passive(days);
    for (std::size_t t = 0; t < days; ++t) {
      passive[t] = ordered[i]->records[t].realized_return;
      own[t] = rep.signals[i][t] * passive[t];
    }
    rep.per_ticker.push_back(make_strategy_report(spec.tickers[i], std::move(own), conventions));
    auto bh = make_strategy_report(spec.tickers[i], std::move(passive), conventions);
    const double p0 = ordered[i]->records.front().prev_true;
    const double pt = ordered[i]->records.back().true_price;
    bh.total_return = buy_and_hold_return(p0, pt);
    bh.annualized_return = annualized_return(bh.total_return, days, conventions.periods_per_year);
    rep.buy_and_hold.push_back(std::move(bh));
  }

  // Equal initial allocation held without rebalancing: V_t = mean_i p_i,t / p_i,0.
  std::vector<double> value(days, 0.0);
  for (std::size_t t = 0; t < days; ++t) {
    for (const auto* s : ordered) value[t] += s->records[t].true_price / s->records.front().prev_true;
    value[t] /= static_cast<double>(n);
  }
  std::vector<double> bh_daily(days);
  for (std::size_t t = 0; t < days; ++t) bh_daily[t] = value[t] / (t == 0 ? 1.0 : value[t - 1]) - 1.0;
  auto bhp = make_strategy_report("B&H Portfolio", std::move(bh_daily), conventions);
  double mean_bh = 0.0;
  for (const auto& r : rep.buy_and_hold) mean_bh += r.total_return;
  bhp.total_return = mean_bh / static_cast<double>(n);
  bhp.annualized_return = annualized_return(bhp.total_return, days, conventions.periods_per_year);
  rep.buy_and_hold_portfolio = std::move(bhp);
  return rep;
}

}  // namespace wtlstm
