#include "wtlstm/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "wtlstm/error.hpp"
#include "wtlstm/fileio.hpp"

namespace wtlstm {

using nlohmann::json;

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

json strategy_json(const StrategyReport& r) {
  return json{{"name", r.name},
              {"days", r.daily_returns.size()},
              {"total_return", r.total_return},
              {"annualized_return", r.annualized_return},
              {"sharpe", r.sharpe ? json(*r.sharpe) : json(nullptr)},
              {"max_drawdown", r.max_drawdown},
              {"daily_returns", r.daily_returns},
              {"equity", r.equity}};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& cell, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw ContractError(where + ": '" + cell + "' is not a finite number");
  return v;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string trading_metrics_csv(const ReportBundle& bundle) {
  std::ostringstream os;
  os << "algorithm,asset,annualized_return,sharpe,mdd\n";
  if (!bundle.portfolio) return os.str();
  const PortfolioReport& p = *bundle.portfolio;
  auto row = [&](const std::string& algo, const std::string& asset, const StrategyReport& r) {
    os << algo << ',' << asset << ',' << format_number(r.annualized_return) << ',' << optional_number(r.sharpe)
       << ',' << format_number(r.max_drawdown) << '\n';
  };
  for (const auto& r : p.per_ticker) row(bundle.algorithm, r.name, r);
  row(bundle.algorithm, "Portfolio", p.portfolio);
  row(bundle.algorithm, "B&H Portfolio", p.buy_and_hold_portfolio);
  for (const auto& r : p.buy_and_hold) row(kBuyAndHoldAlgorithm, r.name, r);
  return os.str();
}

std::string prediction_metrics_csv(const ReportBundle& bundle) {
  std::ostringstream os;
  os << "algorithm,asset,mse_price_sq,mae_price,mape,r2\n";
  for (const auto& t : bundle.tickers)
    os << bundle.algorithm << ',' << t.predictions.ticker << ',' << format_number(t.metrics.mse) << ','
       << format_number(t.metrics.mae) << ',' << format_number(t.metrics.mape) << ','
       << format_number(t.metrics.r2) << '\n';
  return os.str();
}

std::string equity_curve_csv(const PortfolioReport& report) {
  std::ostringstream os;
  os << "date,portfolio_return,portfolio_equity,bh_portfolio_return,bh_portfolio_equity";
  for (const auto& t : report.tickers) os << ',' << t << "_equity";
  os << '\n';
  for (std::size_t d = 0; d < report.dates.size(); ++d) {
    os << report.dates[d].to_string() << ',' << format_number(report.portfolio.daily_returns[d]) << ','
       << format_number(report.portfolio.equity[d]) << ','
       << format_number(report.buy_and_hold_portfolio.daily_returns[d]) << ','
       << format_number(report.buy_and_hold_portfolio.equity[d]);
    for (const auto& r : report.per_ticker) os << ',' << format_number(r.equity[d]);
    os << '\n';
  }
  return os.str();
}

std::string predictions_csv(const PredictionSeries& series) {
  const auto signals = signal_series(series);
  std::ostringstream os;
  os << "date,true,predicted,prev_true,return,signal\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto& r = series.records[t];
    os << r.date.to_string() << ',' << format_number(r.true_price) << ',' << format_number(r.predicted) << ','
       << format_number(r.prev_true) << ',' << format_number(r.realized_return) << ',' << signals[t] << '\n';
  }
  return os.str();
}

json report_json(const ReportBundle& bundle) {
  json metrics = json::array();
  for (const auto& t : bundle.tickers)
    metrics.push_back(json{{"asset", t.predictions.ticker},
                           {"mse", t.metrics.mse},
                           {"mae", t.metrics.mae},
                           {"mape", t.metrics.mape},
                           {"r2", t.metrics.r2},
                           {"points", t.predictions.size()}});

  json doc{{"format", kReportFormat},
           {"version", kReportFormatVersion},
           {"algorithm", bundle.algorithm},
           {"metadata", bundle.metadata},
           {"units", {{"prediction_metrics", "raw price units (mse in price^2, mape as a fraction)"},
                      {"returns", "simple returns as fractions"}}},
           {"prediction_metrics", metrics},
           {"trading", nullptr}};

  if (bundle.portfolio) {
    const PortfolioReport& p = *bundle.portfolio;
    std::vector<std::string> dates;
    for (const auto& d : p.dates) dates.push_back(d.to_string());
    json assets = json::array();
    for (std::size_t i = 0; i < p.tickers.size(); ++i) {
      json a = strategy_json(p.per_ticker[i]);
      a["signals"] = p.signals[i];
      assets.push_back(std::move(a));
    }
    json bh_assets = json::array();
    for (const auto& r : p.buy_and_hold) bh_assets.push_back(strategy_json(r));
    doc["trading"] = json{{"frictionless", p.frictionless},
                          {"conventions",
                           {{"risk_free_daily", p.conventions.risk_free_daily},
                            {"periods_per_year", p.conventions.periods_per_year},
                            {"sharpe_std", "sample (n-1)"},
                            {"drawdown_includes_initial_capital", true},
                            {"tie_rule", "carry previous signal, +1 on first day"}}},
                          {"dates", dates},
                          {"tickers", p.tickers},
                          {"portfolio", strategy_json(p.portfolio)},
                          {"assets", assets},
                          {"buy_and_hold", {{"portfolio", strategy_json(p.buy_and_hold_portfolio)},
                                            {"assets", bh_assets}}}};
  }
  return doc;
}

void emit_reports(const ReportBundle& bundle, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  for (const auto& t : bundle.tickers)
    write_file_atomic((dir / ("predictions_" + t.predictions.ticker + ".csv")).string(),
                      predictions_csv(t.predictions));
  write_file_atomic((dir / "prediction_metrics.csv").string(), prediction_metrics_csv(bundle));
  write_file_atomic((dir / "trading_metrics.csv").string(), trading_metrics_csv(bundle));
  if (bundle.portfolio)
    write_file_atomic((dir / "equity_curve.csv").string(), equity_curve_csv(*bundle.portfolio));
  write_file_atomic((dir / "report.json").string(), report_json(bundle).dump(2) + "\n");
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ContractError("missing column '" + name + "'");
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ContractError(source + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(table.header.size()) + " fields, got " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ContractError(source + ": missing header row");
  return table;
}

PredictionSeries parse_predictions_csv(const std::string& text, const std::string& ticker,
                                       const std::string& source) {
  const CsvTable table = parse_csv(text, source);
  std::size_t c_date, c_true, c_pred;
  try {
    c_date = table.column("date");
    c_true = table.column("true");
    c_pred = table.column("predicted");
  } catch (const ContractError& e) {
    throw ContractError(source + ": " + e.what());
  }
  std::optional<std::size_t> c_prev;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == "prev_true") c_prev = i;

  std::vector<Date> dates;
  std::vector<double> truth, pred, prev;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = source + " row " + std::to_string(r + 1);
    Date d;
    try {
      d = Date::parse(row[c_date]);
    } catch (const ContractError& e) {
      throw ContractError(where + ": " + e.what());
    }
    const double t = to_double(row[c_true], where);
    const double p = to_double(row[c_pred], where);
    if (c_prev) {
      prev.push_back(to_double(row[*c_prev], where));
    } else if (r == 0) {
      prev.push_back(t);  // anchor row, dropped below
    } else {
      prev.push_back(truth.back());
    }
    dates.push_back(d);
    truth.push_back(t);
    pred.push_back(p);
  }
  if (!c_prev && !dates.empty()) {
    dates.erase(dates.begin());
    truth.erase(truth.begin());
    pred.erase(pred.begin());
    prev.erase(prev.begin());
  }
  return make_prediction_series(ticker, std::move(dates), truth, pred, prev);
}

PredictionSeries load_predictions_csv(const std::string& path, const std::string& ticker) {
  return parse_predictions_csv(read_file(path), ticker, path);
}

}  // namespace wtlstm
