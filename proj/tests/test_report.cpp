#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "backtest_oracle.hpp"
#include "test_util.hpp"
#include "wtlstm/error.hpp"
#include "wtlstm/metrics.hpp"
#include "wtlstm/report.hpp"

using namespace wtlstm;
using namespace wtlstm::testing;
namespace fs = std::filesystem;

namespace {

ReportBundle fixture_bundle() {
  ReportBundle b;
  auto preds = four_ticker_fixture();
  for (const auto& s : preds) {
    std::vector<double> truth, pred;
    for (const auto& r : s.records) {
      truth.push_back(r.true_price);
      pred.push_back(r.predicted);
    }
    b.tickers.push_back({s, regression_metrics(pred, truth)});
  }
  b.portfolio = run_backtest(preds, PortfolioSpec::equal_weight({"A", "B", "C", "D"}));
  b.metadata = {{"tool", "wtlstm"}, {"seed", 7}};
  return b;
}

// Compares against tests/golden/<name>; WTLSTM_UPDATE_GOLDEN=1 rewrites it.
void expect_golden(const std::string& name, const std::string& actual) {
  const fs::path path = fs::path(WTLSTM_GOLDEN_DIR) / name;
  if (std::getenv("WTLSTM_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << path;
  EXPECT_EQ(slurp(path.string()), actual) << name;
}

}  // namespace

TEST(RegressionMetrics, Examples) {
  auto m = regression_metrics(std::vector<double>{110, 180}, std::vector<double>{100, 200});
  EXPECT_NEAR(m.mse, 250.0, 1e-12);
  EXPECT_NEAR(m.mae, 15.0, 1e-12);
  EXPECT_NEAR(m.mape, 0.10, 1e-12);
  EXPECT_NEAR(m.r2, 0.9, 1e-12);
  auto perfect = regression_metrics(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3});
  EXPECT_EQ(perfect.mse, 0.0);
  EXPECT_EQ(perfect.mae, 0.0);
  EXPECT_EQ(perfect.mape, 0.0);
  EXPECT_EQ(perfect.r2, 1.0);
  EXPECT_EQ(regression_metrics(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}).r2, 0.0);
}

TEST(RegressionMetrics, ScaleBehaviour) {
  Rng rng(3);
  std::vector<double> y(20), p(20), ys(20), ps(20);
  for (std::size_t i = 0; i < 20; ++i) {
    y[i] = rng.uniform(50, 150);
    p[i] = y[i] + rng.uniform(-5, 5);
    ys[i] = 3.5 * y[i];
    ps[i] = 3.5 * p[i];
  }
  auto a = regression_metrics(p, y), b = regression_metrics(ps, ys);
  EXPECT_NEAR(b.mape, a.mape, 1e-12);
  EXPECT_NEAR(b.r2, a.r2, 1e-12);
  EXPECT_NEAR(b.mse, 3.5 * 3.5 * a.mse, 1e-9);
  EXPECT_NEAR(b.mae, 3.5 * a.mae, 1e-10);
}

TEST(RegressionMetrics, Errors) {
  EXPECT_THROW(regression_metrics(std::vector<double>{1, 2}, std::vector<double>{0, 2}), ContractError);
  EXPECT_THROW(regression_metrics(std::vector<double>{1, 2}, std::vector<double>{2, 2}), ContractError);
  EXPECT_THROW(regression_metrics(std::vector<double>{1}, std::vector<double>{2}), ContractError);
  EXPECT_THROW(regression_metrics(std::vector<double>{1, 2}, std::vector<double>{2, 3, 4}), ContractError);
}

TEST(Report, TradingTableRows) {
  auto csv = parse_csv(trading_metrics_csv(fixture_bundle()), "mem");
  EXPECT_EQ(csv.header, (std::vector<std::string>{"algorithm", "asset", "annualized_return", "sharpe", "mdd"}));
  std::vector<std::string> assets;
  for (const auto& r : csv.rows) assets.push_back(r[0] + "/" + r[1]);
  EXPECT_EQ(assets, (std::vector<std::string>{"WTConv-CA-LSTM/A", "WTConv-CA-LSTM/B", "WTConv-CA-LSTM/C",
                                              "WTConv-CA-LSTM/D", "WTConv-CA-LSTM/Portfolio",
                                              "WTConv-CA-LSTM/B&H Portfolio", "Buy-and-Hold/A", "Buy-and-Hold/B",
                                              "Buy-and-Hold/C", "Buy-and-Hold/D"}));
}

TEST(Report, EmptyPortfolioGivesHeaderOnly) {
  ReportBundle b;
  EXPECT_EQ(trading_metrics_csv(b), "algorithm,asset,annualized_return,sharpe,mdd\n");
}

TEST(Report, NumbersRoundTripAtTwelveDigits) {
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.index(40)) - 20);
    const std::string once = format_number(v);
    EXPECT_EQ(format_number(std::stod(once)), once);
  }
  EXPECT_EQ(format_number(0.0125), "0.0125");
}

TEST(Report, GoldenFiles) {
  auto b = fixture_bundle();
  expect_golden("trading_metrics.csv", trading_metrics_csv(b));
  expect_golden("prediction_metrics.csv", prediction_metrics_csv(b));
  expect_golden("equity_curve.csv", equity_curve_csv(*b.portfolio));
  expect_golden("predictions_C.csv", predictions_csv(b.tickers[2].predictions));
  expect_golden("report.json", report_json(b).dump(2) + "\n");
}

TEST(Report, EmittedFilesRecompute) {
  const auto dir = scratch_dir("report_recompute");
  auto b = fixture_bundle();
  emit_reports(b, dir.string());
  for (const char* f : {"trading_metrics.csv", "prediction_metrics.csv", "equity_curve.csv", "report.json",
                        "predictions_A.csv", "predictions_D.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  // Metrics recomputed from the emitted raw series agree with emitted metrics.
  auto table = parse_csv(slurp((dir / "prediction_metrics.csv").string()), "pm");
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string t = table.rows[i][table.column("asset")];
    auto s = load_predictions_csv((dir / ("predictions_" + t + ".csv")).string(), t);
    std::vector<double> truth, pred;
    for (const auto& r : s.records) {
      truth.push_back(r.true_price);
      pred.push_back(r.predicted);
    }
    auto m = regression_metrics(pred, truth);
    EXPECT_NEAR(m.mse, std::stod(table.rows[i][table.column("mse_price_sq")]), 1e-9);
    EXPECT_NEAR(m.mae, std::stod(table.rows[i][table.column("mae_price")]), 1e-9);
    EXPECT_NEAR(m.mape, std::stod(table.rows[i][table.column("mape")]), 1e-9);
    EXPECT_NEAR(m.r2, std::stod(table.rows[i][table.column("r2")]), 1e-9);
  }

  // Total return recompounds from the emitted daily series.
  auto j = nlohmann::json::parse(slurp((dir / "report.json").string()));
  const auto& port = j.at("trading").at("portfolio");
  double v = 1;
  for (double d : port.at("daily_returns").get<std::vector<double>>()) v *= 1 + d;
  EXPECT_NEAR(v - 1, port.at("total_return").get<double>(), 1e-10);
  auto eq = parse_csv(slurp((dir / "equity_curve.csv").string()), "eq");
  EXPECT_NEAR(std::stod(eq.rows.back()[eq.column("portfolio_equity")]) - 1, port.at("total_return").get<double>(),
              1e-10);
}

TEST(Report, PredictionsCsvRoundTrip) {
  auto preds = four_ticker_fixture();
  const std::string text = predictions_csv(preds[1]);
  auto back = parse_predictions_csv(text, "B", "mem");
  ASSERT_EQ(back.size(), preds[1].size());
  for (std::size_t t = 0; t < back.size(); ++t) {
    EXPECT_EQ(back.records[t].true_price, preds[1].records[t].true_price);
    EXPECT_EQ(back.records[t].predicted, preds[1].records[t].predicted);
    EXPECT_EQ(back.records[t].prev_true, preds[1].records[t].prev_true);
  }
  auto csv = parse_csv(text, "mem");
  for (const auto& r : csv.rows) {
    const auto& s = r[csv.column("signal")];
    EXPECT_TRUE(s == "1" || s == "-1") << s;
  }
}

TEST(Report, ExternalPredictionsWithoutPrevColumn) {
  auto s = parse_predictions_csv("date,true,predicted\n2023-01-02,100,0\n2023-01-03,110,101\n2023-01-04,99,112\n", "X",
                                 "ext.csv");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.records[0].prev_true, 100.0);
  EXPECT_NEAR(s.records[0].realized_return, 0.1, 1e-15);
  EXPECT_THROW(parse_predictions_csv("date,true\n2023-01-02,1\n", "X", "ext.csv"), ContractError);
  EXPECT_THROW(parse_predictions_csv("date,true,predicted\n2023-01-02,1,x\n2023-01-03,1,1\n", "X", "ext.csv"),
               ContractError);
}
