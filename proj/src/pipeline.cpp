#include "wtlstm/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "wtlstm/error.hpp"
#include "wtlstm/fileio.hpp"
#include "wtlstm/metrics.hpp"
#include "wtlstm/trainer.hpp"

namespace wtlstm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ContractError(std::string("config: key '") + key + "' has the wrong type");
  }
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure by index so error reporting stays deterministic.
template <typename Fn>
void run_jobs(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= n) return;
            i = next++;
          }
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Prefixes any failure with the ticker it belongs to.
template <typename Fn>
auto for_ticker(const std::string& ticker, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractError& e) {
    throw ContractError("[" + ticker + "] " + e.what());
  } catch (const RuntimeFailure& e) {
    throw RuntimeFailure("[" + ticker + "] " + e.what());
  } catch (const std::exception& e) {
    throw RuntimeFailure("[" + ticker + "] " + e.what());
  }
}

struct LockedLog {
  std::ostream& out;
  std::mutex mu;

  void line(const std::string& text) {
    std::lock_guard lock(mu);
    out << text << '\n';
    out.flush();
  }
};

std::vector<TickerData> prepare_all(const RunConfig& config) {
  std::vector<TickerData> out;
  for (const auto& [ticker, path] : config.data) out.push_back(prepare_ticker(config, ticker, path));
  return out;
}

ReportBundle build_bundle(const RunConfig& config) {
  ReportBundle bundle;
  bundle.algorithm = config.algorithm;
  std::vector<PredictionSeries> series;
  for (const auto& ticker : config.tickers()) {
    const std::string path = config.predictions_path(ticker);
    if (!fs::exists(path))
      throw ContractError("[" + ticker + "] missing predictions file '" + path + "' (run predict first)");
    PredictionSeries s = for_ticker(ticker, [&] { return load_predictions_csv(path, ticker); });
    std::vector<double> truth, pred;
    for (const auto& r : s.records) {
      truth.push_back(r.true_price);
      pred.push_back(r.predicted);
    }
    RegressionMetrics m = for_ticker(ticker, [&] { return regression_metrics(pred, truth); });
    bundle.tickers.push_back({s, m});
    series.push_back(std::move(s));
  }
  bundle.portfolio = run_backtest(series, PortfolioSpec::equal_weight(config.tickers()), config.backtest);
  bundle.metadata = json{{"tool", "wtlstm"}, {"version", kVersion}, {"seed", config.model.seed},
                         {"config", config.to_json()}};
  return bundle;
}

std::string percent(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v * 100.0 << '%';
  return os.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::string& base_dir) {
  require(j.is_object(), "config: top level must be a JSON object");
  static const std::vector<std::string> known = {
      "data",       "split_ratio",  "window",     "hidden",         "wavelet",     "wavelet_levels",
      "wavelet_file", "epochs",     "batch_size", "learning_rate",  "beta1",       "beta2",
      "adam_eps",   "lr_decay",     "lr_decay_every", "seed",       "use_wtconv",  "use_attention",
      "risk_free_daily", "periods_per_year", "out_dir", "algorithm", "jobs"};
  for (const auto& [key, value] : j.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), "config: unknown key '" + key + "'");

  RunConfig c;
  if (j.contains("data")) {
    require(j.at("data").is_object(), "config: 'data' must map ticker -> CSV path");
    for (const auto& [ticker, path] : j.at("data").items()) {
      require(path.is_string(), "config: data path for " + ticker + " must be a string");
      c.data.emplace_back(ticker, resolve_path(base_dir, path.get<std::string>()));
    }
  }
  read_key(j, "split_ratio", c.split_ratio);
  read_key(j, "window", c.model.window);
  read_key(j, "hidden", c.model.hidden);
  read_key(j, "wavelet", c.model.wavelet);
  read_key(j, "wavelet_levels", c.model.wavelet_levels);
  read_key(j, "wavelet_file", c.wavelet_file);
  c.wavelet_file = resolve_path(base_dir, c.wavelet_file);
  read_key(j, "epochs", c.model.epochs);
  read_key(j, "batch_size", c.model.batch_size);
  read_key(j, "learning_rate", c.model.adam.lr);
  read_key(j, "beta1", c.model.adam.beta1);
  read_key(j, "beta2", c.model.adam.beta2);
  read_key(j, "adam_eps", c.model.adam.eps);
  read_key(j, "lr_decay", c.model.schedule.factor);
  read_key(j, "lr_decay_every", c.model.schedule.every);
  read_key(j, "seed", c.model.seed);
  read_key(j, "use_wtconv", c.model.use_wtconv);
  read_key(j, "use_attention", c.model.use_attention);
  read_key(j, "risk_free_daily", c.backtest.risk_free_daily);
  read_key(j, "periods_per_year", c.backtest.periods_per_year);
  read_key(j, "out_dir", c.out_dir);
  c.out_dir = resolve_path(base_dir, c.out_dir);
  read_key(j, "algorithm", c.algorithm);
  read_key(j, "jobs", c.jobs);
  return c;
}

json RunConfig::to_json() const {
  json data_obj = json::object();
  for (const auto& [t, p] : data) data_obj[t] = p;
  return json{{"data", data_obj},
              {"split_ratio", split_ratio},
              {"window", model.window},
              {"hidden", model.hidden},
              {"wavelet", model.wavelet},
              {"wavelet_levels", model.wavelet_levels},
              {"wavelet_file", wavelet_file},
              {"epochs", model.epochs},
              {"batch_size", model.batch_size},
              {"learning_rate", model.adam.lr},
              {"beta1", model.adam.beta1},
              {"beta2", model.adam.beta2},
              {"adam_eps", model.adam.eps},
              {"lr_decay", model.schedule.factor},
              {"lr_decay_every", model.schedule.every},
              {"seed", model.seed},
              {"use_wtconv", model.use_wtconv},
              {"use_attention", model.use_attention},
              {"risk_free_daily", backtest.risk_free_daily},
              {"periods_per_year", backtest.periods_per_year},
              {"out_dir", out_dir},
              {"algorithm", algorithm}};
}

void RunConfig::validate() const {
  require(!data.empty(), "config: 'data' lists no tickers");
  for (const auto& [ticker, path] : data) {
    require(!ticker.empty() && ticker.find_first_of("/\\,") == std::string::npos,
            "config: invalid ticker name '" + ticker + "'");
    require(!path.empty(), "config: empty data path for " + ticker);
  }
  require(split_ratio > 0.0 && split_ratio < 1.0, "config: split_ratio must lie in (0, 1)");
  require(backtest.periods_per_year > 0.0, "config: periods_per_year must be positive");
  require(jobs >= 1, "config: jobs must be >= 1");
  require(!out_dir.empty(), "config: out_dir must not be empty");
  require(algorithm.find(',') == std::string::npos, "config: algorithm name must not contain commas");
  model.validate();
  const FilterBank bank = resolve_bank(*this);
  require(model.wavelet_levels <= max_levels(model.window, bank),
          "config: " + std::to_string(model.wavelet_levels) + " wavelet levels do not fit window " +
              std::to_string(model.window) + " with " + bank.name);
}

std::vector<std::string> RunConfig::tickers() const {
  std::vector<std::string> out;
  for (const auto& [t, p] : data) out.push_back(t);
  return out;
}

std::string RunConfig::model_path(const std::string& t) const {
  return (fs::path(out_dir) / "models" / (t + ".model.json")).string();
}
std::string RunConfig::predictions_path(const std::string& t) const {
  return (fs::path(out_dir) / ("predictions_" + t + ".csv")).string();
}
std::string RunConfig::loss_path(const std::string& t) const {
  return (fs::path(out_dir) / ("loss_" + t + ".csv")).string();
}

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ContractError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j, fs::path(path).parent_path().string());
}

FilterBank resolve_bank(const RunConfig& config) {
  BankRegistry registry;
  if (!config.wavelet_file.empty()) registry.load_file(config.wavelet_file);
  return registry.get(config.model.wavelet);
}

ModelConfig ticker_model_config(const RunConfig& config, const std::string& ticker) {
  ModelConfig m = config.model;
  m.seed = derive_seed(config.model.seed, "ticker:" + ticker);
  return m;
}

TickerData prepare_ticker(const RunConfig& config, const std::string& ticker, const std::string& path) {
  return for_ticker(ticker, [&] {
    TickerData d;
    d.frame = load_ohlcv_csv(path, ticker);
    auto split = train_test_split(d.frame, config.split_ratio);
    d.train_size = split.train.size();
    require(d.train_size > config.model.window,
            "training split has " + std::to_string(d.train_size) + " bars, need more than the window of " +
                std::to_string(config.model.window));
    d.scaler = fit_scaler(split.train);
    return d;
  });
}

PredictionSeries predict_test_split(const ModelArtifact& artifact, const TickerData& data) {
  const std::size_t window = artifact.config.window;
  const std::size_t n_train = data.train_size;
  require(n_train >= window, "predict: not enough training bars to warm-start the first window");
  const TimeSeriesFrame tail = data.frame.slice(n_train - window, data.frame.size());
  const WindowedDataset ds = make_windows(tail, artifact.scaler, window);
  const std::vector<double> scaled = predict_scaled(artifact.params, ds.inputs);

  std::vector<Date> dates;
  std::vector<double> truth, pred, prev;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const std::size_t idx = n_train + k;
    dates.push_back(data.frame.bars[idx].date);
    truth.push_back(data.frame.bars[idx].close);
    prev.push_back(data.frame.bars[idx - 1].close);
    pred.push_back(artifact.scaler.invert(scaled[k], kClose));
  }
  return make_prediction_series(data.frame.ticker, std::move(dates), truth, pred, prev);
}

void cmd_ingest_check(const RunConfig& config, std::ostream& log) {
  config.validate();
  for (const auto& d : prepare_all(config))
    log << "[" << d.frame.ticker << "] " << d.frame.size() << " bars " << d.frame.bars.front().date.to_string()
        << " .. " << d.frame.bars.back().date.to_string() << ", train " << d.train_size << ", test "
        << d.frame.size() - d.train_size << '\n';
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const FilterBank bank = resolve_bank(config);
  const std::vector<TickerData> data = prepare_all(config);
  LockedLog out{log, {}};

  run_jobs(data.size(), config.jobs, [&](std::size_t i) {
    const std::string& ticker = data[i].frame.ticker;
    for_ticker(ticker, [&] {
      const ModelConfig mc = ticker_model_config(config, ticker);
      const auto split = train_test_split(data[i].frame, config.split_ratio);
      const WindowedDataset ds = make_windows(split.train, data[i].scaler, mc.window);
      out.line("[" + ticker + "] training on " + std::to_string(ds.size()) + " windows");
      const int every = std::max(1, mc.epochs / 10);
      TrainResult trained = train_model(ds, mc, bank, [&](int epoch, double loss, double lr) {
        if (epoch == 1 || epoch % every == 0 || epoch == mc.epochs)
          out.line("[" + ticker + "] epoch " + std::to_string(epoch) + " loss " + format_number(loss) +
                   " lr " + format_number(lr));
      });

      ModelArtifact artifact{ticker, mc, bank, data[i].scaler, std::move(trained.params), trained.loss_curve};
      save_model(artifact, config.model_path(ticker));
      std::ostringstream curve;
      curve << "epoch,loss\n";
      for (std::size_t e = 0; e < trained.loss_curve.size(); ++e)
        curve << e + 1 << ',' << format_number(trained.loss_curve[e]) << '\n';
      write_file_atomic(config.loss_path(ticker), curve.str());
      out.line("[" + ticker + "] wrote " + config.model_path(ticker));
      return 0;
    });
  });
}

void cmd_predict(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::vector<TickerData> data = prepare_all(config);
  std::vector<ModelArtifact> models;
  for (const auto& d : data) {
    const std::string path = config.model_path(d.frame.ticker);
    if (!fs::exists(path))
      throw ContractError("[" + d.frame.ticker + "] missing model file '" + path + "' (run train first)");
    models.push_back(for_ticker(d.frame.ticker, [&] { return load_model(path); }));
    require(models.back().config.window == config.model.window,
            "[" + d.frame.ticker + "] model window differs from config");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string& ticker = data[i].frame.ticker;
    const PredictionSeries s = for_ticker(ticker, [&] { return predict_test_split(models[i], data[i]); });
    write_file_atomic(config.predictions_path(ticker), predictions_csv(s));
    log << "[" << ticker << "] " << s.size() << " predictions -> " << config.predictions_path(ticker) << '\n';
  }
}

void cmd_backtest(const RunConfig& config, std::ostream& log) {
  config.validate();
  const ReportBundle bundle = build_bundle(config);
  emit_reports(bundle, config.out_dir);
  const auto& p = *bundle.portfolio;
  log << "portfolio over " << p.dates.size() << " days: total " << percent(p.portfolio.total_return)
      << ", annualized " << percent(p.portfolio.annualized_return) << ", MDD "
      << percent(p.portfolio.max_drawdown) << " (frictionless)\n";
}

void cmd_report(const RunConfig& config, std::ostream& log) {
  config.validate();
  const ReportBundle bundle = build_bundle(config);
  std::ostringstream md;
  md << "# " << bundle.algorithm << " run report\n\n";
  md << "Frictionless backtest: no transaction costs, slippage or borrow fees.\n\n";
  md << "## Trading performance\n\n| Algorithm | Asset | Annualized Return | Sharpe Ratio | MDD |\n"
     << "|---|---|---|---|---|\n";
  const auto& p = *bundle.portfolio;
  auto row = [&](const std::string& algo, const std::string& asset, const StrategyReport& r) {
    md << "| " << algo << " | " << asset << " | " << percent(r.annualized_return) << " | "
       << (r.sharpe ? fixed(*r.sharpe, 2) : std::string("n/a")) << " | " << percent(r.max_drawdown) << " |\n";
  };
  for (const auto& r : p.per_ticker) row(bundle.algorithm, r.name, r);
  row(bundle.algorithm, "Portfolio", p.portfolio);
  row(bundle.algorithm, "B&H Portfolio", p.buy_and_hold_portfolio);
  for (const auto& r : p.buy_and_hold) row(kBuyAndHoldAlgorithm, r.name, r);
  md << "\n## Prediction accuracy (price units)\n\n| Algorithm | Asset | MSE | MAE | MAPE | R Square |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& t : bundle.tickers)
    md << "| " << bundle.algorithm << " | " << t.predictions.ticker << " | " << fixed(t.metrics.mse, 4) << " | "
       << fixed(t.metrics.mae, 4) << " | " << fixed(t.metrics.mape, 4) << " | " << fixed(t.metrics.r2, 4)
       << " |\n";
  const std::string path = (fs::path(config.out_dir) / "report.md").string();
  write_file_atomic(path, md.str());
  log << md.str() << "wrote " << path << '\n';
}

void cmd_run_all(const RunConfig& config, std::ostream& log) {
  config.validate();
  prepare_all(config);
  cmd_train(config, log);
  cmd_predict(config, log);
  cmd_backtest(config, log);
  cmd_report(config, log);
}

}  // namespace wtlstm
