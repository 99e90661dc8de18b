#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wtlstm/backtest.hpp"
#include "wtlstm/dct.hpp"
#include "wtlstm/error.hpp"
#include "wtlstm/metrics.hpp"
#include "wtlstm/pipeline.hpp"
#include "wtlstm/wavelet.hpp"

namespace py = pybind11;
using namespace wtlstm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Tensor& t) {
  py::array_t<double> out(t.shape());
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

// 1-D input is treated as a single channel and returned as 1-D.
Tensor as_rows(const Array& a) {
  if (a.ndim() == 1) return Tensor({1, static_cast<std::size_t>(a.shape(0))}, std::vector<double>(a.data(), a.data() + a.size()));
  if (a.ndim() != 2) throw ContractError("expected a 1-D or [channels x length] array");
  return to_tensor(a);
}

py::dict strategy_dict(const StrategyReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["daily_returns"] = r.daily_returns;
  d["equity"] = r.equity;
  d["total_return"] = r.total_return;
  d["annualized_return"] = r.annualized_return;
  d["sharpe"] = r.sharpe ? py::cast(*r.sharpe) : py::none();
  d["max_drawdown"] = r.max_drawdown;
  return d;
}

RunConfig config_from(const std::string& path, py::dict overrides) {
  auto text = py::module_::import("json").attr("dumps")(overrides).cast<std::string>();
  RunConfig base = load_run_config(path);
  if (overrides.empty()) return base;
  auto j = base.to_json();
  j.merge_patch(nlohmann::json::parse(text));
  // Paths in the echo are already resolved, so no base directory is needed.
  return RunConfig::from_json(j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wavelet/attention LSTM forecasting and long-short backtesting";
  m.attr("__version__") = kVersion;

  py::class_<WaveletCoeffs>(m, "WaveletCoeffs")
      .def_readonly("bank", &WaveletCoeffs::bank)
      .def_readonly("levels", &WaveletCoeffs::levels)
      .def_readonly("original_length", &WaveletCoeffs::original_length)
      .def_property_readonly("approx", [](const WaveletCoeffs& c) { return to_array(c.approx); })
      .def_property_readonly("details", [](const WaveletCoeffs& c) {
        py::list out;
        for (const auto& d : c.details) out.append(to_array(d));
        return out;
      });

  m.def("wavelets", &builtin_bank_names, "Names of the built-in filter banks.");
  m.def("max_levels", [](std::size_t length, const std::string& wavelet) {
    return max_levels(length, builtin_bank(wavelet));
  }, py::arg("length"), py::arg("wavelet") = "haar");
  m.def("dwt", [](const Array& x, const std::string& wavelet, std::size_t levels) {
    return dwt_forward(as_rows(x), builtin_bank(wavelet), levels);
  }, py::arg("x"), py::arg("wavelet") = "haar", py::arg("levels") = 1,
     "Multi-level periodised DWT of a 1-D or [channels x length] signal.");
  m.def("idwt", [](const WaveletCoeffs& c, bool squeeze) {
    Tensor y = dwt_inverse(c, builtin_bank(c.bank));
    auto arr = to_array(y);
    return squeeze && y.dim(0) == 1 ? py::array_t<double>(arr.attr("reshape")(y.dim(1))) : arr;
  }, py::arg("coeffs"), py::arg("squeeze") = true);

  m.def("dct", [](const Array& x) {
    if (x.ndim() != 1) throw ContractError("dct expects a 1-D array");
    auto X = dct_ii(std::span<const double>(x.data(), x.size()));
    return py::array_t<double>(X.size(), X.data());
  }, py::arg("x"), "Unnormalised DCT-II.");

  m.def("regression_metrics", [](std::vector<double> pred, std::vector<double> actual) {
    auto r = regression_metrics(pred, actual);
    return py::dict(py::arg("mse") = r.mse, py::arg("mae") = r.mae, py::arg("mape") = r.mape, py::arg("r2") = r.r2);
  }, py::arg("predicted"), py::arg("actual"));

  m.def("indicator_signal", [](double p, double prev, std::optional<int> previous) {
    return indicator_signal(p, prev, previous);
  }, py::arg("predicted"), py::arg("prev_true"), py::arg("previous") = py::none());
  m.def("daily_portfolio_return", [](std::vector<int> s, std::vector<double> w, std::vector<double> r) {
    return daily_portfolio_return(s, w, r);
  }, py::arg("signals"), py::arg("weights"), py::arg("returns"));
  m.def("total_return", [](std::vector<double> d) { return total_return(d); }, py::arg("daily"));
  m.def("sharpe_ratio", [](std::vector<double> d, double rf, double ann) { return sharpe_ratio(d, rf, ann); },
        py::arg("daily"), py::arg("risk_free_daily") = 0.0, py::arg("annualization") = 252.0);
  m.def("max_drawdown", [](std::vector<double> v) { return max_drawdown(v); }, py::arg("equity"));
  m.def("buy_and_hold_return", &buy_and_hold_return, py::arg("first_price"), py::arg("last_price"));
  m.def("annualized_return", &annualized_return, py::arg("total"), py::arg("days"),
        py::arg("periods_per_year") = 252.0);

  m.def("load_ohlcv", [](const std::string& path) {
    auto f = load_ohlcv_csv(path);
    py::dict d;
    std::vector<std::string> dates;
    std::vector<std::vector<double>> cols(kFeatureCount);
    for (const auto& b : f.bars) {
      dates.push_back(b.date.to_string());
      for (std::size_t k = 0; k < kFeatureCount; ++k) cols[k].push_back(feature_value(b, k));
    }
    d["ticker"] = f.ticker;
    d["date"] = dates;
    for (std::size_t k = 0; k < kFeatureCount; ++k)
      d[py::str(std::string(kFeatureNames[k]))] = py::array_t<double>(cols[k].size(), cols[k].data());
    return d;
  }, py::arg("path"), "Load and validate an OHLCV CSV into a dict of columns.");

  m.def("run_backtest", [](py::dict series, double rf, double ppy) {
    std::vector<PredictionSeries> preds;
    std::vector<std::string> tickers;
    for (auto item : series) {
      const auto ticker = item.first.cast<std::string>();
      auto cols = item.second.cast<py::dict>();
      std::vector<Date> dates;
      for (auto d : cols["date"]) dates.push_back(Date::parse(d.cast<std::string>()));
      auto truth = cols["true"].cast<std::vector<double>>();
      auto pred = cols["predicted"].cast<std::vector<double>>();
      auto prev = cols["prev_true"].cast<std::vector<double>>();
      preds.push_back(make_prediction_series(ticker, dates, truth, pred, prev));
      tickers.push_back(ticker);
    }
    auto rep = run_backtest(preds, PortfolioSpec::equal_weight(tickers), {rf, ppy});
    py::dict out;
    out["portfolio"] = strategy_dict(rep.portfolio);
    out["buy_and_hold_portfolio"] = strategy_dict(rep.buy_and_hold_portfolio);
    py::dict assets, bh, signals;
    for (std::size_t i = 0; i < tickers.size(); ++i) {
      assets[py::str(tickers[i])] = strategy_dict(rep.per_ticker[i]);
      bh[py::str(tickers[i])] = strategy_dict(rep.buy_and_hold[i]);
      signals[py::str(tickers[i])] = rep.signals[i];
    }
    out["assets"] = assets;
    out["buy_and_hold"] = bh;
    out["signals"] = signals;
    return out;
  }, py::arg("series"), py::arg("risk_free_daily") = 0.0, py::arg("periods_per_year") = 252.0,
     "Equal-weight long-short backtest. `series` maps ticker -> {date, true, predicted, prev_true}.");

  using Command = void (*)(const RunConfig&, std::ostream&);
  auto bind_command = [&m](const char* name, Command fn) {
    m.def(name, [fn](const std::string& config, py::dict overrides) {
      RunConfig cfg = config_from(config, overrides);
      std::ostringstream log;
      {
        py::gil_scoped_release release;
        fn(cfg, log);
      }
      return log.str();
    }, py::arg("config"), py::arg("overrides") = py::dict(), "Runs the pipeline stage; returns its log.");
  };
  bind_command("ingest_check", cmd_ingest_check);
  bind_command("train", cmd_train);
  bind_command("predict", cmd_predict);
  bind_command("backtest", cmd_backtest);
  bind_command("report", cmd_report);
  bind_command("run_all", cmd_run_all);
}
