// wtlstm: ingest, train, predict, backtest and report from one config file.
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wtlstm/error.hpp"
#include "wtlstm/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<int> epochs;
  std::optional<std::size_t> window;
  std::optional<std::size_t> hidden;

  wtlstm::RunConfig apply() const {
    wtlstm::RunConfig c = wtlstm::load_run_config(config);
    if (seed) c.model.seed = *seed;
    if (out) c.out_dir = *out;
    if (jobs) c.jobs = *jobs;
    if (epochs) c.model.epochs = *epochs;
    if (window) c.model.window = *window;
    if (hidden) c.model.hidden = *hidden;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet/attention LSTM forecaster and long-short backtester"};
  app.require_subcommand(1);
  app.set_version_flag("--version", wtlstm::kVersion);

  Overrides ov;
  using Command = std::function<void(const wtlstm::RunConfig&, std::ostream&)>;
  Command selected;

  auto add = [&](const char* name, const char* help, Command fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", ov.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", ov.seed, "override the run seed");
    sub->add_option("--out", ov.out, "override the output directory");
    sub->add_option("--jobs", ov.jobs, "parallel per-ticker jobs")->check(CLI::PositiveNumber);
    sub->add_option("--epochs", ov.epochs, "override training epochs");
    sub->add_option("--window", ov.window, "override the lookback window");
    sub->add_option("--hidden", ov.hidden, "override the LSTM hidden size");
    sub->callback([&selected, fn] { selected = fn; });
  };
  add("ingest-check", "load and validate every CSV, print split sizes", wtlstm::cmd_ingest_check);
  add("train", "train one model per ticker", wtlstm::cmd_train);
  add("predict", "forecast the test split with trained models", wtlstm::cmd_predict);
  add("backtest", "run the equal-weight backtest and emit reports", wtlstm::cmd_backtest);
  add("report", "write a markdown summary table", wtlstm::cmd_report);
  add("run-all", "train, predict, backtest and report", wtlstm::cmd_run_all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    selected(ov.apply(), std::cerr);
    return 0;
  } catch (const wtlstm::ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}
