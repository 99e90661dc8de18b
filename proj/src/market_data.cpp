#include "wtlstm/market_data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ContractError("not an integer");
  return v;
}

double parse_number(std::string_view cell, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw ContractError(where + ": '" + std::string(cell) + "' is not a finite number");
  return v;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : days[m - 1];
}

}  // namespace

Date Date::parse(std::string_view text) {
  const auto bad = [&] { return ContractError("invalid ISO date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  Date d;
  try {
    d.year = parse_int(text.substr(0, 4));
    d.month = parse_int(text.substr(5, 2));
    d.day = parse_int(text.substr(8, 2));
  } catch (const ContractError&) {
    throw bad();
  }
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) throw bad();
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

double feature_value(const OhlcvBar& bar, std::size_t feature) {
  switch (feature) {
    case kOpen: return bar.open;
    case kHigh: return bar.high;
    case kLow: return bar.low;
    case kClose: return bar.close;
    case kVolume: return bar.volume;
  }
  throw ContractError("feature index out of range");
}

TimeSeriesFrame TimeSeriesFrame::slice(std::size_t begin, std::size_t end) const {
  require(begin <= end && end <= bars.size(), "frame slice out of range");
  return {ticker, std::vector<OhlcvBar>(bars.begin() + static_cast<std::ptrdiff_t>(begin),
                                        bars.begin() + static_cast<std::ptrdiff_t>(end))};
}

std::vector<double> TimeSeriesFrame::closes() const {
  std::vector<double> out;
  out.reserve(bars.size());
  for (const auto& b : bars) out.push_back(b.close);
  return out;
}

void TimeSeriesFrame::validate() const {
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const std::string where = ticker + " bar " + std::to_string(i) + " (" + b.date.to_string() + ")";
    require(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0, where + ": prices must be positive");
    require(b.volume >= 0, where + ": volume must be non-negative");
    require(b.low <= std::min(b.open, b.close) && std::max(b.open, b.close) <= b.high,
            where + ": violates low <= open/close <= high");
    if (i > 0)
      require(bars[i - 1].date < b.date, where + ": dates must be strictly increasing");
  }
}

TimeSeriesFrame parse_ohlcv_csv(std::string_view text, std::string ticker, const std::string& source) {
  TimeSeriesFrame frame{std::move(ticker), {}};
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const auto nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  do {
    if (!next_line(line)) throw ContractError(source + ": missing header row");
  } while (trim(line).empty());

  std::map<std::string, std::size_t, std::less<>> column;
  const auto header = split_csv(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name(header[i]);
    for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    column.emplace(std::move(name), i);
  }
  std::array<std::size_t, 6> idx{};
  const std::array<std::string_view, 6> required = {"date", "open", "high", "low", "close", "volume"};
  for (std::size_t k = 0; k < required.size(); ++k) {
    auto it = column.find(required[k]);
    if (it == column.end())
      throw ContractError(source + ": missing column '" + std::string(required[k]) + "'");
    idx[k] = it->second;
  }

  while (next_line(line)) {
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto cells = split_csv(line);
    if (cells.size() < header.size())
      throw ContractError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(cells.size()));
    OhlcvBar bar;
    try {
      bar.date = Date::parse(cells[idx[0]]);
    } catch (const ContractError& e) {
      throw ContractError(where + ": " + e.what());
    }
    bar.open = parse_number(cells[idx[1]], where + " open");
    bar.high = parse_number(cells[idx[2]], where + " high");
    bar.low = parse_number(cells[idx[3]], where + " low");
    bar.close = parse_number(cells[idx[4]], where + " close");
    bar.volume = parse_number(cells[idx[5]], where + " volume");
    if (!frame.bars.empty() && !(frame.bars.back().date < bar.date))
      throw ContractError(where + ": date " + bar.date.to_string() + " is not after " +
                          frame.bars.back().date.to_string() + " (row " +
                          std::to_string(frame.bars.size() + 1) + ")");
    if (!(bar.open > 0 && bar.high > 0 && bar.low > 0 && bar.close > 0))
      throw ContractError(where + ": prices must be positive");
    if (bar.volume < 0) throw ContractError(where + ": volume must be non-negative");
    if (!(bar.low <= std::min(bar.open, bar.close) && std::max(bar.open, bar.close) <= bar.high))
      throw ContractError(where + ": violates low <= open/close <= high");
    frame.bars.push_back(bar);
  }
  return frame;
}

TimeSeriesFrame load_ohlcv_csv(const std::string& path, std::string ticker) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (ticker.empty()) ticker = std::filesystem::path(path).stem().string();
  return parse_ohlcv_csv(buf.str(), std::move(ticker), path);
}

FrameSplit train_test_split(const TimeSeriesFrame& frame, double ratio) {
  require(ratio > 0.0 && ratio < 1.0, "train_test_split: ratio must lie in (0, 1)");
  // The small slack keeps e.g. 0.29 * 100 from flooring to 28.
  const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(frame.size()) + 1e-9));
  require(cut >= 1 && cut < frame.size(),
          "train_test_split: " + frame.ticker + " with " + std::to_string(frame.size()) +
              " bars leaves an empty side at ratio " + std::to_string(ratio));
  return {frame.slice(0, cut), frame.slice(cut, frame.size())};
}

FeatureScaler fit_scaler(const TimeSeriesFrame& train) {
  require(!train.bars.empty(), "fit_scaler: empty training frame");
  FeatureScaler s;
  const auto n = static_cast<double>(train.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double mean = 0.0;
    for (const auto& b : train.bars) mean += feature_value(b, f);
    mean /= n;
    double var = 0.0;
    for (const auto& b : train.bars) {
      const double d = feature_value(b, f) - mean;
      var += d * d;
    }
    var /= n;
    require(var > 0.0, "fit_scaler: feature '" + std::string(kFeatureNames[f]) + "' of " +
                           train.ticker + " has zero variance");
    s.mean[f] = mean;
    s.stddev[f] = std::sqrt(var);
  }
  s.fit_rows = train.size();
  s.fit_first = train.bars.front().date;
  s.fit_last = train.bars.back().date;
  return s;
}

Tensor FeatureScaler::transform(const TimeSeriesFrame& frame) const {
  require(!frame.bars.empty(), "scaler: empty frame");
  Tensor out({frame.size(), kFeatureCount});
  for (std::size_t t = 0; t < frame.size(); ++t)
    for (std::size_t f = 0; f < kFeatureCount; ++f) out.at(t, f) = apply(feature_value(frame.bars[t], f), f);
  return out;
}

WindowedDataset make_windows(const TimeSeriesFrame& frame, const FeatureScaler& scaler,
                             std::size_t window) {
  require(window >= 1, "make_windows: window must be positive");
  require(frame.size() > window, "make_windows: " + frame.ticker + " has " +
                                     std::to_string(frame.size()) + " bars, need more than " +
                                     std::to_string(window));
  const Tensor scaled = scaler.transform(frame);
  const std::size_t samples = frame.size() - window;
  WindowedDataset ds;
  ds.window = window;
  ds.inputs = Tensor({samples, kFeatureCount, window});
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      for (std::size_t l = 0; l < window; ++l) ds.inputs.at(i, f, l) = scaled.at(i + l, f);
    ds.targets.push_back(scaled.at(i + window, kClose));
    ds.target_dates.push_back(frame.bars[i + window].date);
    ds.target_index.push_back(i + window);
  }
  return ds;
}

}  // namespace wtlstm
