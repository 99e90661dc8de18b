#include "wtlstm/wavelet.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>

#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

// One analysis level on a single row.
void analyze(std::span<const double> x, std::span<const double> lo, std::span<const double> hi,
             std::span<double> a, std::span<double> d) {
  const std::size_t n = x.size();
  const std::size_t m = n - n % 2;
  const std::size_t half = m / 2;
  for (std::size_t k = 0; k < half; ++k) {
    double sa = 0.0;
    double sd = 0.0;
    for (std::size_t t = 0; t < lo.size(); ++t) {
      const double v = x[(2 * k + t) % m];
      sa += lo[t] * v;
      sd += hi[t] * v;
    }
    a[k] = sa;
    d[k] = sd;
  }
  if (n % 2) a[half] = x[n - 1];
}

// One synthesis level on a single row; exact transpose of analyze().
void synthesize(std::span<const double> a, std::span<const double> d, std::span<const double> lo,
                std::span<const double> hi, std::span<double> x) {
  const std::size_t n = x.size();
  const std::size_t m = n - n % 2;
  const std::size_t half = m / 2;
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t t = 0; t < lo.size(); ++t) x[(2 * k + t) % m] += lo[t] * a[k] + hi[t] * d[k];
  }
  if (n % 2) x[n - 1] = a[half];
}

std::span<const double> row(const Tensor& t, std::size_t r) {
  return {t.data() + r * t.dim(1), t.dim(1)};
}
std::span<double> row(Tensor& t, std::size_t r) { return {t.data() + r * t.dim(1), t.dim(1)}; }

WaveletCoeffs multilevel_analyze(const Tensor& signal, const std::string& bank_name,
                                 std::span<const double> lo, std::span<const double> hi,
                                 std::size_t levels) {
  const std::size_t channels = signal.dim(0);
  WaveletCoeffs out;
  out.bank = bank_name;
  out.levels = levels;
  out.original_length = signal.dim(1);

  Tensor current = signal;
  for (std::size_t j = 0; j < levels; ++j) {
    const std::size_t n = current.dim(1);
    out.level_lengths.push_back(n);
    Tensor a({channels, (n + 1) / 2});
    Tensor d({channels, n / 2});
    for (std::size_t c = 0; c < channels; ++c) analyze(row(current, c), lo, hi, row(a, c), row(d, c));
    out.details.push_back(std::move(d));
    current = std::move(a);
  }
  out.approx = std::move(current);
  return out;
}

Tensor multilevel_synthesize(const WaveletCoeffs& coeffs, std::span<const double> lo,
                             std::span<const double> hi) {
  require(coeffs.levels >= 1 && coeffs.details.size() == coeffs.levels &&
              coeffs.level_lengths.size() == coeffs.levels,
          "wavelet coefficients are structurally inconsistent");
  const std::size_t channels = coeffs.approx.dim(0);
  Tensor current = coeffs.approx;
  for (std::size_t j = coeffs.levels; j-- > 0;) {
    const std::size_t n = coeffs.level_lengths[j];
    const Tensor& d = coeffs.details[j];
    require(current.dim(0) == channels && d.dim(0) == channels &&
                current.dim(1) == (n + 1) / 2 && d.dim(1) == n / 2,
            "wavelet coefficient band " + std::to_string(j + 1) + " has the wrong length");
    Tensor x({channels, n});
    for (std::size_t c = 0; c < channels; ++c) synthesize(row(current, c), row(d, c), lo, hi, row(x, c));
    current = std::move(x);
  }
  return current;
}

void check_signal(const Tensor& signal, const FilterBank& bank, std::size_t levels) {
  require(signal.rank() == 2, "dwt: signal must be [channels x length], got " +
                                  shape_string(signal.shape()));
  const std::size_t length = signal.dim(1);
  require(length >= bank.length(), "dwt: signal length " + std::to_string(length) +
                                       " is shorter than the " + bank.name + " filter (" +
                                       std::to_string(bank.length()) + " taps)");
  require(levels >= 1, "dwt: need at least one decomposition level");
  const std::size_t deepest = max_levels(length, bank);
  require(levels <= deepest, "dwt: " + std::to_string(levels) + " levels is too deep for length " +
                                 std::to_string(length) + " with " + bank.name + " (max " +
                                 std::to_string(deepest) + ")");
}

std::vector<double> parse_taps(std::istringstream& line) {
  std::vector<double> taps;
  std::string token;
  while (line >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw ContractError("bad filter tap '" + token + "'");
    taps.push_back(v);
  }
  return taps;
}

}  // namespace

bool FilterBank::orthonormal(double tol) const {
  if (dec_lo != rec_lo || dec_hi != rec_hi) return false;
  const std::size_t f = length();
  // Rows {lo, hi shifted by even offsets} must be orthonormal.
  for (std::size_t shift = 0; shift < f; shift += 2) {
    double ll = 0, hh = 0, lh = 0, hl = 0;
    for (std::size_t t = 0; t + shift < f; ++t) {
      ll += dec_lo[t] * dec_lo[t + shift];
      hh += dec_hi[t] * dec_hi[t + shift];
      lh += dec_lo[t] * dec_hi[t + shift];
      hl += dec_hi[t] * dec_lo[t + shift];
    }
    const double expect = shift == 0 ? 1.0 : 0.0;
    if (std::abs(ll - expect) > tol || std::abs(hh - expect) > tol || std::abs(lh) > tol ||
        std::abs(hl) > tol)
      return false;
  }
  return true;
}

void FilterBank::validate() const {
  require(!name.empty(), "filter bank needs a name");
  const std::size_t f = dec_lo.size();
  require(f >= 2 && f % 2 == 0, "filter bank '" + name + "' needs an even tap count >= 2");
  require(dec_hi.size() == f && rec_lo.size() == f && rec_hi.size() == f,
          "filter bank '" + name + "' has tap lists of different lengths");
  for (const auto* taps : {&dec_lo, &dec_hi, &rec_lo, &rec_hi})
    for (double v : *taps) require(std::isfinite(v), "filter bank '" + name + "' has a non-finite tap");

  // Probe perfect reconstruction on every unit impulse of a period-2F signal.
  const std::size_t n = 2 * f;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor x({1, n});
    x[i] = 1.0;
    auto coeffs = multilevel_analyze(x, name, dec_lo, dec_hi, 1);
    Tensor y = multilevel_synthesize(coeffs, rec_lo, rec_hi);
    for (std::size_t k = 0; k < n; ++k)
      require(std::abs(y[k] - x[k]) < 1e-9,
              "filter bank '" + name + "' does not reconstruct perfectly");
  }
}

FilterBank orthonormal_bank(std::string name, std::vector<double> scaling) {
  const std::size_t f = scaling.size();
  std::vector<double> hi(f);
  for (std::size_t n = 0; n < f; ++n) hi[n] = (n % 2 ? -1.0 : 1.0) * scaling[f - 1 - n];
  FilterBank bank{std::move(name), scaling, hi, scaling, hi};
  return bank;
}

std::vector<std::string> builtin_bank_names() { return {"haar", "db2", "db4"}; }

const FilterBank& builtin_bank(std::string_view name) {
  static const std::map<std::string, FilterBank, std::less<>> banks = [] {
    std::map<std::string, FilterBank, std::less<>> m;
    const double r2 = std::numbers::sqrt2;
    const double r3 = std::numbers::sqrt3;
    m["haar"] = orthonormal_bank("haar", {1.0 / r2, 1.0 / r2});
    m["db2"] = orthonormal_bank("db2", {(1 + r3) / (4 * r2), (3 + r3) / (4 * r2),
                                        (3 - r3) / (4 * r2), (1 - r3) / (4 * r2)});
    m["db4"] = orthonormal_bank(
        "db4", {0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
                -0.027983769416859858, -0.18703481171909309, 0.030841381835560764,
                0.0328830116668852, -0.010597401785069032});
    return m;
  }();
  auto it = banks.find(name);
  if (it == banks.end()) throw ContractError("unknown wavelet '" + std::string(name) + "'");
  return it->second;
}

std::vector<FilterBank> parse_filter_banks(std::istream& in, const std::string& source) {
  std::vector<FilterBank> banks;
  std::string text;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ContractError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, text)) {
    ++line_no;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream line(text);
    std::string key;
    if (!(line >> key)) continue;
    if (key == "bank") {
      FilterBank b;
      if (!(line >> b.name)) fail("bank line needs a name");
      banks.push_back(std::move(b));
      continue;
    }
    if (banks.empty()) fail("'" + key + "' before any 'bank' line");
    std::vector<double> taps;
    try {
      taps = parse_taps(line);
    } catch (const ContractError& e) {
      fail(e.what());
    }
    auto& b = banks.back();
    if (key == "dec_lo") b.dec_lo = std::move(taps);
    else if (key == "dec_hi") b.dec_hi = std::move(taps);
    else if (key == "rec_lo") b.rec_lo = std::move(taps);
    else if (key == "rec_hi") b.rec_hi = std::move(taps);
    else fail("unknown key '" + key + "'");
  }
  for (const auto& b : banks) b.validate();
  return banks;
}

BankRegistry::BankRegistry() {
  for (const auto& name : builtin_bank_names()) banks_.emplace(name, builtin_bank(name));
}

void BankRegistry::add(FilterBank bank) {
  bank.validate();
  std::string key = bank.name;
  banks_.insert_or_assign(std::move(key), std::move(bank));
}

void BankRegistry::load(std::istream& in, const std::string& source) {
  for (auto& b : parse_filter_banks(in, source)) add(std::move(b));
}

void BankRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open filter bank file '" + path + "'");
  load(in, path);
}

const FilterBank& BankRegistry::get(std::string_view name) const {
  auto it = banks_.find(name);
  if (it == banks_.end()) throw ContractError("unknown wavelet '" + std::string(name) + "'");
  return it->second;
}

bool BankRegistry::contains(std::string_view name) const { return banks_.find(name) != banks_.end(); }

std::size_t max_levels(std::size_t length, const FilterBank& bank) {
  std::size_t levels = 0;
  std::size_t span = bank.length();
  while (span <= length) {
    ++levels;
    span *= 2;
  }
  return levels;
}

WaveletCoeffs dwt_forward(const Tensor& signal, const FilterBank& bank, std::size_t levels) {
  check_signal(signal, bank, levels);
  return multilevel_analyze(signal, bank.name, bank.dec_lo, bank.dec_hi, levels);
}

Tensor dwt_inverse(const WaveletCoeffs& coeffs, const FilterBank& bank) {
  require(coeffs.bank == bank.name, "dwt_inverse: coefficients come from bank '" + coeffs.bank +
                                        "' but '" + bank.name + "' was supplied");
  return multilevel_synthesize(coeffs, bank.rec_lo, bank.rec_hi);
}

Tensor dwt_forward_adjoint(const WaveletCoeffs& grad_coeffs, const FilterBank& bank) {
  require(grad_coeffs.bank == bank.name, "dwt_forward_adjoint: bank mismatch");
  return multilevel_synthesize(grad_coeffs, bank.dec_lo, bank.dec_hi);
}

WaveletCoeffs dwt_inverse_adjoint(const Tensor& grad_signal, const FilterBank& bank,
                                  std::size_t levels) {
  check_signal(grad_signal, bank, levels);
  return multilevel_analyze(grad_signal, bank.name, bank.rec_lo, bank.rec_hi, levels);
}

}  // namespace wtlstm
