#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wtlstm/tensor.hpp"

namespace wtlstm {

/// Two-channel filter bank.
///
/// Analysis correlates the signal with the decomposition taps and keeps every
/// second output:
///   a[k] = sum_t dec_lo[t] * x[(2k + t) mod m]
///   d[k] = sum_t dec_hi[t] * x[(2k + t) mod m]
/// where m is the even part of the signal length. Synthesis scatters each
/// coefficient back through the reconstruction taps. For an orthonormal bank
/// the reconstruction taps equal the decomposition taps and the transform is an
/// orthogonal matrix, so energy is conserved exactly.
struct FilterBank {
  std::string name;
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
  std::vector<double> rec_lo;
  std::vector<double> rec_hi;

  std::size_t length() const { return dec_lo.size(); }
  bool orthonormal(double tol = 1e-10) const;
  // Throws ContractError on inconsistent tap lengths, non-finite taps, or a
  // bank that fails a numerical perfect-reconstruction probe.
  void validate() const;
};

/// Orthonormal bank built from a scaling filter h, with the quadrature mirror
/// high-pass g[n] = (-1)^n h[F-1-n].
FilterBank orthonormal_bank(std::string name, std::vector<double> scaling);

/// Names of the banks compiled into the library: "haar", "db2", "db4".
std::vector<std::string> builtin_bank_names();

/// Looks a bank up in a name -> bank table seeded with the built-ins.
class BankRegistry {
 public:
  BankRegistry();

  void add(FilterBank bank);
  // Parses the plain-text table format and adds every bank it contains.
  void load(std::istream& in, const std::string& source = "<stream>");
  void load_file(const std::string& path);
  const FilterBank& get(std::string_view name) const;
  bool contains(std::string_view name) const;

 private:
  std::map<std::string, FilterBank, std::less<>> banks_;
};

/// Built-in bank by name; throws ContractError for unknown names.
const FilterBank& builtin_bank(std::string_view name);

/// Reads banks from a plain-text table:
///
///   # comment
///   bank <name>
///   dec_lo <taps...>
///   dec_hi <taps...>
///   rec_lo <taps...>
///   rec_hi <taps...>
std::vector<FilterBank> parse_filter_banks(std::istream& in, const std::string& source);

/// Coefficient pyramid for a [channels x length] signal.
///
/// details[0] is the finest level. For a level whose input length n is odd
/// the last input sample passes through unchanged as the final approximation
/// coefficient, so approximation bands have ceil(n/2) entries and detail bands
/// floor(n/2).
struct WaveletCoeffs {
  std::string bank;
  std::size_t levels = 0;
  std::size_t original_length = 0;
  std::vector<std::size_t> level_lengths;  // input length seen by each level
  Tensor approx;                           // [channels x ceil(n_J / 2)]
  std::vector<Tensor> details;             // details[j]: [channels x floor(n_j / 2)]

  std::size_t channels() const { return approx.dim(0); }
  // Band 0 is the approximation, band j >= 1 the details of level j.
  std::size_t band_count() const { return levels + 1; }
  Tensor& band(std::size_t b) { return b == 0 ? approx : details[b - 1]; }
  const Tensor& band(std::size_t b) const { return b == 0 ? approx : details[b - 1]; }
};

/// Deepest level count allowed for a signal: the largest J with
/// filter_length * 2^(J-1) <= length, i.e. floor(log2(length / F)) + 1.
std::size_t max_levels(std::size_t length, const FilterBank& bank);

WaveletCoeffs dwt_forward(const Tensor& signal, const FilterBank& bank, std::size_t levels);
Tensor dwt_inverse(const WaveletCoeffs& coeffs, const FilterBank& bank);

// Transposes of the two linear maps above, used by backpropagation. They
// coincide with the inverse / forward transform for orthonormal banks.
Tensor dwt_forward_adjoint(const WaveletCoeffs& grad_coeffs, const FilterBank& bank);
WaveletCoeffs dwt_inverse_adjoint(const Tensor& grad_signal, const FilterBank& bank,
                                  std::size_t levels);

}  // namespace wtlstm
