#pragma once

#include <complex>
#include <span>
#include <vector>

namespace wtlstm {

/// In-place discrete Fourier transform of any length (radix-2 for powers of
/// two, Bluestein chirp-z otherwise). `inverse` uses e^{+i...} and does not
/// scale by 1/n.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

/// Unnormalised DCT-II: X_k = sum_n x_n cos(pi/N (n + 1/2) k).
/// Computed through a length-2N FFT of the even extension [x, reverse(x)].
std::vector<double> dct_ii(std::span<const double> x);

/// The same transform as a direct O(N^2) sum.
std::vector<double> dct_ii_naive(std::span<const double> x);

/// Transpose of dct_ii: g_n = sum_k G_k cos(pi/N (n + 1/2) k).
std::vector<double> dct_ii_adjoint(std::span<const double> grad);

}  // namespace wtlstm
