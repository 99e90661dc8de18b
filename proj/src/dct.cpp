#include "wtlstm/dct.hpp"

#include <cmath>
#include <numbers>

#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

void fft_pow2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles from the exact angle rather than repeated multiplication.
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      const cd w(std::cos(angle), std::sin(angle));
      for (std::size_t i = 0; i < n; i += len) {
        const cd u = a[i + k];
        const cd v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

void fft_bluestein(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle small and accurate.
    const std::size_t k2 = (k * k) % (2 * n);
    const double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = cd(std::cos(angle), std::sin(angle));
  }
  std::vector<cd> u(m), v(m);
  for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
  v[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) v[k] = v[m - k] = std::conj(chirp[k]);

  fft_pow2(u, false);
  fft_pow2(v, false);
  for (std::size_t i = 0; i < m; ++i) u[i] *= v[i];
  fft_pow2(u, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * scale * chirp[k];
}

}  // namespace

void fft(std::vector<cd>& data, bool inverse) {
  if (data.size() <= 1) return;
  if (is_pow2(data.size())) fft_pow2(data, inverse);
  else fft_bluestein(data, inverse);
}

std::vector<double> dct_ii(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 1, "dct_ii: empty input");
  std::vector<cd> ext(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    ext[i] = x[i];
    ext[2 * n - 1 - i] = x[i];
  }
  fft(ext);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = -std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    out[k] = 0.5 * (ext[k] * cd(std::cos(angle), std::sin(angle))).real();
  }
  return out;
}

std::vector<double> dct_ii_naive(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 1, "dct_ii_naive: empty input");
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += x[i] * std::cos(std::numbers::pi / static_cast<double>(n) *
                           (static_cast<double>(i) + 0.5) * static_cast<double>(k));
    out[k] = s;
  }
  return out;
}

std::vector<double> dct_ii_adjoint(std::span<const double> grad) {
  const std::size_t n = grad.size();
  require(n >= 1, "dct_ii_adjoint: empty input");
  // g_n = Re sum_k (G_k e^{i pi k / 2N}) e^{2 pi i n k / 2N}
  std::vector<cd> z(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    z[k] = grad[k] * cd(std::cos(angle), std::sin(angle));
  }
  fft(z, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = z[i].real();
  return out;
}

}  // namespace wtlstm
