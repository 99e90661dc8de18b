#pragma once

#include <vector>

#include "wtlstm/tensor.hpp"
#include "wtlstm/wavelet.hpp"

namespace wtlstm {

/// Wavelet-domain depthwise convolution layer.
///
/// Each sample is decomposed per channel, every band of every channel is
/// convolved with its own kernel (zero "same" padding) and scaled by the
/// band's gamma, then the signal is reconstructed:
///   X' = IWT(gamma_b * (w_{b,c} * WT(X)_{b,c}))
struct WTConvParams {
  WTConvParams() = default;
  WTConvParams(FilterBank bank, std::size_t levels, std::size_t channels,
               std::size_t kernel_size = 3);

  std::size_t bands() const { return levels + 1; }

  FilterBank bank;
  std::size_t levels = 1;
  std::size_t channels = 0;
  std::size_t kernel_size = 3;
  Parameter kernels;  // [bands x channels x kernel_size], band 0 = approximation
  Parameter gamma;    // [bands]
};

/// Sets every kernel to a centred unit impulse and gamma to 1, which makes
/// the layer an exact identity.
void set_identity(WTConvParams& params);

struct WTConvCache {
  std::vector<WaveletCoeffs> inputs;    // per sample, WT(X)
  std::vector<WaveletCoeffs> conv_out;  // per sample, kernel outputs before gamma
};

// X: [batch x channels x length].
Tensor wtconv1d_forward(const Tensor& x, const WTConvParams& params, WTConvCache* cache = nullptr);

// Accumulates into params.kernels.grad and params.gamma.grad; returns dL/dX.
Tensor wtconv1d_backward(const Tensor& grad_out, WTConvParams& params, const WTConvCache& cache);

// "Same"-padded 1-D correlation y[i] = sum_t w[t] x[i + t - k/2]; exposed for tests.
void depthwise_conv_row(std::span<const double> x, std::span<const double> w, std::span<double> y);

}  // namespace wtlstm
