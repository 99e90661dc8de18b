#pragma once

#include <span>

#include "wtlstm/tensor.hpp"

namespace wtlstm {

// Axis normalised by layer_norm on a [batch x C x L] tensor.
enum class NormAxis {
  Length,    // over L for each (sample, channel)
  Channels,  // over C for each (sample, position)
};

struct LayerNormCache {
  Tensor normalized;            // (x - mean) * inv_std, before the affine
  std::vector<double> inv_std;  // one per normalisation group
  NormAxis axis = NormAxis::Length;
};

inline constexpr double kLayerNormEps = 1e-5;

/// Zero-mean, unit-variance (population) normalisation along `axis`, followed
/// by a per-channel affine gain * x + bias. Constant groups map to 0 + bias.
Tensor layer_norm(const Tensor& f, std::span<const double> gain, std::span<const double> bias,
                  NormAxis axis = NormAxis::Length, LayerNormCache* cache = nullptr);

/// Returns dL/df and accumulates gain/bias gradients.
Tensor layer_norm_backward(const Tensor& grad_out, std::span<const double> gain,
                           std::span<double> grad_gain, std::span<double> grad_bias,
                           const LayerNormCache& cache);

/// Channel attention driven by DCT features.
///
/// F = DCT_L(X), F^ = LayerNorm(F), p = mean_L(F^),
/// w = sigmoid(W2^T relu(W1^T p + b1) + b2), Y = X * w (broadcast over L).
struct AttentionParams {
  AttentionParams() = default;
  explicit AttentionParams(std::size_t channels);

  void init(Rng& rng);  // Glorot matrices, zero biases, unit gain

  std::size_t channels = 0;
  NormAxis norm_axis = NormAxis::Channels;
  Parameter w1;       // [C x 2C]
  Parameter b1;       // [2C]
  Parameter w2;       // [2C x C]
  Parameter b2;       // [C]
  Parameter ln_gain;  // [C]
  Parameter ln_bias;  // [C]
};

struct AttentionOutput {
  Tensor y;        // [batch x C x L]
  Tensor weights;  // [batch x C], each in (0, 1)
};

struct AttentionCache {
  Tensor x;
  LayerNormCache norm;
  Tensor pooled;      // [batch x C]
  Tensor hidden_pre;  // [batch x 2C], before relu
  Tensor weights;     // [batch x C]
};

AttentionOutput channel_attention(const Tensor& x, const AttentionParams& params,
                                  AttentionCache* cache = nullptr);

// Accumulates parameter gradients; returns dL/dX (direct path plus the path
// through the attention weights).
Tensor channel_attention_backward(const Tensor& grad_y, AttentionParams& params,
                                  const AttentionCache& cache);

}  // namespace wtlstm
