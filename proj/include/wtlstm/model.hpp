#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wtlstm/attention.hpp"
#include "wtlstm/lstm.hpp"
#include "wtlstm/optim.hpp"
#include "wtlstm/wtconv.hpp"

namespace wtlstm {

struct ModelConfig {
  std::size_t window = 32;
  std::size_t hidden = 64;
  std::size_t channels = 5;
  std::string wavelet = "haar";
  std::size_t wavelet_levels = 1;
  int epochs = 200;
  std::size_t batch_size = 32;
  AdamHyper adam;
  StepDecay schedule;
  std::uint64_t seed = 42;
  // Ablation switches; both off gives a plain LSTM.
  bool use_wtconv = true;
  bool use_attention = true;

  void validate() const;
};

/// Every trainable value of the forecaster, in pipeline order.
struct ModelParameters {
  bool use_wtconv = true;
  bool use_attention = true;
  WTConvParams wtconv;
  AttentionParams attention;
  LstmParams lstm;
  HeadParams head;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  void zero_grad();
};

/// Seeded initialisation: identity wavelet convolution, Glorot matrices,
/// zero biases, forget-gate bias 1.
ModelParameters init_model(const ModelConfig& config, const FilterBank& bank);

struct ModelCache {
  WTConvCache wtconv;
  AttentionCache attention;
  LstmSequenceCache lstm;
  Tensor final_hidden;
};

/// window [batch x C x L] -> prediction [batch x 1] via
/// WTConv1d -> channel attention -> LSTM -> linear head.
Tensor model_forward(const Tensor& window, const ModelParameters& params, ModelCache* cache = nullptr);

// Accumulates gradients into every parameter; returns dL/dwindow.
Tensor model_backward(const Tensor& grad_y, ModelParameters& params, const ModelCache& cache);

}  // namespace wtlstm
