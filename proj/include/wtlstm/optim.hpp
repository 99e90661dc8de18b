#pragma once

#include <cstdint>

#include "wtlstm/tensor.hpp"

namespace wtlstm {

struct MseResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d pred
};

// loss = mean((pred - target)^2), grad = 2 (pred - target) / N.
MseResult mse_loss(const Tensor& pred, const Tensor& target);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  AdamState() = default;
  explicit AdamState(const Shape& shape) : m(shape), v(shape) {}

  Tensor m;
  Tensor v;
  std::int64_t t = 0;
};

/// One bias-corrected Adam update of `param.value` from `param.grad`.
/// Throws RuntimeFailure naming the parameter if its gradient is not finite.
void adam_step(Parameter& param, AdamState& state, const AdamHyper& hyper);

/// Step decay: lr(epoch) = base * factor^floor(epoch / every).
struct StepDecay {
  double factor = 0.5;
  int every = 50;

  double rate(double base_lr, int epoch) const;
};

}  // namespace wtlstm
