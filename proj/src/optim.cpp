#include "wtlstm/optim.hpp"

#include <cmath>

#include "wtlstm/error.hpp"

namespace wtlstm {

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
  require(pred.same_shape(target), "mse_loss: shape mismatch " + shape_string(pred.shape()) +
                                       " vs " + shape_string(target.shape()));
  const auto n = static_cast<double>(pred.size());
  MseResult out{0.0, Tensor(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    out.loss += diff * diff;
    out.grad[i] = 2.0 * diff / n;
  }
  out.loss /= n;
  return out;
}

void AdamHyper::validate() const {
  require(lr >= 0.0 && std::isfinite(lr), "adam: learning rate must be >= 0");
  require(beta1 > 0.0 && beta1 < 1.0, "adam: beta1 must lie in (0, 1)");
  require(beta2 > 0.0 && beta2 < 1.0, "adam: beta2 must lie in (0, 1)");
  require(eps > 0.0, "adam: eps must be positive");
}

void adam_step(Parameter& param, AdamState& state, const AdamHyper& hyper) {
  hyper.validate();
  require(param.value.same_shape(param.grad), "adam: value/grad shape mismatch for " + param.name);
  if (state.m.empty()) state = AdamState(param.value.shape());
  require(state.m.same_shape(param.value) && state.v.same_shape(param.value),
          "adam: optimizer state shape mismatch for " + param.name);
  if (!param.grad.all_finite())
    throw RuntimeFailure("adam: non-finite gradient in parameter '" + param.name + "'");

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    const double g = param.grad[i];
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    param.value[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

double StepDecay::rate(double base_lr, int epoch) const {
  require(every > 0 && factor > 0.0, "lr schedule: factor and period must be positive");
  return base_lr * std::pow(factor, epoch / every);
}

}  // namespace wtlstm
