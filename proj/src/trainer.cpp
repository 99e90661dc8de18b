#include "wtlstm/trainer.hpp"

#include <cmath>
#include <numeric>

#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

Tensor gather(const Tensor& inputs, const std::vector<std::size_t>& order, std::size_t begin,
              std::size_t end) {
  const std::size_t per = inputs.dim(1) * inputs.dim(2);
  Tensor out({end - begin, inputs.dim(1), inputs.dim(2)});
  for (std::size_t k = begin; k < end; ++k)
    std::copy(inputs.data() + order[k] * per, inputs.data() + (order[k] + 1) * per,
              out.data() + (k - begin) * per);
  return out;
}

}  // namespace

TrainResult train_model(const WindowedDataset& dataset, const ModelConfig& config,
                        const FilterBank& bank, const EpochCallback& on_epoch) {
  config.validate();
  require(dataset.size() >= 1, "train_model: empty dataset");
  require(dataset.inputs.rank() == 3 && dataset.inputs.dim(0) == dataset.size(),
          "train_model: inputs and targets disagree on sample count");
  require(dataset.inputs.dim(1) == config.channels && dataset.inputs.dim(2) == config.window,
          "train_model: dataset windows are " + shape_string(dataset.inputs.shape()) +
              " but config expects channels " + std::to_string(config.channels) + ", window " +
              std::to_string(config.window));

  TrainResult result{init_model(config, bank), {}};
  ModelParameters& params = result.params;
  auto trainable = params.all();
  std::vector<AdamState> states;
  states.reserve(trainable.size());
  for (auto* p : trainable) states.emplace_back(p->value.shape());

  Rng rng(derive_seed(config.seed, "batch-order"));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ModelCache cache;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    AdamHyper hyper = config.adam;
    hyper.lr = config.schedule.rate(config.adam.lr, epoch);
    shuffle(order, rng);

    double epoch_sq = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const Tensor x = gather(dataset.inputs, order, begin, end);
      Tensor target({end - begin, 1});
      for (std::size_t k = begin; k < end; ++k) target[k - begin] = dataset.targets[order[k]];

      params.zero_grad();
      const Tensor pred = model_forward(x, params, &cache);
      const MseResult loss = mse_loss(pred, target);
      if (!std::isfinite(loss.loss))
        throw RuntimeFailure("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1) +
                             ", batch " + std::to_string(batch_index + 1));
      model_backward(loss.grad, params, cache);
      for (std::size_t i = 0; i < trainable.size(); ++i) adam_step(*trainable[i], states[i], hyper);
      epoch_sq += loss.loss * static_cast<double>(end - begin);
    }
    const double epoch_loss = epoch_sq / static_cast<double>(order.size());
    result.loss_curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss, hyper.lr);
  }
  return result;
}

std::vector<double> predict_scaled(const ModelParameters& params, const Tensor& inputs, std::size_t chunk) {
  require(inputs.rank() == 3, "predict: inputs must be [samples x C x L]");
  std::vector<std::size_t> order(inputs.dim(0));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> out;
  out.reserve(order.size());
  for (std::size_t begin = 0; begin < order.size(); begin += chunk) {
    const std::size_t end = std::min(order.size(), begin + chunk);
    const Tensor y = model_forward(gather(inputs, order, begin, end), params);
    out.insert(out.end(), y.values().begin(), y.values().end());
  }
  return out;
}

}  // namespace wtlstm
