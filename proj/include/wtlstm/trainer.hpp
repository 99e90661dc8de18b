#pragma once

#include <functional>
#include <vector>

#include "wtlstm/market_data.hpp"
#include "wtlstm/model.hpp"

namespace wtlstm {

struct TrainResult {
  ModelParameters params;
  std::vector<double> loss_curve;  // mean training MSE per epoch
};

using EpochCallback = std::function<void(int epoch, double loss, double lr)>;

/// Mini-batch Adam on MSE over shuffled windows. Gradients are zeroed at the
/// start of every step and the learning rate follows config.schedule. With the
/// same dataset and config the loss curve and parameters are bit-identical.
/// Throws RuntimeFailure naming the epoch and batch if the loss turns non-finite.
TrainResult train_model(const WindowedDataset& dataset, const ModelConfig& config,
                        const FilterBank& bank, const EpochCallback& on_epoch = {});

/// Forward pass over `inputs` in chunks; returns one scaled prediction per sample.
std::vector<double> predict_scaled(const ModelParameters& params, const Tensor& inputs,
                                   std::size_t chunk = 256);

}  // namespace wtlstm
