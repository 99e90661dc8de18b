#include "wtlstm/model.hpp"

#include "wtlstm/error.hpp"

namespace wtlstm {

void ModelConfig::validate() const {
  require(window >= 2, "config: window must be >= 2");
  require(hidden >= 1, "config: hidden must be >= 1");
  require(channels >= 1, "config: channels must be >= 1");
  require(wavelet_levels >= 1, "config: wavelet_levels must be >= 1");
  require(epochs >= 1, "config: epochs must be >= 1");
  require(batch_size >= 1, "config: batch_size must be >= 1");
  require(adam.lr > 0.0, "config: learning_rate must be > 0");
  adam.validate();
  require(schedule.factor > 0.0 && schedule.every >= 1, "config: invalid lr decay schedule");
}

std::vector<Parameter*> ModelParameters::all() {
  std::vector<Parameter*> out;
  if (use_wtconv) {
    out.push_back(&wtconv.kernels);
    out.push_back(&wtconv.gamma);
  }
  if (use_attention) {
    for (auto* p : {&attention.w1, &attention.b1, &attention.w2, &attention.b2, &attention.ln_gain,
                    &attention.ln_bias})
      out.push_back(p);
  }
  for (std::size_t g = 0; g < 4; ++g) out.push_back(&lstm.w[g]);
  for (std::size_t g = 0; g < 4; ++g) out.push_back(&lstm.u[g]);
  for (std::size_t g = 0; g < 4; ++g) out.push_back(&lstm.b[g]);
  out.push_back(&head.w_out);
  out.push_back(&head.b_out);
  return out;
}

std::vector<const Parameter*> ModelParameters::all() const {
  auto mut = const_cast<ModelParameters*>(this)->all();
  return {mut.begin(), mut.end()};
}

void ModelParameters::zero_grad() {
  for (auto* p : all()) p->zero_grad();
}

ModelParameters init_model(const ModelConfig& config, const FilterBank& bank) {
  config.validate();
  require(config.wavelet_levels <= max_levels(config.window, bank),
          "config: " + std::to_string(config.wavelet_levels) + " wavelet levels do not fit a window of " +
              std::to_string(config.window) + " with " + bank.name);
  Rng rng(derive_seed(config.seed, "model-init"));
  ModelParameters m;
  m.use_wtconv = config.use_wtconv;
  m.use_attention = config.use_attention;
  m.wtconv = WTConvParams(bank, config.wavelet_levels, config.channels);
  m.attention = AttentionParams(config.channels);
  m.attention.init(rng);
  m.lstm = LstmParams(config.channels, config.hidden);
  m.lstm.init(rng);
  m.head = HeadParams(config.hidden, 1);
  m.head.init(rng);
  return m;
}

Tensor model_forward(const Tensor& window, const ModelParameters& p, ModelCache* cache) {
  require(window.rank() == 3, "model_forward: window must be [batch x C x L], got " +
                                  shape_string(window.shape()));
  Tensor x = p.use_wtconv ? wtconv1d_forward(window, p.wtconv, cache ? &cache->wtconv : nullptr) : window;
  if (p.use_attention) x = channel_attention(x, p.attention, cache ? &cache->attention : nullptr).y;
  Tensor h = lstm_sequence(x, p.lstm, cache ? &cache->lstm : nullptr);
  Tensor y = linear_head(h, p.head);
  if (cache) cache->final_hidden = std::move(h);
  return y;
}

Tensor model_backward(const Tensor& grad_y, ModelParameters& p, const ModelCache& cache) {
  Tensor g = linear_head_backward(grad_y, cache.final_hidden, p.head);
  g = lstm_sequence_backward(g, p.lstm, cache.lstm);
  if (p.use_attention) g = channel_attention_backward(g, p.attention, cache.attention);
  if (p.use_wtconv) g = wtconv1d_backward(g, p.wtconv, cache.wtconv);
  return g;
}

}  // namespace wtlstm
