#include "wtlstm/attention.hpp"

#include <cmath>

#include "wtlstm/dct.hpp"
#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Visits each normalisation group as (flat indices, channel of each index).
template <typename Fn>
void for_each_group(const Shape& shape, NormAxis axis, Fn&& fn) {
  const std::size_t batch = shape[0], channels = shape[1], length = shape[2];
  std::vector<std::size_t> idx;
  std::vector<std::size_t> chan;
  std::size_t group = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (axis == NormAxis::Length) {
      for (std::size_t c = 0; c < channels; ++c, ++group) {
        idx.clear();
        chan.clear();
        for (std::size_t l = 0; l < length; ++l) {
          idx.push_back((b * channels + c) * length + l);
          chan.push_back(c);
        }
        fn(group, idx, chan);
      }
    } else {
      for (std::size_t l = 0; l < length; ++l, ++group) {
        idx.clear();
        chan.clear();
        for (std::size_t c = 0; c < channels; ++c) {
          idx.push_back((b * channels + c) * length + l);
          chan.push_back(c);
        }
        fn(group, idx, chan);
      }
    }
  }
}

Tensor dct_rows(const Tensor& x) {
  const std::size_t rows = x.dim(0) * x.dim(1), length = x.dim(2);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto spec = dct_ii(std::span<const double>(x.data() + r * length, length));
    std::copy(spec.begin(), spec.end(), out.data() + r * length);
  }
  return out;
}

}  // namespace

Tensor layer_norm(const Tensor& f, std::span<const double> gain, std::span<const double> bias,
                  NormAxis axis, LayerNormCache* cache) {
  require(f.rank() == 3, "layer_norm: input must be [batch x C x L], got " + shape_string(f.shape()));
  require(gain.size() == f.dim(1) && bias.size() == f.dim(1),
          "layer_norm: gain/bias length must equal channel count");
  Tensor out(f.shape());
  Tensor normalized(f.shape());
  std::vector<double> inv_stds;
  for_each_group(f.shape(), axis, [&](std::size_t, const auto& idx, const auto& chan) {
    const auto n = static_cast<double>(idx.size());
    double mean = 0.0;
    for (auto i : idx) mean += f[i];
    mean /= n;
    double var = 0.0;
    for (auto i : idx) var += (f[i] - mean) * (f[i] - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_stds.push_back(inv_std);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double xhat = (f[idx[k]] - mean) * inv_std;
      normalized[idx[k]] = xhat;
      out[idx[k]] = gain[chan[k]] * xhat + bias[chan[k]];
    }
  });
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_stds);
    cache->axis = axis;
  }
  return out;
}

Tensor layer_norm_backward(const Tensor& grad_out, std::span<const double> gain,
                           std::span<double> grad_gain, std::span<double> grad_bias,
                           const LayerNormCache& cache) {
  require(grad_out.same_shape(cache.normalized), "layer_norm_backward: shape mismatch");
  const Tensor& xhat = cache.normalized;
  Tensor grad_in(grad_out.shape());
  for_each_group(grad_out.shape(), cache.axis, [&](std::size_t g, const auto& idx, const auto& chan) {
    const auto n = static_cast<double>(idx.size());
    double sum_d = 0.0;
    double sum_dx = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double gy = grad_out[idx[k]];
      grad_gain[chan[k]] += gy * xhat[idx[k]];
      grad_bias[chan[k]] += gy;
      const double d = gy * gain[chan[k]];
      sum_d += d;
      sum_dx += d * xhat[idx[k]];
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double d = grad_out[idx[k]] * gain[chan[k]];
      grad_in[idx[k]] = cache.inv_std[g] / n * (n * d - sum_d - xhat[idx[k]] * sum_dx);
    }
  });
  return grad_in;
}

AttentionParams::AttentionParams(std::size_t c)
    : channels(c),
      w1("attention.w1", Tensor({c, 2 * c})),
      b1("attention.b1", Tensor({2 * c})),
      w2("attention.w2", Tensor({2 * c, c})),
      b2("attention.b2", Tensor({c})),
      ln_gain("attention.ln_gain", Tensor({c}, 1.0)),
      ln_bias("attention.ln_bias", Tensor({c})) {
  require(c >= 1, "channel attention needs at least one channel");
}

void AttentionParams::init(Rng& rng) {
  glorot_uniform(w1.value, channels, 2 * channels, rng);
  glorot_uniform(w2.value, 2 * channels, channels, rng);
  b1.value.fill(0.0);
  b2.value.fill(0.0);
  ln_gain.value.fill(1.0);
  ln_bias.value.fill(0.0);
}

AttentionOutput channel_attention(const Tensor& x, const AttentionParams& p, AttentionCache* cache) {
  require(x.rank() == 3, "channel_attention: input must be [batch x C x L], got " +
                             shape_string(x.shape()));
  const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  require(channels == p.channels, "channel_attention: expected " + std::to_string(p.channels) +
                                      " channels, got " + std::to_string(channels));
  const std::size_t hidden = 2 * channels;

  LayerNormCache norm_cache;
  const Tensor normed = layer_norm(dct_rows(x), p.ln_gain.value.values(), p.ln_bias.value.values(),
                                   p.norm_axis, &norm_cache);

  Tensor pooled({batch, channels});
  Tensor hidden_pre({batch, hidden});
  Tensor weights({batch, channels});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      double s = 0.0;
      for (std::size_t l = 0; l < length; ++l) s += normed.at(b, c, l);
      pooled.at(b, c) = s / static_cast<double>(length);
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      double s = p.b1.value[j];
      for (std::size_t c = 0; c < channels; ++c) s += pooled.at(b, c) * p.w1.value.at(c, j);
      hidden_pre.at(b, j) = s;
    }
    for (std::size_t c = 0; c < channels; ++c) {
      double s = p.b2.value[c];
      for (std::size_t j = 0; j < hidden; ++j)
        s += std::max(hidden_pre.at(b, j), 0.0) * p.w2.value.at(j, c);
      weights.at(b, c) = sigmoid(s);
    }
  }

  Tensor y(x.shape());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t l = 0; l < length; ++l) y.at(b, c, l) = x.at(b, c, l) * weights.at(b, c);

  if (cache) {
    cache->x = x;
    cache->norm = std::move(norm_cache);
    cache->pooled = pooled;
    cache->hidden_pre = hidden_pre;
    cache->weights = weights;
  }
  return {std::move(y), std::move(weights)};
}

Tensor channel_attention_backward(const Tensor& grad_y, AttentionParams& p, const AttentionCache& cache) {
  const Tensor& x = cache.x;
  require(grad_y.same_shape(x), "channel_attention_backward: shape mismatch");
  const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  const std::size_t hidden = 2 * channels;

  Tensor grad_x(x.shape());
  Tensor grad_normed(x.shape());
  std::vector<double> grad_logit(channels);
  std::vector<double> grad_hidden(hidden);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double w = cache.weights.at(b, c);
      double gw = 0.0;
      for (std::size_t l = 0; l < length; ++l) {
        grad_x.at(b, c, l) = grad_y.at(b, c, l) * w;
        gw += grad_y.at(b, c, l) * x.at(b, c, l);
      }
      grad_logit[c] = gw * w * (1.0 - w);
      p.b2.grad[c] += grad_logit[c];
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      const double pre = cache.hidden_pre.at(b, j);
      const double act = std::max(pre, 0.0);
      double g = 0.0;
      for (std::size_t c = 0; c < channels; ++c) {
        p.w2.grad.at(j, c) += act * grad_logit[c];
        g += p.w2.value.at(j, c) * grad_logit[c];
      }
      grad_hidden[j] = pre > 0.0 ? g : 0.0;
      p.b1.grad[j] += grad_hidden[j];
    }
    for (std::size_t c = 0; c < channels; ++c) {
      double gp = 0.0;
      for (std::size_t j = 0; j < hidden; ++j) {
        p.w1.grad.at(c, j) += cache.pooled.at(b, c) * grad_hidden[j];
        gp += p.w1.value.at(c, j) * grad_hidden[j];
      }
      for (std::size_t l = 0; l < length; ++l)
        grad_normed.at(b, c, l) = gp / static_cast<double>(length);
    }
  }

  const Tensor grad_spec = layer_norm_backward(grad_normed, p.ln_gain.value.values(),
                                               p.ln_gain.grad.values(), p.ln_bias.grad.values(),
                                               cache.norm);
  for (std::size_t r = 0; r < batch * channels; ++r) {
    auto g = dct_ii_adjoint(std::span<const double>(grad_spec.data() + r * length, length));
    for (std::size_t l = 0; l < length; ++l) grad_x[r * length + l] += g[l];
  }
  return grad_x;
}

}  // namespace wtlstm
