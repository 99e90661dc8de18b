#include "wtlstm/lstm.hpp"

#include <cmath>

#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

constexpr const char* kGateNames[4] = {"i", "f", "o", "g"};

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

LstmParams::LstmParams(std::size_t in, std::size_t h) : input_dim(in), hidden(h) {
  require(in >= 1 && h >= 1, "lstm: input_dim and hidden must be positive");
  for (std::size_t g = 0; g < 4; ++g) {
    const std::string tag = kGateNames[g];
    w[g] = Parameter("lstm.w_" + tag, Tensor({in, h}));
    u[g] = Parameter("lstm.u_" + tag, Tensor({h, h}));
    b[g] = Parameter("lstm.b_" + tag, Tensor({h}));
  }
}

void LstmParams::init(Rng& rng) {
  for (std::size_t g = 0; g < 4; ++g) {
    glorot_uniform(w[g].value, input_dim, hidden, rng);
    glorot_uniform(u[g].value, hidden, hidden, rng);
    b[g].value.fill(g == kForgetGate ? 1.0 : 0.0);
  }
}

LstmState lstm_cell(std::span<const double> x, const LstmState& prev, const LstmParams& p,
                    LstmStepCache* cache) {
  const std::size_t n_in = p.input_dim, hid = p.hidden;
  require(x.size() == n_in, "lstm_cell: input has " + std::to_string(x.size()) +
                                " features, expected " + std::to_string(n_in));
  require(prev.h.size() == hid && prev.c.size() == hid, "lstm_cell: state size mismatch");

  std::array<std::vector<double>, 4> act;
  for (std::size_t g = 0; g < 4; ++g) {
    std::vector<double> pre(p.b[g].value.values().begin(), p.b[g].value.values().end());
    const double* wg = p.w[g].value.data();
    const double* ug = p.u[g].value.data();
    for (std::size_t k = 0; k < n_in; ++k) {
      const double xk = x[k];
      const double* row = wg + k * hid;
      for (std::size_t j = 0; j < hid; ++j) pre[j] += xk * row[j];
    }
    for (std::size_t k = 0; k < hid; ++k) {
      const double hk = prev.h[k];
      const double* row = ug + k * hid;
      for (std::size_t j = 0; j < hid; ++j) pre[j] += hk * row[j];
    }
    for (double& v : pre) v = g == kCellGate ? std::tanh(v) : sigmoid(v);
    act[g] = std::move(pre);
  }

  LstmState next{std::vector<double>(hid), std::vector<double>(hid)};
  std::vector<double> tanh_c(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    next.c[j] = act[kForgetGate][j] * prev.c[j] + act[kInputGate][j] * act[kCellGate][j];
    tanh_c[j] = std::tanh(next.c[j]);
    next.h[j] = act[kOutputGate][j] * tanh_c[j];
  }
  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->i = std::move(act[kInputGate]);
    cache->f = std::move(act[kForgetGate]);
    cache->o = std::move(act[kOutputGate]);
    cache->g = std::move(act[kCellGate]);
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

LstmStepGrad lstm_cell_backward(std::span<const double> dh, std::span<const double> dc,
                                LstmParams& p, const LstmStepCache& s) {
  const std::size_t n_in = p.input_dim, hid = p.hidden;
  std::array<std::vector<double>, 4> dpre;
  for (auto& v : dpre) v.assign(hid, 0.0);
  LstmStepGrad out{std::vector<double>(n_in), std::vector<double>(hid), std::vector<double>(hid)};

  for (std::size_t j = 0; j < hid; ++j) {
    const double dct = dc[j] + dh[j] * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
    dpre[kOutputGate][j] = dh[j] * s.tanh_c[j] * s.o[j] * (1.0 - s.o[j]);
    dpre[kInputGate][j] = dct * s.g[j] * s.i[j] * (1.0 - s.i[j]);
    dpre[kForgetGate][j] = dct * s.c_prev[j] * s.f[j] * (1.0 - s.f[j]);
    dpre[kCellGate][j] = dct * s.i[j] * (1.0 - s.g[j] * s.g[j]);
    out.dc_prev[j] = dct * s.f[j];
  }

  for (std::size_t g = 0; g < 4; ++g) {
    const auto& d = dpre[g];
    double* dw = p.w[g].grad.data();
    double* du = p.u[g].grad.data();
    const double* wv = p.w[g].value.data();
    const double* uv = p.u[g].value.data();
    for (std::size_t j = 0; j < hid; ++j) p.b[g].grad[j] += d[j];
    for (std::size_t k = 0; k < n_in; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < hid; ++j) {
        dw[k * hid + j] += s.x[k] * d[j];
        acc += wv[k * hid + j] * d[j];
      }
      out.dx[k] += acc;
    }
    for (std::size_t k = 0; k < hid; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < hid; ++j) {
        du[k * hid + j] += s.h_prev[k] * d[j];
        acc += uv[k * hid + j] * d[j];
      }
      out.dh_prev[k] += acc;
    }
  }
  return out;
}

Tensor lstm_sequence(const Tensor& x, const LstmParams& p, LstmSequenceCache* cache) {
  require(x.rank() == 3, "lstm_sequence: input must be [batch x C x L], got " + shape_string(x.shape()));
  const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  require(length >= 1, "lstm_sequence: empty sequence");
  require(channels == p.input_dim, "lstm_sequence: expected " + std::to_string(p.input_dim) +
                                       " channels, got " + std::to_string(channels));
  if (cache) {
    cache->batch = batch;
    cache->channels = channels;
    cache->length = length;
    cache->steps.assign(batch * length, {});
  }
  Tensor out({batch, p.hidden});
  std::vector<double> xt(channels);
  for (std::size_t b = 0; b < batch; ++b) {
    LstmState state = LstmState::zeros(p.hidden);
    for (std::size_t t = 0; t < length; ++t) {
      for (std::size_t c = 0; c < channels; ++c) xt[c] = x.at(b, c, t);
      state = lstm_cell(xt, state, p, cache ? &cache->steps[b * length + t] : nullptr);
    }
    std::copy(state.h.begin(), state.h.end(), out.data() + b * p.hidden);
  }
  return out;
}

Tensor lstm_sequence_backward(const Tensor& grad_h, LstmParams& p, const LstmSequenceCache& cache) {
  const std::size_t batch = cache.batch, channels = cache.channels, length = cache.length;
  require(grad_h.rank() == 2 && grad_h.dim(0) == batch && grad_h.dim(1) == p.hidden,
          "lstm_sequence_backward: gradient shape mismatch");
  Tensor grad_x({batch, channels, length});
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> dh(grad_h.data() + b * p.hidden, grad_h.data() + (b + 1) * p.hidden);
    std::vector<double> dc(p.hidden, 0.0);
    for (std::size_t t = length; t-- > 0;) {
      auto step = lstm_cell_backward(dh, dc, p, cache.steps[b * length + t]);
      for (std::size_t c = 0; c < channels; ++c) grad_x.at(b, c, t) = step.dx[c];
      dh = std::move(step.dh_prev);
      dc = std::move(step.dc_prev);
    }
  }
  return grad_x;
}

HeadParams::HeadParams(std::size_t hidden, std::size_t outputs)
    : w_out("head.w_out", Tensor({hidden, outputs})), b_out("head.b_out", Tensor({outputs})) {}

void HeadParams::init(Rng& rng) {
  glorot_uniform(w_out.value, w_out.value.dim(0), w_out.value.dim(1), rng);
  b_out.value.fill(0.0);
}

Tensor linear_head(const Tensor& h, const HeadParams& p) {
  const std::size_t hid = p.w_out.value.dim(0), outs = p.w_out.value.dim(1);
  require(h.rank() == 2 && h.dim(1) == hid, "linear_head: expected [batch x " + std::to_string(hid) +
                                                "], got " + shape_string(h.shape()));
  Tensor y({h.dim(0), outs});
  for (std::size_t b = 0; b < h.dim(0); ++b)
    for (std::size_t o = 0; o < outs; ++o) {
      double s = p.b_out.value[o];
      for (std::size_t k = 0; k < hid; ++k) s += h.at(b, k) * p.w_out.value.at(k, o);
      y.at(b, o) = s;
    }
  return y;
}

Tensor linear_head_backward(const Tensor& grad_y, const Tensor& h, HeadParams& p) {
  const std::size_t hid = p.w_out.value.dim(0), outs = p.w_out.value.dim(1);
  Tensor grad_h(h.shape());
  for (std::size_t b = 0; b < h.dim(0); ++b)
    for (std::size_t o = 0; o < outs; ++o) {
      const double g = grad_y.at(b, o);
      p.b_out.grad[o] += g;
      for (std::size_t k = 0; k < hid; ++k) {
        p.w_out.grad.at(k, o) += h.at(b, k) * g;
        grad_h.at(b, k) += p.w_out.value.at(k, o) * g;
      }
    }
  return grad_h;
}

}  // namespace wtlstm
