#pragma once

#include <array>
#include <span>
#include <vector>

#include "wtlstm/tensor.hpp"

namespace wtlstm {

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellGate = 3 };

/// Single-layer LSTM weights, row-vector convention:
///   pre_g = x W_g + h_{t-1} U_g + b_g
struct LstmParams {
  LstmParams() = default;
  LstmParams(std::size_t input_dim, std::size_t hidden);

  // Glorot matrices, zero biases except the forget gate (1.0).
  void init(Rng& rng);

  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::array<Parameter, 4> w;  // [input_dim x H], indexed by Gate
  std::array<Parameter, 4> u;  // [H x H]
  std::array<Parameter, 4> b;  // [H]
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zeros(std::size_t hidden) { return {std::vector<double>(hidden), std::vector<double>(hidden)}; }
};

struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, o, g;
  std::vector<double> tanh_c;
};

/// i = sig(.), f = sig(.), o = sig(.), g = tanh(.), c = f*c_prev + i*g, h = o*tanh(c).
LstmState lstm_cell(std::span<const double> x, const LstmState& prev, const LstmParams& params,
                    LstmStepCache* cache = nullptr);

struct LstmStepGrad {
  std::vector<double> dx, dh_prev, dc_prev;
};

LstmStepGrad lstm_cell_backward(std::span<const double> dh, std::span<const double> dc,
                                LstmParams& params, const LstmStepCache& cache);

struct LstmSequenceCache {
  std::size_t batch = 0, channels = 0, length = 0;
  std::vector<LstmStepCache> steps;  // [batch][time]
};

/// Runs the cell over X [batch x C x L] from a zero state, feeding the C
/// channel values at each position; returns the final hidden state [batch x H].
Tensor lstm_sequence(const Tensor& x, const LstmParams& params, LstmSequenceCache* cache = nullptr);

/// Backpropagation through time from dL/dH_T; returns dL/dX.
Tensor lstm_sequence_backward(const Tensor& grad_h, LstmParams& params, const LstmSequenceCache& cache);

/// Linear read-out Y = H W_out + b_out.
struct HeadParams {
  HeadParams() = default;
  HeadParams(std::size_t hidden, std::size_t outputs = 1);

  void init(Rng& rng);

  Parameter w_out;  // [H x outputs]
  Parameter b_out;  // [outputs]
};

Tensor linear_head(const Tensor& h, const HeadParams& params);
Tensor linear_head_backward(const Tensor& grad_y, const Tensor& h, HeadParams& params);

}  // namespace wtlstm
