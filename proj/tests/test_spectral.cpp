#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "test_util.hpp"
#include "wtlstm/attention.hpp"
#include "wtlstm/dct.hpp"
#include "wtlstm/error.hpp"
#include "wtlstm/grad_check.hpp"

using namespace wtlstm;
using wtlstm::testing::random_tensor;
using wtlstm::testing::randomize;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST(Fft, MatchesDirectDft) {
  Rng rng(1);
  for (std::size_t n : {1u, 2u, 3u, 8u, 12u, 17u, 64u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto y = x;
    fft(y);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> s = 0;
      for (std::size_t t = 0; t < n; ++t)
        s += x[t] * std::polar(1.0, -2 * std::numbers::pi * double(k * t) / double(n));
      EXPECT_LT(std::abs(s - y[k]), 1e-10) << n;
    }
    fft(y, true);
    for (std::size_t t = 0; t < n; ++t) EXPECT_LT(std::abs(y[t] / double(n) - x[t]), 1e-12);
  }
}

TEST(Dct, HandExample) {
  auto X = dct_ii(std::vector<double>{1, 0});
  EXPECT_NEAR(X[0], 1.0, 1e-12);
  EXPECT_NEAR(X[1], std::cos(std::numbers::pi / 4), 1e-12);
  EXPECT_NEAR(X[1], 0.70710678, 1e-8);
}

TEST(Dct, ConstantSignal) {
  for (std::size_t n = 1; n <= 40; ++n) {
    auto X = dct_ii(std::vector<double>(n, 2.5));
    EXPECT_NEAR(X[0], 2.5 * n, 1e-12);
    for (std::size_t k = 1; k < n; ++k) EXPECT_NEAR(X[k], 0.0, 1e-12) << n;
  }
}

TEST(Dct, FastMatchesNaive) {
  Rng rng(2);
  for (std::size_t n : {5u, 64u, 100u}) {
    auto x = random_vec(n, rng);
    auto fast = dct_ii(x), slow = dct_ii_naive(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(fast[k], slow[k], 1e-10);
  }
  EXPECT_THROW(dct_ii(std::vector<double>{}), ContractError);
}

TEST(Dct, Linearity) {
  Rng rng(3);
  auto x = random_vec(33, rng), y = random_vec(33, rng);
  std::vector<double> z(33);
  for (std::size_t i = 0; i < 33; ++i) z[i] = 1.5 * x[i] - 0.25 * y[i];
  auto X = dct_ii(x), Y = dct_ii(y), Z = dct_ii(z);
  for (std::size_t k = 0; k < 33; ++k) EXPECT_NEAR(Z[k], 1.5 * X[k] - 0.25 * Y[k], 1e-10);
}

TEST(Dct, AdjointInnerProduct) {
  Rng rng(4);
  for (std::size_t n : {1u, 7u, 16u}) {
    auto x = random_vec(n, rng), g = random_vec(n, rng);
    auto X = dct_ii(x), At = dct_ii_adjoint(g);
    double lhs = 0, rhs = 0;
    for (std::size_t k = 0; k < n; ++k) {
      lhs += X[k] * g[k];
      rhs += x[k] * At[k];
    }
    EXPECT_NEAR(lhs, rhs, 1e-10) << n;
  }
}

TEST(LayerNorm, Examples) {
  std::vector<double> one{1}, zero{0};
  Tensor row({1, 1, 3}, std::vector<double>{1, 2, 3});
  Tensor y = layer_norm(row, one, zero);
  EXPECT_NEAR(y[0], -1.22474, 1e-5);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
  EXPECT_NEAR(y[2], 1.22474, 1e-5);
  Tensor flat = layer_norm(Tensor({1, 1, 3}, 1.0), one, zero);
  for (double v : flat.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(LayerNorm, NormalisesEveryGroup) {
  Rng rng(5);
  Tensor x = random_tensor({2, 3, 20}, rng, 4.0);
  std::vector<double> gain(3, 1.0), bias(3, 0.0);
  for (NormAxis axis : {NormAxis::Length, NormAxis::Channels}) {
    Tensor y = layer_norm(x, gain, bias, axis);
    if (axis == NormAxis::Length) {
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < 3; ++c) {
          double m = 0, v = 0;
          for (std::size_t l = 0; l < 20; ++l) m += y.at(b, c, l) / 20;
          for (std::size_t l = 0; l < 20; ++l) v += (y.at(b, c, l) - m) * (y.at(b, c, l) - m) / 20;
          EXPECT_NEAR(m, 0.0, 1e-12);
          EXPECT_NEAR(v, 1.0, 1e-4);
        }
    } else {
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t l = 0; l < 20; ++l) {
          double m = 0;
          for (std::size_t c = 0; c < 3; ++c) m += y.at(b, c, l) / 3;
          EXPECT_NEAR(m, 0.0, 1e-12);
        }
    }
  }
}

TEST(LayerNorm, GradientCheck) {
  for (NormAxis axis : {NormAxis::Length, NormAxis::Channels}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      Rng rng(seed);
      Tensor x = random_tensor({2, 3, 6}, rng, 2.0), probe = random_tensor({2, 3, 6}, rng);
      std::vector<double> gain = random_vec(3, rng), bias = random_vec(3, rng);
      std::vector<double> gg(3, 0.0), gb(3, 0.0);
      auto objective = [&] {
        Tensor y = layer_norm(x, gain, bias, axis);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += probe[i] * y[i];
        return s;
      };
      LayerNormCache cache;
      layer_norm(x, gain, bias, axis, &cache);
      Tensor gx = layer_norm_backward(probe, gain, gg, gb, cache);
      auto res = finite_diff_check(objective, {{"x", x.values(), gx.values()}, {"gain", gain, gg}, {"bias", bias, gb}});
      EXPECT_LT(res.max_rel_error, 1e-4) << "seed " << seed << " worst " << res.worst_probe;
    }
  }
}

TEST(ChannelAttention, ZeroParamsHalveInput) {
  AttentionParams p(5);
  p.ln_gain.value.fill(0.0);
  Rng rng(6);
  Tensor x = random_tensor({2, 5, 16}, rng);
  auto out = channel_attention(x, p);
  ASSERT_EQ(out.y.shape(), (Shape{2, 5, 16}));
  ASSERT_EQ(out.weights.shape(), (Shape{2, 5}));
  for (double w : out.weights.values()) EXPECT_EQ(w, 0.5);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(out.y[i], 0.5 * x[i]);
}

TEST(ChannelAttention, TinyHandCase) {
  // C = 2, L = 2, one sample: x = [[1, 3], [2, -2]].
  AttentionParams p(2);
  p.w1.value = Tensor({2, 4}, std::vector<double>{0.5, -1.0, 0.2, 0.0, 1.0, 0.3, -0.4, 0.7});
  p.b1.value = Tensor({4}, std::vector<double>{0.1, 0.0, -0.2, 0.05});
  p.w2.value = Tensor({4, 2}, std::vector<double>{1.0, -0.5, 0.25, 0.8, -0.6, 0.4, 0.9, 0.1});
  p.b2.value = Tensor({2}, std::vector<double>{0.0, 0.3});
  p.ln_gain.value = Tensor({2}, std::vector<double>{1.5, 0.5});
  p.ln_bias.value = Tensor({2}, std::vector<double>{0.1, -0.2});
  Tensor x({1, 2, 2}, std::vector<double>{1, 3, 2, -2});

  // DCT rows: [x0 + x1, (x0 - x1) cos(pi/4)].
  const double c45 = std::cos(std::numbers::pi / 4);
  const double F[2][2] = {{4.0, -2.0 * c45}, {0.0, 4.0 * c45}};
  // Normalise across the two channels at each frequency: values become +-1
  // scaled by |d| / sqrt(d^2 + eps).
  double pooled[2] = {0, 0};
  const double gain[2] = {1.5, 0.5}, bias[2] = {0.1, -0.2};
  for (int l = 0; l < 2; ++l) {
    const double mean = (F[0][l] + F[1][l]) / 2;
    const double var = ((F[0][l] - mean) * (F[0][l] - mean) + (F[1][l] - mean) * (F[1][l] - mean)) / 2;
    for (int c = 0; c < 2; ++c)
      pooled[c] += (gain[c] * (F[c][l] - mean) / std::sqrt(var + 1e-5) + bias[c]) / 2;
  }
  double hidden[4];
  for (int j = 0; j < 4; ++j) {
    double z = p.b1.value[j];
    for (int c = 0; c < 2; ++c) z += pooled[c] * p.w1.value.at(c, j);
    hidden[j] = std::max(0.0, z);
  }
  double w[2];
  for (int c = 0; c < 2; ++c) {
    double z = p.b2.value[c];
    for (int j = 0; j < 4; ++j) z += hidden[j] * p.w2.value.at(j, c);
    w[c] = sig(z);
  }
  auto out = channel_attention(x, p);
  EXPECT_NEAR(out.weights[0], w[0], 1e-10);
  EXPECT_NEAR(out.weights[1], w[1], 1e-10);
  EXPECT_NEAR(out.y.at(0, 1, 1), -2 * w[1], 1e-10);
}

TEST(ChannelAttention, WeightsDependOnInput) {
  Rng rng(8);
  AttentionParams p(5);
  p.init(rng);
  auto a = channel_attention(random_tensor({1, 5, 16}, rng), p);
  auto b = channel_attention(random_tensor({1, 5, 16}, rng), p);
  double diff = 0;
  for (std::size_t i = 0; i < 5; ++i) diff += std::abs(a.weights[i] - b.weights[i]);
  EXPECT_GT(diff, 1e-6);
  for (double v : a.weights.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(ChannelAttention, GradientCheck) {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    Rng rng(seed);
    AttentionParams p(5);
    p.init(rng);
    randomize(p.b1, rng, 0.5);
    randomize(p.b2, rng, 0.5);
    randomize(p.ln_gain, rng, 1.0);
    randomize(p.ln_bias, rng, 0.5);
    Tensor x = random_tensor({2, 5, 16}, rng), probe = random_tensor({2, 5, 16}, rng);
    auto objective = [&] {
      Tensor y = channel_attention(x, p).y;
      double s = 0;
      for (std::size_t i = 0; i < y.size(); ++i) s += probe[i] * y[i];
      return s;
    };
    AttentionCache cache;
    channel_attention(x, p, &cache);
    for (Parameter* q : {&p.w1, &p.b1, &p.w2, &p.b2, &p.ln_gain, &p.ln_bias}) q->zero_grad();
    Tensor gx = channel_attention_backward(probe, p, cache);
    std::vector<GradProbe> probes{{"x", x.values(), gx.values()}};
    for (Parameter* q : {&p.w1, &p.b1, &p.w2, &p.b2, &p.ln_gain, &p.ln_bias})
      probes.push_back({q->name, q->value.values(), q->grad.values()});
    auto res = finite_diff_check(objective, probes);
    EXPECT_LT(res.max_rel_error, 1e-4) << "seed " << seed << " worst " << res.worst_probe << "["
                                       << res.worst_index << "] " << res.analytic << " vs " << res.numeric;
  }
}
