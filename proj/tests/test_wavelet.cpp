#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "wtlstm/error.hpp"
#include "wtlstm/grad_check.hpp"
#include "wtlstm/wavelet.hpp"
#include "wtlstm/wtconv.hpp"

using namespace wtlstm;
using wtlstm::testing::random_tensor;
using wtlstm::testing::randomize;

namespace {

double energy(const Tensor& t) {
  double e = 0;
  for (double v : t.values()) e += v * v;
  return e;
}

double coeff_energy(const WaveletCoeffs& c) {
  double e = energy(c.approx);
  for (const auto& d : c.details) e += energy(d);
  return e;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(FilterBank, BuiltinsAreOrthonormal) {
  for (const auto& name : builtin_bank_names()) {
    const auto& b = builtin_bank(name);
    EXPECT_TRUE(b.orthonormal(1e-14)) << name;
    EXPECT_NO_THROW(b.validate());
    double s = 0;
    for (double v : b.dec_lo) s += v;
    EXPECT_NEAR(s, std::sqrt(2.0), 1e-12) << name;
  }
  EXPECT_THROW(builtin_bank("sym9"), ContractError);
}

TEST(FilterBank, HaarTaps) {
  const auto& h = builtin_bank("haar");
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(h.dec_hi[0], r);
  EXPECT_DOUBLE_EQ(h.dec_hi[1], -r);
}

TEST(FilterBank, ParsesTableAndRejectsBrokenBanks) {
  std::istringstream good(
      "# two taps\nbank myhaar\n"
      "dec_lo 0.7071067811865476 0.7071067811865476\n"
      "dec_hi 0.7071067811865476 -0.7071067811865476\n"
      "rec_lo 0.7071067811865476 0.7071067811865476\n"
      "rec_hi 0.7071067811865476 -0.7071067811865476\n");
  BankRegistry reg;
  reg.load(good, "mem");
  ASSERT_TRUE(reg.contains("myhaar"));
  EXPECT_TRUE(reg.contains("db4"));

  std::istringstream broken("bank bad\ndec_lo 1 1\ndec_hi 1 -1\nrec_lo 1 1\nrec_hi 1 -1\n");
  EXPECT_THROW(parse_filter_banks(broken, "mem"), ContractError);
  std::istringstream junk("bank j\ndec_lo 1 x\n");
  try {
    parse_filter_banks(junk, "banks.txt");
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("banks.txt:2"), std::string::npos);
  }
}

TEST(Dwt, HaarHandExample) {
  const auto& h = builtin_bank("haar");
  auto c = dwt_forward(Tensor({1, 4}, std::vector<double>{1, 2, 3, 4}), h, 1);
  EXPECT_NEAR(c.approx[0], 3 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(c.approx[1], 7 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(c.approx[0], 2.1213, 1e-4);
  EXPECT_NEAR(c.approx[1], 4.9497, 1e-4);
  EXPECT_NEAR(c.details[0][0], -0.7071, 1e-4);
  EXPECT_NEAR(c.details[0][1], -0.7071, 1e-4);
}

TEST(Dwt, ConstantSignalHasNoDetail) {
  for (const auto& name : builtin_bank_names()) {
    const auto& b = builtin_bank(name);
    auto c = dwt_forward(Tensor({1, 16}, 5.0), b, 1);
    for (double d : c.details[0].values()) EXPECT_NEAR(d, 0.0, 1e-12) << name;
  }
}

TEST(Dwt, BandLengths) {
  const auto& h = builtin_bank("haar");
  auto c = dwt_forward(Tensor({2, 13}), h, 3);
  EXPECT_EQ(c.level_lengths, (std::vector<std::size_t>{13, 7, 4}));
  EXPECT_EQ(c.details[0].dim(1), 6u);
  EXPECT_EQ(c.details[1].dim(1), 3u);
  EXPECT_EQ(c.details[2].dim(1), 2u);
  EXPECT_EQ(c.approx.dim(1), 2u);
  EXPECT_EQ(max_levels(16, builtin_bank("db4")), 2u);
  EXPECT_EQ(max_levels(7, builtin_bank("db4")), 0u);
  EXPECT_THROW(dwt_forward(Tensor({1, 16}), builtin_bank("db4"), 3), ContractError);
  EXPECT_THROW(dwt_forward(Tensor({1, 4}), builtin_bank("db4"), 1), ContractError);
}

TEST(Dwt, RoundTripParsevalAndLinearity) {
  Rng rng(99);
  for (const auto& name : builtin_bank_names()) {
    const auto& b = builtin_bank(name);
    for (std::size_t len : {8u, 9u, 31u, 64u, 101u}) {
      const std::size_t levels = std::min<std::size_t>(3, max_levels(len, b));
      if (levels == 0) continue;
      Tensor x = random_tensor({3, len}, rng);
      auto c = dwt_forward(x, b, levels);
      EXPECT_LT(max_abs_diff(dwt_inverse(c, b), x), 1e-10) << name << " " << len;
      EXPECT_NEAR(coeff_energy(c), energy(x), 1e-10 * energy(x)) << name << " " << len;

      WaveletCoeffs scaled = c;
      for (std::size_t band = 0; band < scaled.band_count(); ++band)
        for (auto& v : scaled.band(band).values()) v *= -2.5;
      Tensor y = dwt_inverse(scaled, b);
      for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], -2.5 * x[i], 1e-10);
    }
  }
}

TEST(Dwt, ZeroCoefficientsGiveZeroSignal) {
  const auto& b = builtin_bank("db2");
  auto c = dwt_forward(Tensor({1, 32}, 1.0), b, 2);
  for (std::size_t band = 0; band < c.band_count(); ++band) c.band(band).fill(0.0);
  const Tensor rec = dwt_inverse(c, b);
  for (double v : rec.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(dwt_inverse(c, builtin_bank("haar")), ContractError);
}

TEST(Dwt, AdjointsSatisfyInnerProductIdentity) {
  Rng rng(4);
  for (const auto& name : builtin_bank_names()) {
    const auto& b = builtin_bank(name);
    Tensor x = random_tensor({2, 37}, rng);
    auto cx = dwt_forward(x, b, 2);
    WaveletCoeffs g = cx;
    for (std::size_t band = 0; band < g.band_count(); ++band)
      for (auto& v : g.band(band).values()) v = rng.uniform(-1, 1);
    // <W x, g> == <x, W^T g>
    double lhs = 0, rhs = 0;
    for (std::size_t band = 0; band < g.band_count(); ++band)
      for (std::size_t i = 0; i < g.band(band).size(); ++i) lhs += cx.band(band)[i] * g.band(band)[i];
    Tensor wt = dwt_forward_adjoint(g, b);
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * wt[i];
    EXPECT_NEAR(lhs, rhs, 1e-10) << name;
  }
}

namespace {

// Independent three-step composition: transform, per-band same-padded
// correlation and scaling, inverse transform.
Tensor naive_wtconv(const Tensor& x, const WTConvParams& p) {
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2), k = p.kernel_size;
  Tensor out(x.shape());
  for (std::size_t s = 0; s < batch; ++s) {
    Tensor sig({ch, len});
    for (std::size_t c = 0; c < ch; ++c)
      for (std::size_t i = 0; i < len; ++i) sig.at(c, i) = x.at(s, c, i);
    WaveletCoeffs coeffs = dwt_forward(sig, p.bank, p.levels);
    for (std::size_t b = 0; b < coeffs.band_count(); ++b) {
      Tensor& band = coeffs.band(b);
      Tensor res(band.shape());
      const std::size_t n = band.dim(1);
      for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0;
          for (std::size_t t = 0; t < k; ++t) {
            const long j = static_cast<long>(i + t) - static_cast<long>(k / 2);
            if (j >= 0 && j < static_cast<long>(n)) acc += p.kernels.value.at(b, c, t) * band.at(c, j);
          }
          res.at(c, i) = p.gamma.value[b] * acc;
        }
      band = res;
    }
    Tensor rec = dwt_inverse(coeffs, p.bank);
    for (std::size_t c = 0; c < ch; ++c)
      for (std::size_t i = 0; i < len; ++i) out.at(s, c, i) = rec.at(c, i);
  }
  return out;
}

}  // namespace

TEST(WTConv, IdentityKernelsReproduceInput) {
  Rng rng(1);
  for (const auto& name : builtin_bank_names()) {
    WTConvParams p(builtin_bank(name), 2, 5);
    Tensor x = random_tensor({2, 5, 32}, rng);
    EXPECT_LT(max_abs_diff(wtconv1d_forward(x, p), x), 1e-8) << name;
  }
}

TEST(WTConv, ZeroGammaGivesZero) {
  Rng rng(2);
  WTConvParams p(builtin_bank("haar"), 1, 3);
  randomize(p.kernels, rng, 1.0);
  p.gamma.value.fill(0.0);
  const Tensor y = wtconv1d_forward(random_tensor({1, 3, 16}, rng), p);
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(WTConv, MatchesNaiveComposition) {
  Rng rng(3);
  for (const auto& name : builtin_bank_names()) {
    WTConvParams p(builtin_bank(name), 2, 4);
    randomize(p.kernels, rng, 1.0);
    randomize(p.gamma, rng, 2.0);
    Tensor x = random_tensor({3, 4, 35}, rng);
    EXPECT_LT(max_abs_diff(wtconv1d_forward(x, p), naive_wtconv(x, p)), 1e-10) << name;
  }
}

TEST(WTConv, DepthwiseRowZeroPads) {
  std::vector<double> x{1, 2, 3}, w{1, 10, 100}, y(3);
  depthwise_conv_row(x, w, y);
  // y[i] = x[i-1] + 10 x[i] + 100 x[i+1]
  EXPECT_EQ(y, (std::vector<double>{210, 321, 32}));
}

TEST(WTConv, GradientCheck) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    for (const auto& name : builtin_bank_names()) {
      Rng rng(seed);
      WTConvParams p(builtin_bank(name), name == "db4" ? 1 : 2, 3);
      randomize(p.kernels, rng, 1.0);
      randomize(p.gamma, rng, 1.5);
      Tensor x = random_tensor({2, 3, 16}, rng);
      Tensor probe = random_tensor({2, 3, 16}, rng);
      auto objective = [&] {
        Tensor y = wtconv1d_forward(x, p);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += probe[i] * y[i];
        return s;
      };
      WTConvCache cache;
      wtconv1d_forward(x, p, &cache);
      p.kernels.zero_grad();
      p.gamma.zero_grad();
      Tensor gx = wtconv1d_backward(probe, p, cache);
      auto res = finite_diff_check(objective, {{"x", x.values(), gx.values()},
                                               {"kernels", p.kernels.value.values(), p.kernels.grad.values()},
                                               {"gamma", p.gamma.value.values(), p.gamma.grad.values()}});
      EXPECT_LT(res.max_rel_error, 1e-4) << name << " seed " << seed << " worst " << res.worst_probe;
    }
  }
}
