#include "wtlstm/wtconv.hpp"

#include "wtlstm/error.hpp"

namespace wtlstm {

namespace {

std::span<const double> kernel(const WTConvParams& p, std::size_t band, std::size_t c) {
  return {p.kernels.value.data() + (band * p.channels + c) * p.kernel_size, p.kernel_size};
}

std::span<double> kernel_grad(WTConvParams& p, std::size_t band, std::size_t c) {
  return {p.kernels.grad.data() + (band * p.channels + c) * p.kernel_size, p.kernel_size};
}

Tensor sample(const Tensor& x, std::size_t b) {
  const std::size_t c = x.dim(1), l = x.dim(2);
  const double* begin = x.data() + b * c * l;
  return Tensor({c, l}, std::vector<double>(begin, begin + c * l));
}

void check_input(const Tensor& x, const WTConvParams& p) {
  require(x.rank() == 3, "wtconv1d: input must be [batch x channels x length], got " +
                             shape_string(x.shape()));
  require(x.dim(1) == p.channels, "wtconv1d: expected " + std::to_string(p.channels) +
                                      " channels, got " + std::to_string(x.dim(1)));
}

}  // namespace

WTConvParams::WTConvParams(FilterBank b, std::size_t lv, std::size_t ch, std::size_t k)
    : bank(std::move(b)), levels(lv), channels(ch), kernel_size(k) {
  require(levels >= 1, "wtconv1d: levels must be >= 1");
  require(channels >= 1, "wtconv1d: channels must be >= 1");
  require(k % 2 == 1, "wtconv1d: kernel size must be odd for same padding");
  kernels = Parameter("wtconv.kernels", Tensor({levels + 1, channels, k}));
  gamma = Parameter("wtconv.gamma", Tensor({levels + 1}, 1.0));
  set_identity(*this);
}

void set_identity(WTConvParams& params) {
  params.kernels.value.fill(0.0);
  for (std::size_t band = 0; band < params.bands(); ++band)
    for (std::size_t c = 0; c < params.channels; ++c)
      params.kernels.value.at(band, c, params.kernel_size / 2) = 1.0;
  params.gamma.value.fill(1.0);
}

void depthwise_conv_row(std::span<const double> x, std::span<const double> w, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto pad = static_cast<std::ptrdiff_t>(w.size() / 2);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      const std::ptrdiff_t j = i + static_cast<std::ptrdiff_t>(t) - pad;
      if (j >= 0 && j < n) s += w[t] * x[j];
    }
    y[i] = s;
  }
}

Tensor wtconv1d_forward(const Tensor& x, const WTConvParams& params, WTConvCache* cache) {
  check_input(x, params);
  const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  Tensor out(x.shape());
  if (cache) {
    cache->inputs.clear();
    cache->conv_out.clear();
  }
  for (std::size_t b = 0; b < batch; ++b) {
    WaveletCoeffs coeffs = dwt_forward(sample(x, b), params.bank, params.levels);
    WaveletCoeffs conv = coeffs;
    WaveletCoeffs scaled = coeffs;
    for (std::size_t band = 0; band < coeffs.band_count(); ++band) {
      const Tensor& in = coeffs.band(band);
      Tensor& cv = conv.band(band);
      Tensor& sc = scaled.band(band);
      const std::size_t n = in.dim(1);
      const double g = params.gamma.value[band];
      for (std::size_t c = 0; c < channels; ++c) {
        depthwise_conv_row({in.data() + c * n, n}, kernel(params, band, c), {cv.data() + c * n, n});
        for (std::size_t i = 0; i < n; ++i) sc.at(c, i) = g * cv.at(c, i);
      }
    }
    Tensor rec = dwt_inverse(scaled, params.bank);
    std::copy(rec.data(), rec.data() + channels * length, out.data() + b * channels * length);
    if (cache) {
      cache->inputs.push_back(std::move(coeffs));
      cache->conv_out.push_back(std::move(conv));
    }
  }
  return out;
}

Tensor wtconv1d_backward(const Tensor& grad_out, WTConvParams& params, const WTConvCache& cache) {
  check_input(grad_out, params);
  const std::size_t batch = grad_out.dim(0), channels = grad_out.dim(1), length = grad_out.dim(2);
  require(cache.inputs.size() == batch, "wtconv1d_backward: cache does not match batch");
  const auto pad = static_cast<std::ptrdiff_t>(params.kernel_size / 2);

  Tensor grad_in(grad_out.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const WaveletCoeffs grad_scaled =
        dwt_inverse_adjoint(sample(grad_out, b), params.bank, params.levels);
    WaveletCoeffs grad_coeffs = grad_scaled;
    const WaveletCoeffs& inputs = cache.inputs[b];
    const WaveletCoeffs& conv = cache.conv_out[b];

    for (std::size_t band = 0; band < inputs.band_count(); ++band) {
      const Tensor& gs = grad_scaled.band(band);
      const Tensor& in = inputs.band(band);
      const Tensor& cv = conv.band(band);
      Tensor& gc = grad_coeffs.band(band);
      const auto n = static_cast<std::ptrdiff_t>(in.dim(1));
      const double g = params.gamma.value[band];
      double dgamma = 0.0;
      for (std::size_t c = 0; c < channels; ++c) {
        auto w = kernel(params, band, c);
        auto dw = kernel_grad(params, band, c);
        for (std::ptrdiff_t i = 0; i < n; ++i) dgamma += gs.at(c, i) * cv.at(c, i);
        for (std::ptrdiff_t j = 0; j < n; ++j) gc.at(c, j) = 0.0;
        for (std::ptrdiff_t i = 0; i < n; ++i) {
          const double gy = g * gs.at(c, i);
          for (std::size_t t = 0; t < w.size(); ++t) {
            const std::ptrdiff_t j = i + static_cast<std::ptrdiff_t>(t) - pad;
            if (j < 0 || j >= n) continue;
            dw[t] += gy * in.at(c, j);
            gc.at(c, j) += gy * w[t];
          }
        }
      }
      params.gamma.grad[band] += dgamma;
    }
    Tensor gx = dwt_forward_adjoint(grad_coeffs, params.bank);
    std::copy(gx.data(), gx.data() + channels * length, grad_in.data() + b * channels * length);
  }
  return grad_in;
}

}  // namespace wtlstm
