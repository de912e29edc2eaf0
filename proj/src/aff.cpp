#include "addn/aff.hpp"

#include <cmath>

#include "addn/error.hpp"
#include "addn/ops.hpp"

namespace addn {

AffParams init_aff(std::size_t hidden, double alpha, Rng& rng) {
  if (hidden == 0) throw ContractError("aff: hidden width must be at least 1");
  if (!(alpha >= 0.0)) throw ContractError("aff: alpha must be non-negative");
  AffParams p;
  std::vector<double> w1(2 * hidden), w2(hidden);
  const double s1 = 1.0 / std::sqrt(2.0);
  for (double& v : w1) v = rng.normal(0.0, s1);
  for (double& v : w2) v = rng.normal(0.0, 0.02);
  p.mask_w1 = Tensor::from_data({2, hidden}, std::move(w1));
  p.mask_b1 = Tensor::zeros({hidden});
  p.mask_w2 = Tensor::from_data({hidden, 1}, std::move(w2));
  p.mask_b2 = Tensor::full({1}, 1.0);
  p.alpha = alpha;
  return p;
}

Tensor mask_net(const ComplexTensor& spectrum, const AffParams& params) {
  const Shape shape = spectrum.shape();
  if (shape.size() != 2) throw DimensionError("mask_net: expected a 2D spectrum, got " + shape_str(shape));
  const std::size_t bins = shape[0] * shape[1];
  const double norm = 1.0 / std::sqrt(static_cast<double>(bins));
  Tensor re = reshape(scale(spectrum.re, norm), {bins, 1});
  Tensor im = reshape(scale(spectrum.im, norm), {bins, 1});
  auto mlp = [&](const Tensor& features) {
    Tensor h = relu(linear(features, params.mask_w1, params.mask_b1));
    return linear(h, params.mask_w2, params.mask_b2);
  };
  Tensor direct = mlp(concat_cols({re, im}));
  Tensor mirrored = mlp(concat_cols({re, scale(im, -1.0)}));
  return reshape(scale(add(direct, mirrored), 0.5), shape);
}

Tensor aff_forward(const Tensor& x, const AffParams& params, bool residual) {
  const ComplexTensor spectrum = fft2(x);
  const Tensor mask = soft_shrink(mask_net(spectrum, params), params.alpha);
  Tensor filtered = ifft2({mul(mask, spectrum.re), mul(mask, spectrum.im)});
  return residual ? add(x, filtered) : filtered;
}

}  // namespace addn
