#pragma once

#include <cstddef>

#include "addn/rng.hpp"
#include "addn/tensor.hpp"

namespace addn {

/// Adaptive frequency filter parameters: a pointwise 2 -> H -> 1 MLP that
/// scores each modulation-spectrum bin, and the fixed shrink threshold.
struct AffParams {
  Tensor mask_w1;  // [2 x H]
  Tensor mask_b1;  // [H]
  Tensor mask_w2;  // [H x 1]
  Tensor mask_b2;  // [1]
  double alpha = 0.02;

  std::size_t hidden() const { return mask_w1.cols(); }

  template <typename F>
  void for_each(F&& fn) {
    fn("aff.mask_w1", mask_w1);
    fn("aff.mask_b1", mask_b1);
    fn("aff.mask_w2", mask_w2);
    fn("aff.mask_b2", mask_b2);
  }
};

/// Random hidden layer; the output layer starts near zero with bias 1 so the
/// initial filter is close to identity.
AffParams init_aff(std::size_t hidden, double alpha, Rng& rng);

/// Per-bin mask from the (re, im) pair of each bin, scaled by 1/sqrt(T*F).
/// The MLP is averaged over (re, im) and (re, -im), which makes the mask
/// conjugate-symmetric for real input, so the filtered spectrum stays
/// Hermitian.
Tensor mask_net(const ComplexTensor& spectrum, const AffParams& params);

/// ifft2(soft_shrink(mask_net(fft2(x)), alpha) * fft2(x)), optionally added
/// back onto x.
Tensor aff_forward(const Tensor& x, const AffParams& params, bool residual = false);

}  // namespace addn
