#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "addn/tensor.hpp"

// Differentiable operations. Every function builds one graph node whose
// backward rule accumulates into the inputs that require gradients.
namespace addn {

// Linear algebra
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T without materializing the transpose in the graph.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
/// x * w + b, with b broadcast over rows. b may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// Elementwise
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);
/// s * x for a one-element tensor s.
Tensor mul_scalar(const Tensor& x, const Tensor& s);
/// x[..., D] + b[D]
Tensor add_bias(const Tensor& x, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
/// z * sigmoid(z)
Tensor swish(const Tensor& x);
/// sign(x) * max(|x| - alpha, 0); subgradient 0 on the closed dead zone.
Tensor soft_shrink(const Tensor& x, double alpha);

// Reductions and normalization
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);
Tensor sum(const Tensor& x);
/// [N x D] -> [1 x D]
Tensor mean_rows(const Tensor& x);
/// -sum_i target_i * log softmax(logits)_i over a flat logit vector.
Tensor soft_cross_entropy(const Tensor& logits, std::span<const double> target);

// Shape manipulation
Tensor reshape(const Tensor& x, Shape shape);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_cols(const std::vector<Tensor>& parts);
/// One-element tensor holding x[index].
Tensor element(const Tensor& x, std::size_t index);
/// Zero-pads a [T x F] matrix to whole patches and returns one flattened
/// patch per row, patches ordered row-major over the patch grid.
Tensor patchify(const Tensor& x, std::size_t patch_rows, std::size_t patch_cols);

// Composite
/// (swish(x w1) * (x w2)) w3
Tensor swish_glu(const Tensor& x, const Tensor& w1, const Tensor& w2, const Tensor& w3);

// Spectral
/// Unnormalized 2D DFT of a real [T x F] matrix.
ComplexTensor fft2(const Tensor& x);
/// Inverse 2D DFT with 1/(T*F) scaling, returning the real part. With
/// require_real, throws NumericError when the imaginary residue exceeds 1e-9
/// relative to the output scale; otherwise the residue is discarded and the
/// gradient is that of the real part.
Tensor ifft2(const ComplexTensor& spectrum, bool require_real = true);

}  // namespace addn
