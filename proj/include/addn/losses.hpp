#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "addn/audio.hpp"
#include "addn/ddl.hpp"
#include "addn/rng.hpp"
#include "addn/tensor.hpp"

namespace addn {

/// Output heads on the pooled backbone features: phi feeds the bias-denoise
/// loss through its own layer norm, cls feeds cross-entropy and prediction.
struct HeadParams {
  LayerNormParams norm;
  Tensor phi_w;  // [D x C]
  Tensor phi_b;  // [C]
  Tensor cls_w;  // [D x C]
  Tensor cls_b;  // [C]

  template <typename F>
  void for_each(F&& fn) {
    fn("head.norm.gamma", norm.gamma);
    fn("head.norm.beta", norm.beta);
    fn("head.phi_w", phi_w);
    fn("head.phi_b", phi_b);
    fn("head.cls_w", cls_w);
    fn("head.cls_b", cls_b);
  }
};

HeadParams init_heads(std::size_t d_model, Rng& rng, std::size_t classes = kNumClasses);

struct LossConfig {
  double beta = 0.5;     // weight of the bias-denoise term
  double epsilon = 0.2;  // label smoothing of the bias-denoise target
  bool pool_first = true;
};

/// t_i = y_i (1 - epsilon) + epsilon / C
std::vector<double> smoothed_target(std::size_t label, double epsilon, std::size_t classes = kNumClasses);

/// Unsmoothed softmax cross-entropy.
Tensor ce_loss(const Tensor& logits, std::size_t label);

/// Smoothed cross-entropy of phi(Norm(p)). With pool_first the tokens are
/// mean-pooled before Norm and phi; otherwise Norm and phi run per token and
/// the logits are pooled.
Tensor bias_denoise_loss(const Tensor& p, std::size_t label, const HeadParams& head, double epsilon,
                         bool pool_first = true);

/// cls_head(mean_pool(p))
Tensor classifier_logits(const Tensor& p, const HeadParams& head);

/// beta * bias_denoise + (1 - beta) * ce
Tensor total_loss(const Tensor& p, const Tensor& cls_logits, std::size_t label, const LossConfig& config,
                  const HeadParams& head);

/// Index of the largest logit; ties go to the lowest index.
std::size_t argmax_class(std::span<const double> logits);
std::size_t predict(const Tensor& p, const HeadParams& head);

}  // namespace addn
