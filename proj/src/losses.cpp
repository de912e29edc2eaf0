#include "addn/losses.hpp"

#include <cmath>

#include "addn/error.hpp"
#include "addn/ops.hpp"

namespace addn {

namespace {

void check_label(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw ContractError("invalid label " + std::to_string(label) + " for " + std::to_string(classes) + " classes");
  }
}

}  // namespace

HeadParams init_heads(std::size_t d_model, Rng& rng, std::size_t classes) {
  HeadParams h;
  h.norm = LayerNormParams::identity(d_model);
  const double s = 1.0 / std::sqrt(static_cast<double>(d_model));
  std::vector<double> phi(d_model * classes), cls(d_model * classes);
  for (double& v : phi) v = rng.normal(0.0, s);
  for (double& v : cls) v = rng.normal(0.0, s);
  h.phi_w = Tensor::from_data({d_model, classes}, std::move(phi));
  h.phi_b = Tensor::zeros({classes});
  h.cls_w = Tensor::from_data({d_model, classes}, std::move(cls));
  h.cls_b = Tensor::zeros({classes});
  return h;
}

std::vector<double> smoothed_target(std::size_t label, double epsilon, std::size_t classes) {
  check_label(label, classes);
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ContractError("label smoothing must lie in [0, 1)");
  std::vector<double> t(classes, epsilon / static_cast<double>(classes));
  t[label] += 1.0 - epsilon;
  return t;
}

Tensor ce_loss(const Tensor& logits, std::size_t label) {
  check_label(label, logits.numel());
  std::vector<double> onehot(logits.numel(), 0.0);
  onehot[label] = 1.0;
  return soft_cross_entropy(logits, onehot);
}

Tensor bias_denoise_loss(const Tensor& p, std::size_t label, const HeadParams& head, double epsilon,
                         bool pool_first) {
  const std::size_t classes = head.phi_b.numel();
  const std::vector<double> target = smoothed_target(label, epsilon, classes);
  Tensor logits;
  if (pool_first) {
    logits = linear(layer_norm(mean_rows(p), head.norm.gamma, head.norm.beta), head.phi_w, head.phi_b);
  } else {
    logits = mean_rows(linear(layer_norm(p, head.norm.gamma, head.norm.beta), head.phi_w, head.phi_b));
  }
  return soft_cross_entropy(logits, target);
}

Tensor classifier_logits(const Tensor& p, const HeadParams& head) {
  return linear(mean_rows(p), head.cls_w, head.cls_b);
}

Tensor total_loss(const Tensor& p, const Tensor& cls_logits, std::size_t label, const LossConfig& config,
                  const HeadParams& head) {
  if (!(config.beta >= 0.0 && config.beta <= 1.0)) throw ContractError("beta must lie in [0, 1]");
  const Tensor ce = ce_loss(cls_logits, label);
  if (config.beta == 0.0) return ce;
  const Tensor bd = bias_denoise_loss(p, label, head, config.epsilon, config.pool_first);
  if (config.beta == 1.0) return bd;
  return add(scale(bd, config.beta), scale(ce, 1.0 - config.beta));
}

std::size_t argmax_class(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("argmax of empty logits");
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

std::size_t predict(const Tensor& p, const HeadParams& head) { return argmax_class(classifier_logits(p, head).data()); }

}  // namespace addn
