#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "addn/tensor.hpp"

namespace addn {

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.1;
};

/// Moment estimates, one buffer per parameter in call order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update with decoupled weight decay:
///   p <- p - lr*wd*p, then p <- p - lr * m_hat / (sqrt(v_hat) + eps).
/// Parameters are updated in place through their shared storage.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               const AdamConfig& config);

}  // namespace addn
