#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "addn/aff.hpp"
#include "addn/ddl.hpp"
#include "addn/losses.hpp"

namespace addn {

struct ModelConfig {
  BackboneShape backbone;
  std::size_t mask_hidden = 32;
  double alpha = 0.02;
  bool use_aff = true;       // false bypasses the filter (raw spectrogram)
  bool aff_residual = false;
  bool differential = true;  // false runs standard attention with lambda frozen at 0
};

/// Every learnable tensor of the network plus the fixed input statistics.
struct ModelParams {
  Tensor input_mean;  // [1], fixed after initialization
  Tensor input_std;   // [1], fixed after initialization
  AffParams aff;
  BackboneParams backbone;
  HeadParams head;

  template <typename F>
  void for_each(F&& fn) {
    fn("input.mean", input_mean);
    fn("input.std", input_std);
    aff.for_each(fn);
    backbone.for_each(fn);
    head.for_each(fn);
  }

  template <typename F>
  void for_each(F&& fn) const {
    const_cast<ModelParams*>(this)->for_each([&](const std::string& name, Tensor& t) { fn(name, std::as_const(t)); });
  }

  /// Leaves sharing this model's storage; each binding has its own gradients.
  ModelParams bind(bool requires_grad) const;
  ModelParams clone() const;
  std::vector<std::pair<std::string, Tensor>> named() const;
  std::size_t parameter_count() const;
};

ModelParams init_model(const ModelConfig& config, std::uint64_t seed);

/// True for tensors the optimizer updates under this configuration.
bool is_trainable(const std::string& name, const ModelConfig& config);

/// Per-spectrogram standardization statistics over a training set: global
/// mean and standard deviation of all log-mel values.
void set_input_statistics(ModelParams& params, std::span<const Tensor> spectrograms);

struct ModelOutput {
  Tensor features;    // p, [N x D]
  Tensor cls_logits;  // [1 x C]
};

ModelOutput model_forward(const Tensor& spec, const ModelParams& params, const ModelConfig& config);

}  // namespace addn
