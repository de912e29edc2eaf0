#include "addn/model.hpp"

#include <cmath>

#include "addn/error.hpp"
#include "addn/ops.hpp"

namespace addn {

ModelParams ModelParams::bind(bool requires_grad) const {
  ModelParams out = *this;
  out.for_each([&](const std::string&, Tensor& t) { t = t.bind(requires_grad); });
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams out = *this;
  out.for_each([&](const std::string&, Tensor& t) { t = t.clone(); });
  return out;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for_each([&](const std::string& name, const Tensor& t) { out.emplace_back(name, t); });
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Tensor& t) { n += t.numel(); });
  return n;
}

ModelParams init_model(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "init");
  ModelParams p;
  p.input_mean = Tensor::zeros({1});
  p.input_std = Tensor::full({1}, 1.0);
  p.aff = init_aff(config.mask_hidden, config.alpha, rng);
  p.backbone = init_backbone(config.backbone, rng);
  p.head = init_heads(config.backbone.d_model, rng);
  if (!config.differential) {
    for (auto& b : p.backbone.blocks) b.mhda.lambda = Tensor::zeros(b.mhda.lambda.shape());
  }
  return p;
}

bool is_trainable(const std::string& name, const ModelConfig& config) {
  if (name.starts_with("input.")) return false;
  if (!config.use_aff && name.starts_with("aff.")) return false;
  if (!config.differential && name.ends_with(".lambda")) return false;
  return true;
}

void set_input_statistics(ModelParams& params, std::span<const Tensor> spectrograms) {
  if (spectrograms.empty()) throw ContractError("input statistics need at least one spectrogram");
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const Tensor& s : spectrograms) {
    for (double v : s.data()) {
      sum += v;
      sq += v * v;
    }
    n += s.numel();
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
  params.input_mean.mutable_data()[0] = mean;
  params.input_std.mutable_data()[0] = var > 1e-12 ? std::sqrt(var) : 1.0;
}

ModelOutput model_forward(const Tensor& spec, const ModelParams& params, const ModelConfig& config) {
  const auto& shape = config.backbone;
  if (spec.dim() != 2 || spec.rows() != shape.frames || spec.cols() != shape.bands) {
    throw DimensionError("model input must be " + std::to_string(shape.frames) + "x" + std::to_string(shape.bands) +
                         ", got " + shape_str(spec.shape()));
  }
  const double mean = params.input_mean.item();
  const double stdev = params.input_std.item();
  Tensor x = scale(add_scalar(spec, -mean), 1.0 / stdev);
  if (config.use_aff) x = aff_forward(x, params.aff, config.aff_residual);
  Tensor p = backbone_forward(x, params.backbone, config.differential);
  Tensor logits = classifier_logits(p, params.head);
  return {p, logits};
}

}  // namespace addn
