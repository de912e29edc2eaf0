#include "addn/ddl.hpp"

#include <cmath>

#include "addn/error.hpp"
#include "addn/ops.hpp"

namespace addn {

namespace {

Tensor gaussian(Shape shape, double stddev, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.normal(0.0, stddev);
  return Tensor::from_data(std::move(shape), std::move(v));
}

double fan_in_std(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

LayerNormParams LayerNormParams::identity(std::size_t width) {
  return {Tensor::full({width}, 1.0), Tensor::zeros({width})};
}

std::size_t BackboneShape::tokens() const {
  return ((frames + patch - 1) / patch) * ((bands + patch - 1) / patch);
}

MhdaParams init_mhda(std::size_t d_model, std::size_t heads, bool shared_lambda, double lambda_init, Rng& rng) {
  if (heads == 0 || d_model % (2 * heads) != 0) {
    throw DimensionError("mhda: model width " + std::to_string(d_model) + " is not divisible by 2*heads (" +
                         std::to_string(2 * heads) + ")");
  }
  MhdaParams p;
  p.heads = heads;
  const double s = fan_in_std(d_model);
  p.wq = gaussian({d_model, d_model}, s, rng);
  p.wk = gaussian({d_model, d_model}, s, rng);
  p.wv = gaussian({d_model, d_model}, s, rng);
  p.wo = gaussian({d_model, d_model}, s, rng);
  p.lambda = Tensor::full({shared_lambda ? std::size_t{1} : heads}, lambda_init);
  return p;
}

DdlBlockParams init_ddl_block(const BackboneShape& shape, Rng& rng) {
  DdlBlockParams b;
  b.ln1 = LayerNormParams::identity(shape.d_model);
  b.mhda = init_mhda(shape.d_model, shape.heads, shape.shared_lambda, shape.lambda_init, rng);
  b.ln2 = LayerNormParams::identity(shape.d_model);
  const double s = fan_in_std(shape.d_model);
  b.ffn.w1 = gaussian({shape.d_model, shape.ffn_hidden}, s, rng);
  b.ffn.w2 = gaussian({shape.d_model, shape.ffn_hidden}, s, rng);
  b.ffn.w3 = gaussian({shape.ffn_hidden, shape.d_model}, fan_in_std(shape.ffn_hidden), rng);
  return b;
}

BackboneParams init_backbone(const BackboneShape& shape, Rng& rng) {
  if (shape.d_model == 0 || shape.patch == 0 || shape.ffn_hidden == 0) {
    throw ContractError("backbone: widths and patch size must be positive");
  }
  BackboneParams p;
  p.patch = shape.patch;
  const std::size_t patch_len = shape.patch * shape.patch;
  p.patch_w = gaussian({patch_len, shape.d_model}, fan_in_std(patch_len), rng);
  p.patch_b = Tensor::zeros({shape.d_model});
  p.pos_embed = gaussian({shape.tokens(), shape.d_model}, 0.02, rng);
  for (std::size_t i = 0; i < shape.layers; ++i) p.blocks.push_back(init_ddl_block(shape, rng));
  p.final_ln = LayerNormParams::identity(shape.d_model);
  return p;
}

Tensor patch_embed(const Tensor& spec, const BackboneParams& params) {
  Tensor patches = patchify(spec, params.patch, params.patch);
  if (patches.rows() != params.pos_embed.rows()) {
    throw DimensionError("patch_embed: spectrogram " + shape_str(spec.shape()) + " yields " +
                         std::to_string(patches.rows()) + " tokens but the positional table has " +
                         std::to_string(params.pos_embed.rows()));
  }
  return add(linear(patches, params.patch_w, params.patch_b), params.pos_embed);
}

Tensor mhda(const Tensor& x, const MhdaParams& params, bool differential) {
  const std::size_t heads = params.heads;
  if (heads == 0) throw DimensionError("mhda: head count must be positive");
  if (params.wq.shape() != params.wk.shape()) {
    throw DimensionError("mhda: query and key projections differ: " + shape_str(params.wq.shape()) + " vs " +
                         shape_str(params.wk.shape()));
  }
  const std::size_t qk_width = params.wq.cols();
  if (qk_width % (2 * heads) != 0) {
    throw DimensionError("mhda: query width " + std::to_string(qk_width) + " cannot split into " +
                         std::to_string(heads) + " heads of two halves");
  }
  if (params.wv.cols() % heads != 0 || params.wo.rows() != params.wv.cols()) {
    throw DimensionError("mhda: value/output widths " + shape_str(params.wv.shape()) + ", " +
                         shape_str(params.wo.shape()) + " inconsistent with " + std::to_string(heads) + " heads");
  }
  const std::size_t lambdas = params.lambda.numel();
  if (lambdas != 1 && lambdas != heads) {
    throw DimensionError("mhda: expected 1 or " + std::to_string(heads) + " lambda values, got " +
                         std::to_string(lambdas));
  }
  const std::size_t d = qk_width / (2 * heads);
  const std::size_t dv = params.wv.cols() / heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  const Tensor q = matmul(x, params.wq);
  const Tensor k = matmul(x, params.wk);
  const Tensor v = matmul(x, params.wv);
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t base = h * 2 * d;
    const Tensor q1 = slice_cols(q, base, base + d);
    const Tensor k1 = slice_cols(k, base, base + d);
    const Tensor vh = slice_cols(v, h * dv, (h + 1) * dv);
    Tensor attn = softmax(scale(matmul_nt(q1, k1), inv_sqrt_d), 1);
    if (differential) {
      const Tensor q2 = slice_cols(q, base + d, base + 2 * d);
      const Tensor k2 = slice_cols(k, base + d, base + 2 * d);
      const Tensor second = softmax(scale(matmul_nt(q2, k2), inv_sqrt_d), 1);
      const Tensor lam = lambdas == 1 ? params.lambda : element(params.lambda, h);
      attn = sub(attn, mul_scalar(second, lam));
    }
    outputs.push_back(matmul(attn, vh));
  }
  const Tensor merged = heads == 1 ? outputs.front() : concat_cols(outputs);
  return matmul(merged, params.wo);
}

Tensor ddl_block(const Tensor& x, const DdlBlockParams& params, bool differential) {
  const Tensor y = add(x, mhda(layer_norm(x, params.ln1.gamma, params.ln1.beta), params.mhda, differential));
  const Tensor h = layer_norm(y, params.ln2.gamma, params.ln2.beta);
  return add(y, swish_glu(h, params.ffn.w1, params.ffn.w2, params.ffn.w3));
}

Tensor backbone_forward(const Tensor& spec, const BackboneParams& params, bool differential) {
  Tensor tokens = patch_embed(spec, params);
  for (const auto& block : params.blocks) tokens = ddl_block(tokens, block, differential);
  return layer_norm(tokens, params.final_ln.gamma, params.final_ln.beta);
}

}  // namespace addn
