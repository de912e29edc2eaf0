#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "addn/rng.hpp"
#include "addn/tensor.hpp"

namespace addn {

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;

  static LayerNormParams identity(std::size_t width);
};

/// Multi-head differential attention. Per head h the query and key
/// projections hold two halves (Q1|Q2, K1|K2) of width d each.
struct MhdaParams {
  Tensor wq;      // [D x 2*d*heads]
  Tensor wk;      // [D x 2*d*heads]
  Tensor wv;      // [D x dv*heads]
  Tensor wo;      // [dv*heads x D]
  Tensor lambda;  // [heads], or [1] when shared across heads
  std::size_t heads = 1;
};

struct SwishGluParams {
  Tensor w1;  // [D x hidden]
  Tensor w2;  // [D x hidden]
  Tensor w3;  // [hidden x D]
};

struct DdlBlockParams {
  LayerNormParams ln1;
  MhdaParams mhda;
  LayerNormParams ln2;
  SwishGluParams ffn;
};

/// Patch embedding, the DDL stack and a final layer norm.
struct BackboneParams {
  Tensor patch_w;    // [patch*patch x D]
  Tensor patch_b;    // [D]
  Tensor pos_embed;  // [N x D]
  std::vector<DdlBlockParams> blocks;
  LayerNormParams final_ln;
  std::size_t patch = 16;

  template <typename F>
  void for_each(F&& fn) {
    fn("backbone.patch_w", patch_w);
    fn("backbone.patch_b", patch_b);
    fn("backbone.pos_embed", pos_embed);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "backbone.block" + std::to_string(i) + ".";
      auto& b = blocks[i];
      fn(p + "ln1.gamma", b.ln1.gamma);
      fn(p + "ln1.beta", b.ln1.beta);
      fn(p + "mhda.wq", b.mhda.wq);
      fn(p + "mhda.wk", b.mhda.wk);
      fn(p + "mhda.wv", b.mhda.wv);
      fn(p + "mhda.wo", b.mhda.wo);
      fn(p + "mhda.lambda", b.mhda.lambda);
      fn(p + "ln2.gamma", b.ln2.gamma);
      fn(p + "ln2.beta", b.ln2.beta);
      fn(p + "ffn.w1", b.ffn.w1);
      fn(p + "ffn.w2", b.ffn.w2);
      fn(p + "ffn.w3", b.ffn.w3);
    }
    fn("backbone.final_ln.gamma", final_ln.gamma);
    fn("backbone.final_ln.beta", final_ln.beta);
  }
};

struct BackboneShape {
  std::size_t frames = 249;
  std::size_t bands = 64;
  std::size_t patch = 16;
  std::size_t d_model = 96;
  std::size_t heads = 4;
  std::size_t layers = 4;
  std::size_t ffn_hidden = 192;
  bool shared_lambda = false;
  double lambda_init = 0.8;

  std::size_t tokens() const;
};

MhdaParams init_mhda(std::size_t d_model, std::size_t heads, bool shared_lambda, double lambda_init, Rng& rng);
DdlBlockParams init_ddl_block(const BackboneShape& shape, Rng& rng);
BackboneParams init_backbone(const BackboneShape& shape, Rng& rng);

/// 16x16 non-overlapping patches over the zero-padded spectrogram, projected
/// to D, plus positional embedding.
Tensor patch_embed(const Tensor& spec, const BackboneParams& params);

/// Per head: (softmax(Q1 K1^T/sqrt(d)) - lambda * softmax(Q2 K2^T/sqrt(d))) V,
/// heads concatenated and projected by wo. With differential=false only the
/// first map is used, i.e. standard attention.
Tensor mhda(const Tensor& x, const MhdaParams& params, bool differential = true);

/// Y = X + mhda(ln1(X)); Z = Y + swish_glu(ln2(Y)).
Tensor ddl_block(const Tensor& x, const DdlBlockParams& params, bool differential = true);

/// final_ln(blocks(patch_embed(spec))): the token features p.
Tensor backbone_forward(const Tensor& spec, const BackboneParams& params, bool differential = true);

}  // namespace addn
