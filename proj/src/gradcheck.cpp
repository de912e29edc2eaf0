#include "addn/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "addn/aff.hpp"
#include "addn/ddl.hpp"
#include "addn/error.hpp"
#include "addn/losses.hpp"
#include "addn/model.hpp"
#include "addn/ops.hpp"
#include "addn/rng.hpp"
#include "addn/trainer.hpp"

namespace addn {

namespace {

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.normal(0.0, scale);
  return Tensor::from_data(std::move(shape), std::move(v));
}

// sum(out * r) with a fixed random r, so every output entry contributes a
// distinct weight and no gradient cancels by symmetry.
Tensor project(const Tensor& out, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "gradcheck.projection", out.numel());
  return sum(mul(out, random_tensor(out.shape(), rng)));
}

}  // namespace

std::vector<GradcheckEntry> check_gradients(const std::string& check, const std::vector<std::string>& names,
                                            const std::vector<Tensor>& inputs, const LossFn& loss,
                                            const GradcheckOptions& options, const GroupFn& group) {
  if (names.size() != inputs.size()) throw ContractError("check_gradients: one name per input required");

  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(t.clone(true));
  const Tensor out = loss(leaves);
  if (out.numel() != 1) throw ContractError("check_gradients: loss must be scalar");
  out.backward();

  // Perturbed copies share nothing with the leaves so the graph is rebuilt
  // from scratch for every evaluation.
  std::vector<Tensor> probe;
  for (const auto& t : inputs) probe.push_back(t.clone(false));
  auto eval = [&](std::size_t k, std::size_t idx, double delta) {
    auto data = probe[k].mutable_data();
    const double saved = data[idx];
    data[idx] = saved + delta;
    const double value = loss(probe).item();
    data[idx] = saved;
    return value;
  };

  Rng rng = Rng::stream(options.seed, "gradcheck." + check);
  std::vector<GradcheckEntry> entries;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    GradcheckEntry e;
    e.check = check;
    e.tensor = names[k];
    e.group = group ? group(names[k]) : check;
    e.tolerance = options.tolerance;
    const auto analytic = leaves[k].grad();
    const std::size_t n = inputs[k].numel();

    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    rng.shuffle(std::span<std::size_t>(pool));
    const std::size_t want = std::min(n, options.samples_per_tensor);
    for (std::size_t next = 0; next < n && e.probed < want; ++next) {
      const std::size_t idx = pool[next];
      // Difference quotients at h and h/2 agree to O(h^2) on smooth stretches.
      // When they do not, the step straddles kinks (ReLU or shrink
      // thresholds), so the step is refined until they do.
      bool smooth = false;
      double err = 0.0;
      std::size_t level = 0;
      for (double h = options.step; level < options.max_refinements && !smooth; h /= 10.0, ++level) {
        const double fd = (eval(k, idx, h) - eval(k, idx, -h)) / (2.0 * h);
        const double fd_half = (eval(k, idx, h / 2) - eval(k, idx, -h / 2)) / h;
        smooth = rel_error(fd, fd_half) <= 0.1 * options.tolerance;
        err = std::min(rel_error(analytic[idx], fd), rel_error(analytic[idx], fd_half));
        if (err <= options.tolerance && level == 0) smooth = true;
      }
      if (!smooth) {
        ++e.skipped;
        continue;
      }
      if (level > 1) ++e.refined;
      ++e.probed;
      e.max_rel_error = std::max(e.max_rel_error, err);
    }
    e.passed = e.max_rel_error <= options.tolerance && e.probed > 0;
    entries.push_back(std::move(e));
  }
  return entries;
}

bool GradcheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradcheckEntry& e) { return e.passed; });
}

std::vector<std::string> GradcheckReport::groups() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (std::find(out.begin(), out.end(), e.group) == out.end()) out.push_back(e.group);
  }
  return out;
}

std::string parameter_group(const std::string& name) {
  if (name.rfind("aff.", 0) == 0) return "aff mask net";
  if (name.size() >= 7 && name.compare(name.size() - 7, 7, ".lambda") == 0) return "lambda";
  if (name.find(".mhda.") != std::string::npos) return "attention";
  if (name.rfind("head.", 0) == 0) return "heads";
  if (name.find(".ffn.") != std::string::npos) return "feed-forward";
  return "backbone";
}

GradcheckReport run_gradcheck_suite(const GradcheckSuiteConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  GradcheckReport report;
  Rng rng = Rng::stream(config.seed, "gradcheck.inputs");
  GradcheckOptions op;
  op.step = config.step;
  op.tolerance = config.op_tolerance;
  op.samples_per_tensor = config.samples_per_tensor;
  op.seed = config.seed;
  const std::uint64_t ps = config.seed;

  auto keep = [&](std::vector<GradcheckEntry> entries) {
    for (auto& e : entries) report.entries.push_back(std::move(e));
  };
  auto named = [](const std::string& check, std::initializer_list<const char*> names) {
    std::vector<std::string> out;
    for (const char* n : names) out.push_back(check + "." + n);
    return out;
  };

  keep(check_gradients("matmul", named("matmul", {"a", "b"}),
                      {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)},
                      [&](const std::vector<Tensor>& in) { return project(matmul(in[0], in[1]), ps); }, op));

  keep(check_gradients("softmax", named("softmax", {"x"}), {random_tensor({3, 5}, rng)},
                      [&](const std::vector<Tensor>& in) { return project(softmax(in[0], 1), ps); }, op));

  keep(check_gradients("layer_norm", named("layer_norm", {"x", "gamma", "beta"}),
                      {random_tensor({2, 5}, rng), random_tensor({5}, rng), random_tensor({5}, rng)},
                      [&](const std::vector<Tensor>& in) { return project(layer_norm(in[0], in[1], in[2]), ps); },
                      op));

  keep(check_gradients(
      "swish_glu", named("swish_glu", {"x", "w1", "w2", "w3"}),
      {random_tensor({2, 4}, rng), random_tensor({4, 6}, rng, 0.5), random_tensor({4, 6}, rng, 0.5),
       random_tensor({6, 4}, rng, 0.5)},
      [&](const std::vector<Tensor>& in) { return project(swish_glu(in[0], in[1], in[2], in[3]), ps); }, op));

  keep(check_gradients("soft_shrink", named("soft_shrink", {"x"}), {random_tensor({4, 6}, rng, 0.1)},
                      [&](const std::vector<Tensor>& in) { return project(soft_shrink(in[0], 0.02), ps); }, op));

  keep(check_gradients("fft2_mask_ifft2", named("fft2_mask_ifft2", {"x", "mask"}),
                      {random_tensor({6, 5}, rng), random_tensor({6, 5}, rng)},
                      [&](const std::vector<Tensor>& in) {
                        const ComplexTensor s = fft2(in[0]);
                        return project(ifft2({mul(in[1], s.re), mul(in[1], s.im)}, false), ps);
                      },
                      op));

  {
    Rng init = Rng::stream(config.seed, "gradcheck.aff");
    const AffParams aff = init_aff(8, 0.02, init);
    keep(check_gradients("aff_forward", {"aff.x", "aff.mask_w1", "aff.mask_b1", "aff.mask_w2", "aff.mask_b2"},
                        {random_tensor({6, 8}, rng), aff.mask_w1, aff.mask_b1, random_tensor({8, 1}, rng, 0.5),
                         aff.mask_b2},
                        [&](const std::vector<Tensor>& in) {
                          AffParams p{in[1], in[2], in[3], in[4], 0.02};
                          return project(aff_forward(in[0], p), ps);
                        },
                        op, [](const std::string& n) { return n == "aff.x" ? "aff input" : "aff mask net"; }));
  }

  {
    Rng init = Rng::stream(config.seed, "gradcheck.mhda");
    MhdaParams m = init_mhda(8, 2, false, 0.8, init);
    keep(check_gradients("mhda", {"mhda.x", "mhda.wq", "mhda.wk", "mhda.wv", "mhda.wo", "mhda.lambda"},
                        {random_tensor({3, 8}, rng), m.wq, m.wk, m.wv, m.wo, m.lambda},
                        [&](const std::vector<Tensor>& in) {
                          MhdaParams p{in[1], in[2], in[3], in[4], in[5], 2};
                          return project(mhda(in[0], p), ps);
                        },
                        op, [](const std::string& n) { return n == "mhda.lambda" ? "lambda" : "attention"; }));
  }

  {
    Rng init = Rng::stream(config.seed, "gradcheck.ddl");
    BackboneShape shape;
    shape.d_model = 8;
    shape.heads = 2;
    shape.ffn_hidden = 16;
    const DdlBlockParams b = init_ddl_block(shape, init);
    GradcheckOptions block = op;
    block.tolerance = config.model_tolerance;
    keep(check_gradients(
        "ddl_block",
        {"ddl.x", "ddl.ln1.gamma", "ddl.ln1.beta", "ddl.mhda.wq", "ddl.mhda.wk", "ddl.mhda.wv", "ddl.mhda.wo",
         "ddl.mhda.lambda", "ddl.ln2.gamma", "ddl.ln2.beta", "ddl.ffn.w1", "ddl.ffn.w2", "ddl.ffn.w3"},
        {random_tensor({4, 8}, rng), b.ln1.gamma, b.ln1.beta, b.mhda.wq, b.mhda.wk, b.mhda.wv, b.mhda.wo,
         b.mhda.lambda, b.ln2.gamma, b.ln2.beta, b.ffn.w1, b.ffn.w2, b.ffn.w3},
        [&](const std::vector<Tensor>& in) {
          DdlBlockParams p;
          p.ln1 = {in[1], in[2]};
          p.mhda = {in[3], in[4], in[5], in[6], in[7], 2};
          p.ln2 = {in[8], in[9]};
          p.ffn = {in[10], in[11], in[12]};
          return project(ddl_block(in[0], p), ps);
        },
        block, [](const std::string& n) { return n == "ddl.x" ? std::string("ddl input") : parameter_group(n); }));
  }

  {
    Rng init = Rng::stream(config.seed, "gradcheck.patch");
    BackboneShape shape;
    shape.frames = 20;
    shape.bands = 16;
    shape.patch = 4;
    shape.d_model = 8;
    shape.heads = 2;
    shape.layers = 0;
    shape.ffn_hidden = 16;
    BackboneParams b = init_backbone(shape, init);
    keep(check_gradients("patch_embed", {"patch.spec", "patch.w", "patch.b", "patch.pos_embed"},
                        {random_tensor({20, 16}, rng), b.patch_w, b.patch_b, b.pos_embed},
                        [&](const std::vector<Tensor>& in) {
                          BackboneParams p = b;
                          p.patch_w = in[1];
                          p.patch_b = in[2];
                          p.pos_embed = in[3];
                          return project(patch_embed(in[0], p), ps);
                        },
                        op, [](const std::string&) { return std::string("patch embedding"); }));
  }

  {
    GradcheckOptions ce = op;
    ce.step = 1e-5;
    ce.tolerance = 1e-6;
    keep(check_gradients("ce_loss", {"ce.logits"}, {random_tensor({1, 4}, rng)},
                        [](const std::vector<Tensor>& in) { return ce_loss(in[0], 2); }, ce,
                        [](const std::string&) { return std::string("losses"); }));
  }

  {
    Rng init = Rng::stream(config.seed, "gradcheck.heads");
    const HeadParams h = init_heads(8, init);
    keep(check_gradients(
        "bias_denoise_loss",
        {"bd.p", "head.norm.gamma", "head.norm.beta", "head.phi_w", "head.phi_b", "head.cls_w", "head.cls_b"},
        {random_tensor({5, 8}, rng), random_tensor({8}, rng), random_tensor({8}, rng), h.phi_w, h.phi_b, h.cls_w,
         h.cls_b},
        [](const std::vector<Tensor>& in) {
          HeadParams p{{in[1], in[2]}, in[3], in[4], in[5], in[6]};
          return total_loss(in[0], classifier_logits(in[0], p), 1, LossConfig{}, p);
        },
        op, [](const std::string& n) { return n == "bd.p" ? std::string("losses") : std::string("heads"); }));
  }

  if (config.include_model) {
    SynthConfig sc;
    sc.train_per_class = 1;
    sc.test_per_class = 1;
    sc.subjects = 2;
    const Dataset ds = synth_dataset(sc, config.seed);
    const LabeledSet all = build_labeled_set(ds, Split::Train, MelExtractor{MelConfig{}}, 1);
    LabeledSet batch;
    for (std::size_t i : {std::size_t{1}, std::size_t{3}}) {  // crackle and both
      batch.spectrograms.push_back(all.spectrograms[i]);
      batch.labels.push_back(all.labels[i]);
    }

    TrainConfig tc;
    tc.model.backbone.d_model = 32;
    tc.model.backbone.heads = 2;
    tc.model.backbone.layers = 1;
    tc.model.backbone.ffn_hidden = 64;
    tc.model.mask_hidden = 8;
    tc.seed = config.seed;
    const ModelParams base = initialize_model(tc, batch);

    std::vector<std::string> names;
    std::vector<Tensor> values;
    base.for_each([&](const std::string& name, const Tensor& t) {
      if (is_trainable(name, tc.model)) {
        names.push_back(name);
        values.push_back(t);
      }
    });

    GradcheckOptions model_opt = op;
    model_opt.tolerance = config.model_tolerance;
    model_opt.samples_per_tensor = config.model_samples_per_tensor;
    keep(check_gradients(
        "model", names, values,
        [&](const std::vector<Tensor>& in) {
          ModelParams p = base;
          std::size_t k = 0;
          p.for_each([&](const std::string& name, Tensor& t) {
            if (k < names.size() && names[k] == name) t = in[k++];
          });
          Tensor total;
          for (std::size_t i = 0; i < batch.size(); ++i) {
            const ModelOutput out = model_forward(batch.spectrograms[i], p, tc.model);
            const Tensor l = total_loss(out.features, out.cls_logits, batch.labels[i], tc.loss, p.head);
            total = total.defined() ? add(total, l) : l;
          }
          return scale(total, 1.0 / static_cast<double>(batch.size()));
        },
        model_opt, parameter_group));
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string format_gradcheck_report(const GradcheckReport& report) {
  std::string out;
  char line[256];
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line,
                  "%-4s %-18s %-16s %-34s max_rel=%.3e tol=%.0e probed=%zu refined=%zu skipped=%zu\n",
                  e.passed ? "ok" : "FAIL", e.check.c_str(), e.group.c_str(), e.tensor.c_str(), e.max_rel_error,
                  e.tolerance, e.probed, e.refined, e.skipped);
    out += line;
  }
  std::string groups;
  for (const auto& g : report.groups()) groups += (groups.empty() ? "" : ", ") + g;
  std::snprintf(line, sizeof line, "groups: %s\n%s in %.1fs\n", groups.c_str(),
                report.passed() ? "all gradient checks passed" : "gradient check FAILED", report.seconds);
  out += line;
  return out;
}

}  // namespace addn
