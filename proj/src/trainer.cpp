#include "addn/trainer.hpp"

#include <numeric>

#include "addn/error.hpp"
#include "addn/parallel.hpp"

namespace addn {

LabeledSet build_labeled_set(const Dataset& dataset, Split split, const MelExtractor& extractor, std::size_t threads) {
  const std::vector<std::size_t> idx = dataset.indices(split);
  LabeledSet out;
  out.spectrograms.resize(idx.size());
  out.labels.resize(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t i) {
    out.spectrograms[i] = preprocess(dataset.clips[idx[i]], extractor).values;
    out.labels[i] = static_cast<std::size_t>(dataset.clips[idx[i]].label);
  });
  return out;
}

ModelParams initialize_model(const TrainConfig& config, const LabeledSet& train_set) {
  ModelParams params = init_model(config.model, config.seed);
  if (train_set.size() > 0) set_input_statistics(params, train_set.spectrograms);
  return params;
}

BatchGradient batch_gradient(const ModelParams& params, const std::vector<std::string>& names,
                             const LabeledSet& data, std::span<const std::size_t> batch, const TrainConfig& config) {
  struct Slot {
    double loss = 0.0;
    std::vector<std::vector<double>> grads;
  };
  std::vector<Slot> slots(batch.size());
  parallel_for(batch.size(), config.threads, [&](std::size_t i) {
    const std::size_t sample = batch[i];
    const ModelParams bound = params.bind(true);
    const ModelOutput out = model_forward(data.spectrograms[sample], bound, config.model);
    const Tensor loss = total_loss(out.features, out.cls_logits, data.labels[sample], config.loss, bound.head);
    loss.backward();
    Slot& slot = slots[i];
    slot.loss = loss.item();
    std::size_t k = 0;
    slot.grads.resize(names.size());
    bound.for_each([&](const std::string& name, const Tensor& t) {
      if (k < names.size() && names[k] == name) {
        auto g = t.grad();
        slot.grads[k++].assign(g.begin(), g.end());
      }
    });
  });

  BatchGradient out;
  out.grads.resize(names.size());
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    out.loss += slots[i].loss;
    for (std::size_t k = 0; k < names.size(); ++k) {
      auto& acc = out.grads[k];
      const auto& g = slots[i].grads[k];
      if (acc.empty()) acc.assign(g.size(), 0.0);
      for (std::size_t j = 0; j < g.size(); ++j) acc[j] += g[j];
    }
  }
  out.loss *= inv;
  for (auto& g : out.grads) {
    for (double& v : g) v *= inv;
  }
  return out;
}

TrainResult train(const TrainConfig& config, const LabeledSet& train_set, const LabeledSet* eval_set,
                  const EpochCallback& on_epoch) {
  return train_from(initialize_model(config, train_set), config, train_set, eval_set, on_epoch);
}

TrainResult train_from(ModelParams params, const TrainConfig& config, const LabeledSet& train_set,
                       const LabeledSet* eval_set, const EpochCallback& on_epoch, AdamState adam) {
  if (config.batch == 0) throw ContractError("batch size must be positive");
  TrainResult result;
  result.params = std::move(params);
  result.adam = std::move(adam);
  std::vector<Tensor> trainable;
  result.params.for_each([&](const std::string& name, Tensor& t) {
    if (is_trainable(name, config.model)) {
      result.trainable.push_back(name);
      trainable.push_back(t);
    }
  });
  if (!result.adam.m.empty() && result.adam.m.size() != trainable.size()) {
    throw ContractError("optimizer state holds " + std::to_string(result.adam.m.size()) + " buffers for " +
                        std::to_string(trainable.size()) + " trainable tensors");
  }
  if (config.epochs == 0 || train_set.size() == 0) return result;

  Rng shuffle_rng = Rng::stream(config.seed, "shuffle");
  std::vector<std::size_t> order(train_set.size());
  std::size_t step = 0;
  bool capped = false;
  for (std::size_t epoch = 1; epoch <= config.epochs && !capped; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      if (config.max_steps && step >= config.max_steps) {
        capped = true;
        break;
      }
      const std::size_t end = std::min(order.size(), start + config.batch);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      BatchGradient bg;
      try {
        bg = batch_gradient(result.params, result.trainable, train_set, batch, config);
      } catch (const NumericError& e) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step + 1) + ": " + e.what());
      }
      adam_step(trainable, bg.grads, result.adam, config.adam);
      ++step;
      result.step_losses.push_back(bg.loss);
      epoch_loss += bg.loss * static_cast<double>(batch.size());
      seen += batch.size();
    }
    if (seen == 0) break;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = step;
    rec.train_loss = epoch_loss / static_cast<double>(seen);
    if (config.eval_each_epoch && eval_set && eval_set->size() > 0) {
      try {
        rec.metrics = evaluate(result.params, config.model, *eval_set, config.threads);
      } catch (const UndefinedMetricError&) {
        rec.metrics.reset();
      }
    }
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (config.max_steps && step >= config.max_steps) capped = true;
  }
  return result;
}

std::vector<std::size_t> predict_all(const ModelParams& params, const ModelConfig& config, const LabeledSet& data,
                                     std::size_t threads) {
  std::vector<std::size_t> out(data.size());
  const ModelParams frozen = params.bind(false);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    out[i] = argmax_class(model_forward(data.spectrograms[i], frozen, config).cls_logits.data());
  });
  return out;
}

MetricsReport evaluate(const ModelParams& params, const ModelConfig& config, const LabeledSet& data,
                       std::size_t threads) {
  if (data.size() == 0) throw UndefinedMetricError("cannot evaluate an empty split");
  const std::vector<std::size_t> predicted = predict_all(params, config, data, threads);
  return compute_metrics(confusion_from(data.labels, predicted));
}

}  // namespace addn
