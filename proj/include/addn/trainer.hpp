#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "addn/adam.hpp"
#include "addn/dataset.hpp"
#include "addn/metrics.hpp"
#include "addn/model.hpp"

namespace addn {

/// Preprocessed spectrograms with their class indices.
struct LabeledSet {
  std::vector<Tensor> spectrograms;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

LabeledSet build_labeled_set(const Dataset& dataset, Split split, const MelExtractor& extractor,
                             std::size_t threads = 0);

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  AdamConfig adam;
  std::size_t batch = 8;
  std::size_t epochs = 50;
  std::size_t max_steps = 0;  // 0: no cap
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool eval_each_epoch = true;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;  // optimizer steps taken so far
  double train_loss = 0.0;
  std::optional<MetricsReport> metrics;
};

struct TrainResult {
  ModelParams params;
  AdamState adam;
  std::vector<std::string> trainable;  // names, in optimizer order
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;     // mean batch loss per step
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Initial parameters for a run: seeded weights plus input statistics of the
/// training spectrograms.
ModelParams initialize_model(const TrainConfig& config, const LabeledSet& train_set);

/// Mean total loss and its gradient over a batch, reduced in index order.
struct BatchGradient {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // aligned with `names`
};
BatchGradient batch_gradient(const ModelParams& params, const std::vector<std::string>& names,
                             const LabeledSet& data, std::span<const std::size_t> batch, const TrainConfig& config);

/// Mini-batch Adam on the total loss. The result is a pure function of
/// (config, data): per-epoch order comes from the seed's "shuffle" stream and
/// per-sample gradients are summed in fixed order regardless of threads.
TrainResult train(const TrainConfig& config, const LabeledSet& train_set, const LabeledSet* eval_set = nullptr,
                  const EpochCallback& on_epoch = {});

/// Same as train() but continues from given parameters and optimizer state.
TrainResult train_from(ModelParams params, const TrainConfig& config, const LabeledSet& train_set,
                       const LabeledSet* eval_set = nullptr, const EpochCallback& on_epoch = {},
                       AdamState adam = {});

std::vector<std::size_t> predict_all(const ModelParams& params, const ModelConfig& config, const LabeledSet& data,
                                     std::size_t threads = 0);

/// One prediction per cycle clip, assembled into ICBHI metrics.
MetricsReport evaluate(const ModelParams& params, const ModelConfig& config, const LabeledSet& data,
                       std::size_t threads = 0);

}  // namespace addn
