#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "addn/audio.hpp"

namespace addn {

/// Rows index the true class, columns the prediction.
using Confusion = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;

struct MetricsReport {
  Confusion confusion{};
  double se = 0.0;     // exact-class accuracy over abnormal cycles
  double sp = 0.0;     // accuracy over normal cycles
  double score = 0.0;  // (se + sp) / 2
};

Confusion confusion_from(std::span<const std::size_t> truth, std::span<const std::size_t> predicted);

/// ICBHI Se/Sp/Score. Throws UndefinedMetricError when either the normal or
/// the abnormal truth stratum is empty.
MetricsReport compute_metrics(const Confusion& confusion);

/// Percentage truncated (not rounded) to two decimals, e.g. 0.65535 -> "65.53".
std::string format_percent(double fraction);

}  // namespace addn
