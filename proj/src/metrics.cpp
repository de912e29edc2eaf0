#include "addn/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "addn/error.hpp"

namespace addn {

Confusion confusion_from(std::span<const std::size_t> truth, std::span<const std::size_t> predicted) {
  if (truth.size() != predicted.size()) throw ContractError("confusion: label and prediction counts differ");
  Confusion c{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= kNumClasses || predicted[i] >= kNumClasses) throw ContractError("confusion: class out of range");
    c[truth[i]][predicted[i]] += 1;
  }
  return c;
}

MetricsReport compute_metrics(const Confusion& confusion) {
  constexpr std::size_t normal = static_cast<std::size_t>(Label::Normal);
  std::uint64_t normal_total = 0, abnormal_total = 0, abnormal_correct = 0;
  for (std::size_t j = 0; j < kNumClasses; ++j) normal_total += confusion[normal][j];
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (c == normal) continue;
    for (std::size_t j = 0; j < kNumClasses; ++j) abnormal_total += confusion[c][j];
    abnormal_correct += confusion[c][c];
  }
  if (normal_total == 0) throw UndefinedMetricError("specificity undefined: no normal cycles in the split");
  if (abnormal_total == 0) throw UndefinedMetricError("sensitivity undefined: no abnormal cycles in the split");
  MetricsReport r;
  r.confusion = confusion;
  r.sp = static_cast<double>(confusion[normal][normal]) / static_cast<double>(normal_total);
  r.se = static_cast<double>(abnormal_correct) / static_cast<double>(abnormal_total);
  r.score = (r.se + r.sp) / 2.0;
  return r;
}

std::string format_percent(double fraction) {
  // The small offset absorbs binary representation error (0.8513 * 1e4 = 8512.999...).
  const double hundredths = std::floor(fraction * 10000.0 + 1e-6);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", hundredths / 100.0);
  return buf;
}

}  // namespace addn
