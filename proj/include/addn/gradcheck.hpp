#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "addn/tensor.hpp"

namespace addn {

struct GradcheckOptions {
  double step = 1e-3;
  double tolerance = 1e-4;
  std::size_t samples_per_tensor = 16;  // entries probed per tensor; all when smaller
  std::uint64_t seed = 0;
  std::size_t max_refinements = 4;  // step sizes tried: h, h/10, h/100, h/1000
};

/// Result for one input tensor of one check.
struct GradcheckEntry {
  std::string check;
  std::string group;
  std::string tensor;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t probed = 0;
  std::size_t refined = 0;  // entries that needed a smaller step than the nominal one
  std::size_t skipped = 0;  // entries where no step gave a consistent quotient
  bool passed = true;
};

using LossFn = std::function<Tensor(const std::vector<Tensor>&)>;
using GroupFn = std::function<std::string(const std::string&)>;

/// Central finite differences against backward() for a scalar loss of the
/// given inputs, rel = |a - n| / max(|a|, |n|, 1e-6). Each probed entry first
/// uses the nominal step h. If it fails there and the quotients at h and h/2
/// disagree, the step is divided by 10 until they agree. An entry that
/// never settles is reported as skipped and replaced by another draw.
std::vector<GradcheckEntry> check_gradients(const std::string& check, const std::vector<std::string>& names,
                                            const std::vector<Tensor>& inputs, const LossFn& loss,
                                            const GradcheckOptions& options, const GroupFn& group = {});

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double seconds = 0.0;

  bool passed() const;
  /// Distinct group names seen, in first-appearance order.
  std::vector<std::string> groups() const;
};

struct GradcheckSuiteConfig {
  std::uint64_t seed = 0;
  std::size_t samples_per_tensor = 16;
  std::size_t model_samples_per_tensor = 6;
  double op_tolerance = 1e-4;
  double model_tolerance = 1e-3;
  double step = 1e-3;
  bool include_model = true;
};

/// Every differentiable op, one DDL block, and the composed model (AFF, one
/// DDL block with D=32 and two heads, both loss heads) on a 2-sample batch.
GradcheckReport run_gradcheck_suite(const GradcheckSuiteConfig& config = {});

/// Maps a model parameter name to its reporting group.
std::string parameter_group(const std::string& name);

std::string format_gradcheck_report(const GradcheckReport& report);

}  // namespace addn
