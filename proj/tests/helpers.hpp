#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <span>
#include <vector>

#include <doctest.h>

#include "addn/gradcheck.hpp"
#include "addn/ops.hpp"
#include "addn/rng.hpp"
#include "addn/tensor.hpp"
#include "temp_dir.hpp"

namespace testing {

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  addn::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0, scale);
  return v;
}

inline addn::Tensor random_tensor(addn::Shape shape, std::uint64_t seed, double scale = 1.0,
                                  bool requires_grad = false) {
  const std::size_t n = addn::shape_numel(shape);
  return addn::Tensor::from_data(std::move(shape), random_values(n, seed, scale), requires_grad);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

// Central-difference check of one scalar function of a few inputs.
inline bool passes_fd(const std::string& name, const std::vector<addn::Tensor>& inputs, const addn::LossFn& loss,
                      double tolerance = 1e-4, double step = 1e-3) {
  addn::GradcheckOptions opt;
  opt.tolerance = tolerance;
  opt.step = step;
  opt.samples_per_tensor = 64;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < inputs.size(); ++i) names.push_back(name + std::to_string(i));
  bool ok = true;
  for (const auto& e : addn::check_gradients(name, names, inputs, loss, opt)) {
    INFO(e.tensor << " max_rel=" << e.max_rel_error);
    CHECK(e.passed);
    ok = ok && e.passed;
  }
  return ok;
}

// Loss with a random cotangent, so every output entry gets a distinct weight.
inline addn::Tensor weighted_sum(const addn::Tensor& y, std::uint64_t seed) {
  return addn::sum(addn::mul(y, random_tensor(y.shape(), seed)));
}

}  // namespace testing
