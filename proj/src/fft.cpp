#include "addn/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <numbers>

namespace addn::fft {

namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

struct Radix2Plan {
  std::size_t n = 0;
  std::vector<std::size_t> bitrev;
  std::vector<Complex> twiddle;  // exp(-2 pi i k / n), k < n/2

  explicit Radix2Plan(std::size_t size) : n(size), bitrev(size), twiddle(size / 2) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1) << (bits - 1 - b);
      bitrev[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle[k] = {std::cos(a), std::sin(a)};
    }
  }

  void run(std::span<Complex> x, bool inverse) const {
    for (std::size_t i = 0; i < n; ++i) {
      if (i < bitrev[i]) std::swap(x[i], x[bitrev[i]]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          Complex w = twiddle[j * stride];
          if (inverse) w = std::conj(w);
          const Complex u = x[start + j];
          const Complex v = x[start + j + half] * w;
          x[start + j] = u + v;
          x[start + j + half] = u - v;
        }
      }
    }
  }
};

// Chirp-z formulation: X_k = w_k * sum_n (x_n w_n) conj(w_{k-n}), w_k = exp(-i pi k^2 / N).
struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Complex> chirp;
  std::vector<Complex> kernel_hat;
  std::unique_ptr<Radix2Plan> inner;

  explicit BluesteinPlan(std::size_t size) : n(size), m(next_pow2(2 * size - 1)), chirp(size) {
    inner = std::make_unique<Radix2Plan>(m);
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2N keeps the phase argument small for large k.
      const std::size_t k2 = (k * k) % (2 * n);
      const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp[k] = {std::cos(a), std::sin(a)};
    }
    kernel_hat.assign(m, Complex{});
    kernel_hat[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel_hat[k] = std::conj(chirp[k]);
      kernel_hat[m - k] = std::conj(chirp[k]);
    }
    inner->run(kernel_hat, false);
  }

  void run(std::span<Complex> x, bool inverse) const {
    if (inverse) {
      for (auto& v : x) v = std::conj(v);
    }
    std::vector<Complex> a(m, Complex{});
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    inner->run(a, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= kernel_hat[k];
    inner->run(a, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * scale * chirp[k];
    if (inverse) {
      for (auto& v : x) v = std::conj(v);
    }
  }
};

struct Plan {
  std::unique_ptr<Radix2Plan> radix2;
  std::unique_ptr<BluesteinPlan> bluestein;
};

const Plan& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, Plan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Plan plan;
  if (is_pow2(n)) {
    plan.radix2 = std::make_unique<Radix2Plan>(n);
  } else {
    plan.bluestein = std::make_unique<BluesteinPlan>(n);
  }
  return cache.emplace(n, std::move(plan)).first->second;
}

}  // namespace

void transform(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  const Plan& plan = plan_for(n);
  if (plan.radix2) {
    plan.radix2->run(data, inverse);
  } else {
    plan.bluestein->run(data, inverse);
  }
}

void transform_2d(std::span<Complex> data, std::size_t rows, std::size_t cols, bool inverse) {
  for (std::size_t r = 0; r < rows; ++r) transform(data.subspan(r * cols, cols), inverse);
  std::vector<Complex> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = data[r * cols + c];
    transform(column, inverse);
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = column[r];
  }
}

std::vector<double> power_spectrum(std::span<const double> frame) {
  std::vector<Complex> buf(frame.begin(), frame.end());
  transform(buf, false);
  std::vector<double> out(frame.size() / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
  return out;
}

}  // namespace addn::fft
