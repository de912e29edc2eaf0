#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance binary. Everything here is written from the defining formulas
// with plain loops and std::complex; nothing calls into the library's
// numerical kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                  std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  return c;
}

// X(u,v) = sum_t sum_f x(t,f) exp(-2 pi i (u t / T + v f / F))
inline std::vector<cd> dft2(const std::vector<cd>& x, std::size_t T, std::size_t F, bool inverse = false) {
  std::vector<cd> out(T * F);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t u = 0; u < T; ++u)
    for (std::size_t v = 0; v < F; ++v) {
      cd s = 0.0;
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t f = 0; f < F; ++f) {
          const double phase = 2.0 * std::numbers::pi *
                               (static_cast<double>(u * t % T) / static_cast<double>(T) +
                                static_cast<double>(v * f % F) / static_cast<double>(F));
          s += x[t * F + f] * std::polar(1.0, sign * phase);
        }
      out[u * F + v] = inverse ? s / static_cast<double>(T * F) : s;
    }
  return out;
}

inline std::vector<cd> dft2_real(const std::vector<double>& x, std::size_t T, std::size_t F) {
  return dft2(std::vector<cd>(x.begin(), x.end()), T, F);
}

inline double soft_shrink(double x, double alpha) {
  const double m = std::abs(x) - alpha;
  return m > 0.0 ? std::copysign(m, x) : 0.0;
}

// Pointwise mask MLP on one bin: affine(2 -> H), ReLU, affine(H -> 1).
inline double mask_mlp(double re, double im, const std::vector<double>& w1, const std::vector<double>& b1,
                       const std::vector<double>& w2, double b2) {
  const std::size_t H = b1.size();
  double out = b2;
  for (std::size_t h = 0; h < H; ++h) {
    const double z = re * w1[h] + im * w1[H + h] + b1[h];
    out += std::max(z, 0.0) * w2[h];
  }
  return out;
}

// Filter per the model definition: direct DFT, per-bin mask from the
// scaled (re, im) pair symmetrized over the conjugate, shrink, multiply,
// direct inverse DFT, real part.
inline std::vector<double> aff(const std::vector<double>& x, std::size_t T, std::size_t F,
                               const std::vector<double>& w1, const std::vector<double>& b1,
                               const std::vector<double>& w2, double b2, double alpha) {
  std::vector<cd> X = dft2_real(x, T, F);
  const double s = 1.0 / std::sqrt(static_cast<double>(T * F));
  for (cd& z : X) {
    const double re = z.real() * s, im = z.imag() * s;
    const double m = 0.5 * (mask_mlp(re, im, w1, b1, w2, b2) + mask_mlp(re, -im, w1, b1, w2, b2));
    z *= soft_shrink(m, alpha);
  }
  const std::vector<cd> y = dft2(X, T, F, true);
  std::vector<double> out(T * F);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i].real();
  return out;
}

// Scripted multi-head differential attention. Row-major X [N x D], weights
// [D x width]. Per head h, query/key columns [2hd, 2hd+d) form Q1/K1 and
// [2hd+d, 2hd+2d) form Q2/K2; value columns [h dv, (h+1) dv).
inline std::vector<double> mhda(const std::vector<double>& X, std::size_t N, std::size_t D,
                                const std::vector<double>& wq, const std::vector<double>& wk,
                                const std::vector<double>& wv, const std::vector<double>& wo,
                                const std::vector<double>& lambda, std::size_t heads) {
  const std::size_t qk = D, d = qk / (2 * heads), dv = D / heads;
  auto proj = [&](const std::vector<double>& w, std::size_t width) {
    std::vector<double> out(N * width, 0.0);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t j = 0; j < width; ++j)
        for (std::size_t i = 0; i < D; ++i) out[n * width + j] += X[n * D + i] * w[i * width + j];
    return out;
  };
  const auto Q = proj(wq, qk), K = proj(wk, qk), V = proj(wv, D);
  auto attention_map = [&](std::size_t qoff) {
    std::vector<double> A(N * N);
    for (std::size_t a = 0; a < N; ++a) {
      double mx = -1e300;
      for (std::size_t b = 0; b < N; ++b) {
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += Q[a * qk + qoff + c] * K[b * qk + qoff + c];
        A[a * N + b] = dot / std::sqrt(static_cast<double>(d));
        mx = std::max(mx, A[a * N + b]);
      }
      double z = 0.0;
      for (std::size_t b = 0; b < N; ++b) z += (A[a * N + b] = std::exp(A[a * N + b] - mx));
      for (std::size_t b = 0; b < N; ++b) A[a * N + b] /= z;
    }
    return A;
  };
  std::vector<double> merged(N * D, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto A1 = attention_map(2 * h * d), A2 = attention_map(2 * h * d + d);
    const double lam = lambda.size() == 1 ? lambda[0] : lambda[h];
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t c = 0; c < dv; ++c) {
        double s = 0.0;
        for (std::size_t b = 0; b < N; ++b) s += (A1[a * N + b] - lam * A2[a * N + b]) * V[b * D + h * dv + c];
        merged[a * D + h * dv + c] = s;
      }
  }
  std::vector<double> out(N * D, 0.0);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t i = 0; i < D; ++i) out[n * D + j] += merged[n * D + i] * wo[i * D + j];
  return out;
}

struct Counted {
  double se, sp, score;
  std::array<std::array<std::uint64_t, 4>, 4> confusion;
};

// Per-sample tally: normal truth counts toward Sp, anything else toward Se
// and only an exact class match is a hit.
inline Counted count_metrics(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
  Counted r{};
  std::uint64_t normal_total = 0, normal_hit = 0, abnormal_total = 0, abnormal_hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[truth[i]][predicted[i]];
    if (truth[i] == 0) {
      ++normal_total;
      normal_hit += predicted[i] == 0;
    } else {
      ++abnormal_total;
      abnormal_hit += predicted[i] == truth[i];
    }
  }
  r.sp = static_cast<double>(normal_hit) / static_cast<double>(normal_total);
  r.se = static_cast<double>(abnormal_hit) / static_cast<double>(abnormal_total);
  r.score = (r.se + r.sp) / 2.0;
  return r;
}

// Index of the largest |DFT| bin in [1, n/2] by direct summation.
inline std::size_t dft_peak_bin(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    cd s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      s += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
    }
    if (std::abs(s) > best_mag) {
      best_mag = std::abs(s);
      best = k;
    }
  }
  return best;
}

inline double htk_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double htk_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular HTK filterbank with 2/(hi - lo) area normalization.
inline std::vector<std::vector<double>> mel_filterbank(std::size_t n_mels, std::size_t n_fft, double rate,
                                                       double f_lo, double f_hi, std::vector<double>* centers) {
  std::vector<double> edge(n_mels + 2);
  for (std::size_t i = 0; i < edge.size(); ++i) {
    edge[i] = htk_hz(htk_mel(f_lo) + (htk_mel(f_hi) - htk_mel(f_lo)) * static_cast<double>(i) /
                                         static_cast<double>(n_mels + 1));
  }
  std::vector<std::vector<double>> fb(n_mels, std::vector<double>(n_fft / 2 + 1, 0.0));
  for (std::size_t m = 0; m < n_mels; ++m) {
    for (std::size_t k = 0; k <= n_fft / 2; ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(n_fft);
      double w = 0.0;
      if (f > edge[m] && f <= edge[m + 1]) w = (f - edge[m]) / (edge[m + 1] - edge[m]);
      if (f > edge[m + 1] && f < edge[m + 2]) w = (edge[m + 2] - f) / (edge[m + 2] - edge[m + 1]);
      fb[m][k] = w * 2.0 / (edge[m + 2] - edge[m]);
    }
  }
  if (centers) centers->assign(edge.begin() + 1, edge.end() - 1);
  return fb;
}

// Log-mel energies of one frame starting at `start`: periodic Hann window,
// direct DFT power, filterbank, log(e + floor).
inline std::vector<double> log_mel_frame(const std::vector<double>& x, std::size_t start, std::size_t n_fft,
                                         const std::vector<std::vector<double>>& fb, double floor) {
  std::vector<double> power(n_fft / 2 + 1);
  for (std::size_t k = 0; k <= n_fft / 2; ++k) {
    cd s = 0.0;
    for (std::size_t t = 0; t < n_fft; ++t) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n_fft));
      s += x[start + t] * w *
           std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n_fft) / static_cast<double>(n_fft));
    }
    power[k] = std::norm(s);
  }
  std::vector<double> out(fb.size());
  for (std::size_t m = 0; m < fb.size(); ++m) {
    double e = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) e += fb[m][k] * power[k];
    out[m] = std::log(e + floor);
  }
  return out;
}

// Adam with bias correction and decoupled weight decay, one scalar.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double w, double g, double lr, double b1, double b2, double eps, double wd) {
    ++t;
    w -= lr * wd * w;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mh = m / (1.0 - std::pow(b1, t));
    const double vh = v / (1.0 - std::pow(b2, t));
    return w - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace oracle
