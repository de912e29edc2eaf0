#include "addn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "addn/error.hpp"
#include "addn/fft.hpp"

namespace addn {

using detail::accumulate;
using detail::make_result;
using Values = std::vector<double>;

namespace {

// C[m x n] += A[m x k] * B[k x n], all row-major. Four rows of A share
// each pass over a row of B.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  if (n == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = a + i * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * b[p];
      c[i] += s;
    }
    return;
  }
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* __restrict c0 = c + i * n;
    double* __restrict c1 = c0 + n;
    double* __restrict c2 = c1 + n;
    double* __restrict c3 = c2 + n;
    const double* a0 = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v0 = a0[p], v1 = a0[k + p], v2 = a0[2 * k + p], v3 = a0[3 * k + p];
      const double* __restrict brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    double* __restrict crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* __restrict brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[k x n] += A[m x k]^T * B[m x n]. Four rows of A and B are folded into
// each pass over a row of C.
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + i * k;
    const double* __restrict b0 = b + i * n;
    const double* __restrict b1 = b0 + n;
    const double* __restrict b2 = b1 + n;
    const double* __restrict b3 = b2 + n;
    for (std::size_t p = 0; p < k; ++p) {
      const double v0 = a0[p], v1 = a0[k + p], v2 = a0[2 * k + p], v3 = a0[3 * k + p];
      double* __restrict crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += v0 * b0[j] + v1 * b1[j] + v2 * b2[j] + v3 * b3[j];
    }
  }
  for (; i < m; ++i) {
    const double* arow = a + i * k;
    const double* __restrict brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      double* __restrict crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Values transposed(std::span<const double> x, std::size_t rows, std::size_t cols) {
  Values t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = x[r * cols + c];
  }
  return t;
}

void require_matrix(const Tensor& x, const char* op) {
  if (x.dim() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(x.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  auto xs = x.data();
  Values out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = fwd(xs[i]);
  auto xdata = x.node()->data;
  auto ydata = std::make_shared<Values>(out);
  return make_result(op, x.shape(), std::move(out), {x}, [x, xdata, ydata, deriv](const Values& g) {
    accumulate(x, [&](Values& gx) {
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv((*xdata)[i], (*ydata)[i]);
    });
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner extents disagree for " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  Values out(m * n, 0.0);
  gemm_acc(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [a, b, m, k, n](const Values& g) {
    accumulate(a, [&](Values& ga) {
      const Values bt = transposed(b.data(), k, n);
      gemm_acc(g.data(), bt.data(), ga.data(), m, n, k);
    });
    accumulate(b, [&](Values& gb) { gemm_tn_acc(a.data().data(), g.data(), gb.data(), m, k, n); });
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner extents disagree for " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + "^T");
  }
  const Values bt = transposed(b.data(), n, k);
  Values out(m * n, 0.0);
  gemm_acc(a.data().data(), bt.data(), out.data(), m, k, n);
  return make_result("matmul_nt", {m, n}, std::move(out), {a, b}, [a, b, m, k, n](const Values& g) {
    // C = A B^T: dA = dC B, dB = dC^T A
    accumulate(a, [&](Values& ga) { gemm_acc(g.data(), b.data().data(), ga.data(), m, n, k); });
    accumulate(b, [&](Values& gb) { gemm_tn_acc(g.data(), a.data().data(), gb.data(), m, n, k); });
  });
}

Tensor transpose(const Tensor& x) {
  require_matrix(x, "transpose");
  const std::size_t r = x.rows(), c = x.cols();
  return make_result("transpose", {c, r}, transposed(x.data(), r, c), {x}, [x, r, c](const Values& g) {
    accumulate(x, [&](Values& gx) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
      }
    });
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor y = matmul(x, w);
  return b.defined() ? add_bias(y, b) : y;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto as = a.data(), bs = b.data();
  Values out(as.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] + bs[i];
  return make_result("add", a.shape(), std::move(out), {a, b}, [a, b](const Values& g) {
    accumulate(a, [&](Values& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
    accumulate(b, [&](Values& gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i]; });
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto as = a.data(), bs = b.data();
  Values out(as.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] - bs[i];
  return make_result("sub", a.shape(), std::move(out), {a, b}, [a, b](const Values& g) {
    accumulate(a, [&](Values& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
    accumulate(b, [&](Values& gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i]; });
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto as = a.data(), bs = b.data();
  Values out(as.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as[i] * bs[i];
  return make_result("mul", a.shape(), std::move(out), {a, b}, [a, b](const Values& g) {
    accumulate(a, [&](Values& ga) {
      auto bs = b.data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bs[i];
    });
    accumulate(b, [&](Values& gb) {
      auto as = a.data();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * as[i];
    });
  });
}

Tensor scale(const Tensor& x, double factor) {
  auto xs = x.data();
  Values out(xs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xs[i] * factor;
  return make_result("scale", x.shape(), std::move(out), {x}, [x, factor](const Values& g) {
    accumulate(x, [&](Values& gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor; });
  });
}

Tensor add_scalar(const Tensor& x, double offset) {
  auto xs = x.data();
  Values out(xs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xs[i] + offset;
  return make_result("add_scalar", x.shape(), std::move(out), {x}, [x](const Values& g) {
    accumulate(x, [&](Values& gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
  });
}

Tensor mul_scalar(const Tensor& x, const Tensor& s) {
  if (s.numel() != 1) throw DimensionError("mul_scalar: scale must have one element, got " + shape_str(s.shape()));
  const double sv = s.item();
  auto xs = x.data();
  Values out(xs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xs[i] * sv;
  return make_result("mul_scalar", x.shape(), std::move(out), {x, s}, [x, s, sv](const Values& g) {
    accumulate(x, [&](Values& gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * sv; });
    accumulate(s, [&](Values& gs) {
      auto xs = x.data();
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xs[i];
      gs[0] += acc;
    });
  });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
  const std::size_t d = b.numel();
  if (x.shape().back() != d) {
    throw DimensionError("add_bias: bias " + shape_str(b.shape()) + " does not match last axis of " +
                         shape_str(x.shape()));
  }
  auto xs = x.data(), bs = b.data();
  Values out(xs.size());
  for (std::size_t r = 0; r < out.size(); r += d) {
    for (std::size_t j = 0; j < d; ++j) out[r + j] = xs[r + j] + bs[j];
  }
  return make_result("add_bias", x.shape(), std::move(out), {x, b}, [x, b, d](const Values& g) {
    accumulate(x, [&](Values& gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
    accumulate(b, [&](Values& gb) {
      for (std::size_t i = 0; i < g.size(); i += d) {
        for (std::size_t j = 0; j < d; ++j) gb[j] += g[i + j];
      }
    });
  });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor swish(const Tensor& x) {
  return unary(
      "swish", x, [](double v) { return v / (1.0 + std::exp(-v)); },
      [](double v, double) {
        const double s = 1.0 / (1.0 + std::exp(-v));
        return s * (1.0 + v * (1.0 - s));
      });
}

Tensor soft_shrink(const Tensor& x, double alpha) {
  if (!(alpha >= 0.0)) throw ContractError("soft_shrink: alpha must be non-negative, got " + std::to_string(alpha));
  return unary(
      "soft_shrink", x,
      [alpha](double v) {
        if (v > alpha) return v - alpha;
        if (v < -alpha) return v + alpha;
        return 0.0;
      },
      [alpha](double v, double) { return std::abs(v) > alpha ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const Shape& shape = x.shape();
  if (axis >= shape.size()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " + shape_str(shape));
  }
  const std::size_t len = shape[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t outer = x.numel() / (len * inner);

  auto xs = x.data();
  Values out(xs.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = xs[base];
      for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, xs[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double e = std::exp(xs[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= total;
    }
  }
  auto ydata = std::make_shared<Values>(out);
  return make_result("softmax", shape, std::move(out), {x}, [x, ydata, len, inner, outer](const Values& g) {
    accumulate(x, [&](Values& gx) {
      const Values& y = *ydata;
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * len * inner + in;
          double dot = 0.0;
          for (std::size_t j = 0; j < len; ++j) dot += g[base + j * inner] * y[base + j * inner];
          for (std::size_t j = 0; j < len; ++j) {
            const std::size_t idx = base + j * inner;
            gx[idx] += y[idx] * (g[idx] - dot);
          }
        }
      }
    });
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (!(eps > 0.0)) throw ContractError("layer_norm: eps must be positive");
  const std::size_t d = x.shape().back();
  if (gamma.numel() != d || beta.numel() != d) {
    throw DimensionError("layer_norm: affine " + shape_str(gamma.shape()) + "/" + shape_str(beta.shape()) +
                         " does not match last axis of " + shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  auto xs = x.data(), gs = gamma.data(), bs = beta.data();
  auto xhat = std::make_shared<Values>(xs.size());
  auto rstd = std::make_shared<Values>(rows);
  Values out(xs.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xs.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mean) * rs;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gs[j] + bs[j];
    }
  }
  return make_result("layer_norm", x.shape(), std::move(out), {x, gamma, beta},
                     [x, gamma, beta, xhat, rstd, rows, d](const Values& g) {
                       accumulate(x, [&](Values& gx) {
                         auto gs = gamma.data();
                         for (std::size_t r = 0; r < rows; ++r) {
                           double mean_dh = 0.0, mean_dh_h = 0.0;
                           for (std::size_t j = 0; j < d; ++j) {
                             const double dh = g[r * d + j] * gs[j];
                             mean_dh += dh;
                             mean_dh_h += dh * (*xhat)[r * d + j];
                           }
                           mean_dh /= static_cast<double>(d);
                           mean_dh_h /= static_cast<double>(d);
                           for (std::size_t j = 0; j < d; ++j) {
                             const double dh = g[r * d + j] * gs[j];
                             gx[r * d + j] += (*rstd)[r] * (dh - mean_dh - (*xhat)[r * d + j] * mean_dh_h);
                           }
                         }
                       });
                       accumulate(gamma, [&](Values& gg) {
                         for (std::size_t i = 0; i < g.size(); ++i) gg[i % d] += g[i] * (*xhat)[i];
                       });
                       accumulate(beta, [&](Values& gb) {
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
                       });
                     });
}

Tensor sum(const Tensor& x) {
  auto xs = x.data();
  const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
  return make_result("sum", {1}, {total}, {x}, [x](const Values& g) {
    accumulate(x, [&](Values& gx) { for (double& v : gx) v += g[0]; });
  });
}

Tensor mean_rows(const Tensor& x) {
  require_matrix(x, "mean_rows");
  const std::size_t n = x.rows(), d = x.cols();
  auto xs = x.data();
  Values out(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) out[j] += xs[r * d + j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
  return make_result("mean_rows", {1, d}, std::move(out), {x}, [x, n, d, inv](const Values& g) {
    accumulate(x, [&](Values& gx) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += g[j] * inv;
      }
    });
  });
}

Tensor soft_cross_entropy(const Tensor& logits, std::span<const double> target) {
  const std::size_t c = logits.numel();
  if (target.size() != c) {
    throw DimensionError("soft_cross_entropy: " + std::to_string(target.size()) + " targets for " +
                         std::to_string(c) + " logits");
  }
  auto zs = logits.data();
  const double mx = *std::max_element(zs.begin(), zs.end());
  double total = 0.0;
  for (double z : zs) total += std::exp(z - mx);
  const double log_norm = mx + std::log(total);
  auto probs = std::make_shared<Values>(c);
  double loss = 0.0, target_mass = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double log_p = zs[i] - log_norm;
    (*probs)[i] = std::exp(log_p);
    loss -= target[i] * log_p;
    target_mass += target[i];
  }
  Values t(target.begin(), target.end());
  return make_result("soft_cross_entropy", {1}, {loss}, {logits},
                     [logits, probs, t = std::move(t), target_mass](const Values& g) {
                       accumulate(logits, [&](Values& gz) {
                         for (std::size_t i = 0; i < t.size(); ++i) {
                           gz[i] += g[0] * (target_mass * (*probs)[i] - t[i]);
                         }
                       });
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  return make_result("reshape", std::move(shape), x.to_vector(), {x}, [x](const Values& g) {
    accumulate(x, [&](Values& gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_cols");
  const std::size_t n = x.rows(), d = x.cols();
  if (begin >= end || end > d) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + shape_str(x.shape()));
  }
  const std::size_t w = end - begin;
  auto xs = x.data();
  Values out(n * w);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(xs.data() + r * d + begin, w, out.data() + r * w);
  }
  return make_result("slice_cols", {n, w}, std::move(out), {x}, [x, n, d, w, begin](const Values& g) {
    accumulate(x, [&](Values& gx) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < w; ++j) gx[r * d + begin + j] += g[r * w + j];
      }
    });
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts.front().rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != n) {
      throw DimensionError("concat_cols: row count mismatch " + shape_str(parts.front().shape()) + " vs " +
                           shape_str(p.shape()));
    }
    offsets.push_back(total);
    total += p.cols();
  }
  Values out(n * total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto ps = parts[k].data();
    const std::size_t w = parts[k].cols();
    for (std::size_t r = 0; r < n; ++r) std::copy_n(ps.data() + r * w, w, out.data() + r * total + offsets[k]);
  }
  return make_result("concat_cols", {n, total}, std::move(out), parts,
                     [parts, offsets, n, total](const Values& g) {
                       for (std::size_t k = 0; k < parts.size(); ++k) {
                         const std::size_t w = parts[k].cols();
                         accumulate(parts[k], [&](Values& gp) {
                           for (std::size_t r = 0; r < n; ++r) {
                             for (std::size_t j = 0; j < w; ++j) gp[r * w + j] += g[r * total + offsets[k] + j];
                           }
                         });
                       }
                     });
}

Tensor element(const Tensor& x, std::size_t index) {
  if (index >= x.numel()) {
    throw DimensionError("element: index " + std::to_string(index) + " out of range for " + shape_str(x.shape()));
  }
  return make_result("element", {1}, {x.data()[index]}, {x}, [x, index](const Values& g) {
    accumulate(x, [&](Values& gx) { gx[index] += g[0]; });
  });
}

Tensor patchify(const Tensor& x, std::size_t patch_rows, std::size_t patch_cols) {
  require_matrix(x, "patchify");
  if (patch_rows == 0 || patch_cols == 0) throw DimensionError("patchify: patch extents must be positive");
  const std::size_t t = x.rows(), f = x.cols();
  const std::size_t grid_r = (t + patch_rows - 1) / patch_rows;
  const std::size_t grid_c = (f + patch_cols - 1) / patch_cols;
  const std::size_t width = patch_rows * patch_cols;
  const std::size_t count = grid_r * grid_c;
  // index[i] = source offset of patch entry i, or npos for zero padding
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  auto index = std::make_shared<std::vector<std::size_t>>(count * width, npos);
  for (std::size_t gr = 0; gr < grid_r; ++gr) {
    for (std::size_t gc = 0; gc < grid_c; ++gc) {
      const std::size_t token = gr * grid_c + gc;
      for (std::size_t pr = 0; pr < patch_rows; ++pr) {
        for (std::size_t pc = 0; pc < patch_cols; ++pc) {
          const std::size_t r = gr * patch_rows + pr, c = gc * patch_cols + pc;
          if (r < t && c < f) (*index)[token * width + pr * patch_cols + pc] = r * f + c;
        }
      }
    }
  }
  auto xs = x.data();
  Values out(count * width, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if ((*index)[i] != npos) out[i] = xs[(*index)[i]];
  }
  return make_result("patchify", {count, width}, std::move(out), {x}, [x, index](const Values& g) {
    accumulate(x, [&](Values& gx) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if ((*index)[i] != static_cast<std::size_t>(-1)) gx[(*index)[i]] += g[i];
      }
    });
  });
}

Tensor swish_glu(const Tensor& x, const Tensor& w1, const Tensor& w2, const Tensor& w3) {
  if (w1.shape() != w2.shape()) {
    throw DimensionError("swish_glu: gate and value weights differ: " + shape_str(w1.shape()) + " vs " +
                         shape_str(w2.shape()));
  }
  if (w3.rows() != w1.cols()) {
    throw DimensionError("swish_glu: output weight " + shape_str(w3.shape()) + " does not accept hidden width " +
                         std::to_string(w1.cols()));
  }
  return matmul(mul(swish(matmul(x, w1)), matmul(x, w2)), w3);
}

ComplexTensor fft2(const Tensor& x) {
  require_matrix(x, "fft2");
  const std::size_t t = x.rows(), f = x.cols();
  auto xs = x.data();
  std::vector<fft::Complex> buf(xs.begin(), xs.end());
  fft::transform_2d(buf, t, f, false);
  Values re(buf.size()), im(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    re[i] = buf[i].real();
    im[i] = buf[i].imag();
  }
  // dL/dx = Re(sum_k g_k e^{+i theta}) for the real part, and with g_k -> i*g_k for the imaginary part.
  Tensor re_t = make_result("fft2_re", {t, f}, std::move(re), {x}, [x, t, f](const Values& g) {
    accumulate(x, [&](Values& gx) {
      std::vector<fft::Complex> gb(g.begin(), g.end());
      fft::transform_2d(gb, t, f, true);
      for (std::size_t i = 0; i < gb.size(); ++i) gx[i] += gb[i].real();
    });
  });
  Tensor im_t = make_result("fft2_im", {t, f}, std::move(im), {x}, [x, t, f](const Values& g) {
    accumulate(x, [&](Values& gx) {
      std::vector<fft::Complex> gb(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] = {0.0, g[i]};
      fft::transform_2d(gb, t, f, true);
      for (std::size_t i = 0; i < gb.size(); ++i) gx[i] += gb[i].real();
    });
  });
  return {re_t, im_t};
}

Tensor ifft2(const ComplexTensor& spectrum, bool require_real) {
  require_matrix(spectrum.re, "ifft2");
  if (spectrum.re.shape() != spectrum.im.shape()) {
    throw DimensionError("ifft2: complex parts differ in shape");
  }
  const std::size_t t = spectrum.re.rows(), f = spectrum.re.cols();
  const double inv = 1.0 / static_cast<double>(t * f);
  auto rs = spectrum.re.data(), is = spectrum.im.data();
  std::vector<fft::Complex> buf(rs.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = {rs[i], is[i]};
  fft::transform_2d(buf, t, f, true);
  Values out(buf.size());
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    out[i] = buf[i].real() * inv;
    max_re = std::max(max_re, std::abs(out[i]));
    max_im = std::max(max_im, std::abs(buf[i].imag() * inv));
  }
  if (require_real && max_im > 1e-9 * std::max(1.0, max_re)) {
    throw NumericError("ifft2: imaginary residue " + std::to_string(max_im) +
                       " exceeds tolerance; spectrum is not Hermitian");
  }
  Tensor re = spectrum.re, im = spectrum.im;
  return make_result("ifft2", {t, f}, std::move(out), {re, im}, [re, im, t, f, inv](const Values& g) {
    std::vector<fft::Complex> gb(g.begin(), g.end());
    fft::transform_2d(gb, t, f, false);
    accumulate(re, [&](Values& gr) { for (std::size_t i = 0; i < gb.size(); ++i) gr[i] += gb[i].real() * inv; });
    accumulate(im, [&](Values& gi) { for (std::size_t i = 0; i < gb.size(); ++i) gi[i] += gb[i].imag() * inv; });
  });
}

}  // namespace addn
