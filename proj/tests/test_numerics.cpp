#include <doctest.h>

#include <cmath>
#include <numbers>

#include "addn/adam.hpp"
#include "addn/error.hpp"
#include "addn/gradcheck.hpp"
#include "addn/ops.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace addn;
using testing::max_abs_diff;
using testing::passes_fd;
using testing::random_tensor;
using testing::weighted_sum;


TEST_CASE("matmul identity, small product and triple-loop oracle") {
  const Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  const Tensor m = Tensor::from_data({2, 2}, {2, 3, 4, 5});
  CHECK(matmul(eye, m).to_vector() == std::vector<double>{2, 3, 4, 5});
  CHECK(matmul(Tensor::from_data({1, 2}, {1, 2}), Tensor::from_data({2, 1}, {3, 4})).item() == 11.0);

  const Tensor a = random_tensor({3, 4}, 1), b = random_tensor({4, 2}, 2);
  const auto expect = oracle::matmul(a.to_vector(), b.to_vector(), 3, 4, 2);
  CHECK(max_abs_diff(matmul(a, b).data(), expect) < 1e-12);
}

TEST_CASE("matmul rejects mismatched inner extents and names both shapes") {
  try {
    matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("matmul gradient contract") {
  passes_fd("matmul", {random_tensor({3, 4}, 3), random_tensor({4, 5}, 4)},
            [](const std::vector<Tensor>& in) { return weighted_sum(matmul(in[0], in[1]), 5); });
}

TEST_CASE("softmax values, row sums and shift invariance") {
  CHECK(max_abs_diff(softmax(Tensor::from_data({1, 3}, {0, 0, 0}), 1).data(),
                     std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) < 1e-15);
  CHECK(max_abs_diff(softmax(Tensor::from_data({1, 2}, {0, std::log(3.0)}), 1).data(),
                     std::vector<double>{0.25, 0.75}) < 1e-15);

  const Tensor x = random_tensor({4, 7}, 6, 3.0);
  const Tensor y = softmax(x, 1);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
      CHECK(y.at(r, c) > 0.0);
      CHECK(y.at(r, c) < 1.0);
      s += y.at(r, c);
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK(max_abs_diff(softmax(add_scalar(x, 123.456), 1).data(), y.data()) < 1e-12);

  const Tensor cols = softmax(x, 0);
  for (std::size_t c = 0; c < 7; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 4; ++r) s += cols.at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(softmax(x, 2), DimensionError);
  passes_fd("softmax", {random_tensor({3, 5}, 7)},
            [](const std::vector<Tensor>& in) { return weighted_sum(softmax(in[0], 1), 8); });
}

TEST_CASE("layer_norm examples and gradient") {
  const Tensor one = Tensor::full({3}, 1.0), zero = Tensor::zeros({3});
  CHECK(max_abs_diff(layer_norm(Tensor::full({1, 3}, 4.2), one, zero).data(), std::vector<double>(3, 0.0)) == 0.0);
  const Tensor g2 = Tensor::full({2}, 1.0), b2 = Tensor::zeros({2});
  CHECK(max_abs_diff(layer_norm(Tensor::from_data({1, 2}, {-1, 1}), g2, b2, 1e-14).data(),
                     std::vector<double>{-1, 1}) < 1e-12);
  CHECK_THROWS_AS(layer_norm(Tensor::zeros({2, 3}), g2, b2), DimensionError);
  CHECK_THROWS_AS(layer_norm(Tensor::zeros({2, 2}), g2, b2, 0.0), ContractError);
  passes_fd("layer_norm", {random_tensor({2, 5}, 9), random_tensor({5}, 10), random_tensor({5}, 11)},
            [](const std::vector<Tensor>& in) { return weighted_sum(layer_norm(in[0], in[1], in[2]), 12); });
}

TEST_CASE("swish_glu zero input, scalar chain and gradient") {
  const Tensor w1 = random_tensor({4, 6}, 13), w2 = random_tensor({4, 6}, 14), w3 = random_tensor({6, 4}, 15);
  CHECK(max_abs_diff(swish_glu(Tensor::zeros({2, 4}), w1, w2, w3).data(), std::vector<double>(8, 0.0)) == 0.0);
  const Tensor unit = Tensor::from_data({1, 1}, {1.0});
  CHECK(std::abs(swish_glu(unit, unit, unit, unit).item() - 1.0 / (1.0 + std::exp(-1.0))) < 1e-15);
  CHECK(std::abs(swish_glu(unit, unit, unit, unit).item() - 0.731059) < 1e-6);
  CHECK_THROWS_AS(swish_glu(Tensor::zeros({2, 4}), w1, random_tensor({4, 5}, 1), w3), DimensionError);
  passes_fd("swish_glu",
            {random_tensor({2, 4}, 16), random_tensor({4, 6}, 17, 0.5), random_tensor({4, 6}, 18, 0.5),
             random_tensor({6, 4}, 19, 0.5)},
            [](const std::vector<Tensor>& in) { return weighted_sum(swish_glu(in[0], in[1], in[2], in[3]), 20); });
}

TEST_CASE("fft2 of a constant is a DC spike") {
  const Tensor x = Tensor::full({5, 3}, 2.5);
  const ComplexTensor s = fft2(x);
  CHECK(std::abs(s.re[0] - 2.5 * 15) < 1e-12);
  for (std::size_t i = 1; i < 15; ++i) {
    CHECK(std::abs(s.re[i]) < 1e-12);
    CHECK(std::abs(s.im[i]) < 1e-12);
  }
}

TEST_CASE("fft2 matches the quadruple-loop DFT oracle up to 8x8") {
  for (auto [t, f] : {std::pair{4, 4}, {8, 8}, {3, 5}, {7, 6}, {1, 8}}) {
    const Tensor x = random_tensor({std::size_t(t), std::size_t(f)}, 100 + t * 10 + f);
    const ComplexTensor s = fft2(x);
    const auto expect = oracle::dft2_real(x.to_vector(), t, f);
    double err = 0.0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
      err = std::max(err, std::abs(std::complex<double>(s.re[i], s.im[i]) - expect[i]));
    }
    INFO(t << "x" << f);
    CHECK(err < 1e-9);
  }
}

TEST_CASE("Parseval on 8x8") {
  const Tensor x = random_tensor({8, 8}, 21);
  const ComplexTensor s = fft2(x);
  double lhs = 0.0, rhs = 0.0;
  for (double v : x.data()) lhs += v * v;
  for (std::size_t i = 0; i < 64; ++i) rhs += s.re[i] * s.re[i] + s.im[i] * s.im[i];
  CHECK(std::abs(lhs - rhs / 64.0) / lhs < 1e-9);
}

TEST_CASE("ifft2 roundtrip, zero spectrum and non-Hermitian rejection") {
  for (auto [t, f] : {std::pair{6, 5}, {64, 64}, {249, 64}, {17, 13}}) {
    const Tensor x = random_tensor({std::size_t(t), std::size_t(f)}, 22 + t);
    INFO(t << "x" << f);
    CHECK(max_abs_diff(ifft2(fft2(x)).data(), x.data()) < 1e-9);
  }
  const ComplexTensor zero{Tensor::zeros({4, 3}), Tensor::zeros({4, 3})};
  CHECK(max_abs_diff(ifft2(zero).data(), std::vector<double>(12, 0.0)) == 0.0);
  const ComplexTensor skewed{random_tensor({4, 3}, 23), random_tensor({4, 3}, 24)};
  CHECK_THROWS_AS(ifft2(skewed), NumericError);
  CHECK_NOTHROW(ifft2(skewed, false));
}

TEST_CASE("gradient through fft2 -> mask -> ifft2") {
  passes_fd("spectral", {random_tensor({6, 5}, 25), random_tensor({6, 5}, 26)},
            [](const std::vector<Tensor>& in) {
              const ComplexTensor s = fft2(in[0]);
              return weighted_sum(ifft2({mul(in[1], s.re), mul(in[1], s.im)}, false), 27);
            });
}

TEST_CASE("soft_shrink values, dead zone and identity at alpha 0") {
  CHECK(std::abs(soft_shrink(Tensor::scalar(0.05), 0.02).item() - 0.03) < 1e-15);
  CHECK(soft_shrink(Tensor::scalar(-0.01), 0.02).item() == 0.0);
  CHECK(soft_shrink(Tensor::scalar(0.02), 0.02).item() == 0.0);
  const Tensor x = random_tensor({50}, 28, 0.05);
  CHECK(soft_shrink(x, 0.0).to_vector() == x.to_vector());
  const Tensor y = soft_shrink(x, 0.02);
  for (std::size_t i = 0; i < 50; ++i) {
    if (std::abs(x[i]) <= 0.02) {
      CHECK(y[i] == 0.0);
    } else {
      CHECK(std::abs(std::abs(y[i]) - (std::abs(x[i]) - 0.02)) < 1e-15);
      CHECK(std::signbit(y[i]) == std::signbit(x[i]));
    }
  }
  CHECK_THROWS_AS(soft_shrink(x, -0.1), ContractError);

  // subgradient: 1 outside the dead zone, 0 inside and on the boundary
  const Tensor probe = Tensor::from_data({3}, {0.5, 0.01, 0.02}, true);
  sum(soft_shrink(probe, 0.02)).backward();
  CHECK(probe.grad()[0] == 1.0);
  CHECK(probe.grad()[1] == 0.0);
  CHECK(probe.grad()[2] == 0.0);
}

TEST_CASE("backward on linear and quadratic losses, accumulation and reachability") {
  const Tensor w = random_tensor({3, 4}, 29, 1.0, true);
  sum(w).backward();
  for (double g : w.grad()) CHECK(g == 1.0);

  const Tensor q = random_tensor({2, 3}, 30, 1.0, true);
  sum(mul(q, q)).backward();
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(q.grad()[i] - 2.0 * q[i]) < 1e-15);

  // used twice: gradients add
  const Tensor a = Tensor::from_data({2}, {1.0, 2.0}, true);
  const Tensor unused = Tensor::from_data({2}, {5.0, 6.0}, true);
  sum(add(a, a)).backward();
  CHECK(a.grad()[0] == 2.0);
  CHECK(unused.grad()[0] == 0.0);
  CHECK(unused.grad()[1] == 0.0);

  CHECK_THROWS_AS(random_tensor({2, 2}, 31, 1.0, true).backward(), ContractError);
}

TEST_CASE("non-finite values are rejected") {
  CHECK_THROWS_AS(Tensor::from_data({1}, {std::nan("")}), NumericError);
  CHECK_THROWS_AS(scale(Tensor::scalar(1e300), 1e300), NumericError);
}

TEST_CASE("Adam first step, fixed point and scripted recurrence") {
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  {
    Tensor w = Tensor::scalar(1.0);
    std::vector<Tensor> params{w};
    AdamState st;
    std::vector<std::vector<double>> g{{0.37}};
    adam_step(params, g, st, cfg);
    CHECK(std::abs((w.item() - 1.0) - (-cfg.lr * 0.37 / (0.37 + cfg.eps))) < 1e-15);
    CHECK(std::abs(w.item() - (1.0 - cfg.lr)) < 1e-9);
    CHECK(st.step == 1);
  }
  {
    Tensor w = Tensor::from_data({3}, {1.0, -2.0, 0.5});
    std::vector<Tensor> params{w};
    AdamState st;
    std::vector<std::vector<double>> g{{0.0, 0.0, 0.0}};
    for (int i = 0; i < 10; ++i) adam_step(params, g, st, cfg);
    CHECK(w.to_vector() == std::vector<double>{1.0, -2.0, 0.5});
    for (const auto& v : st.v)
      for (double x : v) CHECK(x >= 0.0);
  }
  {
    AdamConfig c;
    c.lr = 0.1;
    c.weight_decay = 0.0;
    Tensor w = Tensor::scalar(0.0);
    std::vector<Tensor> params{w};
    AdamState st;
    oracle::ScalarAdam ref;
    double wr = 0.0, prev_gap = 3.0;
    for (int i = 0; i < 100; ++i) {
      std::vector<std::vector<double>> g{{2.0 * (w.item() - 3.0)}};
      wr = ref.step(wr, 2.0 * (wr - 3.0), c.lr, c.beta1, c.beta2, c.eps, c.weight_decay);
      adam_step(params, g, st, c);
      CHECK(std::abs(w.item() - wr) < 1e-12);
      if (i < 25) {
        CHECK(std::abs(w.item() - 3.0) < prev_gap);
        prev_gap = std::abs(w.item() - 3.0);
      }
    }
    CHECK(std::abs(w.item() - 3.0) < 0.5);
  }
  {
    // decoupled decay with a zero gradient shrinks the weight by (1 - lr*wd)
    AdamConfig c;
    c.lr = 0.01;
    c.weight_decay = 0.1;
    Tensor w = Tensor::scalar(2.0);
    std::vector<Tensor> params{w};
    AdamState st;
    std::vector<std::vector<double>> g{{0.0}};
    adam_step(params, g, st, c);
    CHECK(std::abs(w.item() - 2.0 * (1.0 - 0.001)) < 1e-15);
  }
  {
    Tensor w = Tensor::zeros({2});
    std::vector<Tensor> params{w};
    AdamState st;
    std::vector<std::vector<double>> g{{1.0}};
    CHECK_THROWS_AS(adam_step(params, g, st, cfg), DimensionError);
  }
}
