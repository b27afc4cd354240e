#include <cmath>
#include <random>

#include "doctest.h"
#include "lite/errors.hpp"
#include "lite/numcore/adam.hpp"
#include "lite/numcore/functional.hpp"
#include "lite/numcore/grad_check.hpp"
#include "lite/numcore/kernels.hpp"
#include "lite/numcore/ops.hpp"
#include "test_util.hpp"

using namespace lite;
using lite::test::random_tensor;
using kernels::FlopScope;
using kernels::gemm;

namespace {

Tensor loop_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  Tensor c = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t p = 0; p < k; ++p) s += double(a.at(i, p)) * b.at(p, j);
      c.at(i, j) = float(s);
    }
  return c;
}

// Scalar-sum objective with fixed random weights so every output coordinate
// gets a distinct upstream gradient.
Var probe(Tape<double>& t, Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> w(t.value(y).size());
  for (auto& v : w) v = dist(rng);
  return ops::dot_with(t, y, std::move(w));
}

}  // namespace

TEST_CASE("tensor construction validates element count") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<float>(5)), DimensionError);
  const Tensor t = Tensor::filled({2, 3}, 1.5f);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.at(1, 2) == 1.5f);
}

TEST_CASE("matmul matches triple loop") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t m = 1 + seed % 7, k = 3 + seed % 5, n = 2 + seed % 9;
    const Tensor a = random_tensor({m, k}, seed);
    const Tensor b = random_tensor({k, n}, seed + 100);
    const Tensor got = matmul(a, b);
    const Tensor want = loop_matmul(a, b);
    for (std::size_t i = 0; i < got.numel(); ++i) CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-5));
  }
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2})), DimensionError);
}

TEST_CASE("gemm transposes and flop count") {
  const Tensor a = random_tensor({4, 3}, 1);
  const Tensor b = random_tensor({5, 4}, 2);
  std::vector<float> c(3 * 5);
  FlopScope scope;
  gemm<float>(true, true, 3, 5, 4, a.data.data(), b.data.data(), c.data(), false);
  CHECK(scope.count() == 2u * 3 * 5 * 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t p = 0; p < 4; ++p) s += double(a.at(p, i)) * b.at(j, p);
      CHECK(c[i * 5 + j] == doctest::Approx(s).epsilon(1e-5));
    }
}

TEST_CASE("softmax matches exp-normalize") {
  const Tensor x = random_tensor({6, 11}, 3, 4.0f);
  const Tensor p = softmax(x);
  for (std::size_t r = 0; r < 6; ++r) {
    double mx = -1e30, z = 0;
    for (std::size_t c = 0; c < 11; ++c) mx = std::max(mx, double(x.at(r, c)));
    for (std::size_t c = 0; c < 11; ++c) z += std::exp(double(x.at(r, c)) - mx);
    double sum = 0;
    for (std::size_t c = 0; c < 11; ++c) {
      CHECK(p.at(r, c) == doctest::Approx(std::exp(double(x.at(r, c)) - mx) / z).epsilon(1e-6));
      sum += p.at(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("softmax is stable for large logits") {
  const Tensor p = softmax(Tensor({1, 3}, {1000.0f, 1000.0f, -1000.0f}));
  CHECK(p.data[0] == doctest::Approx(0.5));
  CHECK(p.data[2] == 0.0f);
}

TEST_CASE("rms_norm matches scalar loop") {
  const Tensor x = random_tensor({5, 7}, 4);
  const Tensor g = random_tensor({7}, 5);
  const Tensor y = rms_norm(x, g);
  for (std::size_t r = 0; r < 5; ++r) {
    double ms = 0;
    for (std::size_t c = 0; c < 7; ++c) ms += double(x.at(r, c)) * x.at(r, c);
    const double inv = 1.0 / std::sqrt(ms / 7 + ops::kRmsNormEps);
    for (std::size_t c = 0; c < 7; ++c) {
      CHECK(y.at(r, c) == doctest::Approx(x.at(r, c) * inv * g.data[c]).epsilon(1e-5));
    }
  }
}

TEST_CASE("rms_norm of a zero row stays zero") {
  const Tensor y = rms_norm(Tensor::zeros({1, 4}), Tensor::filled({4}, 1.0f));
  for (float v : y.data) CHECK(v == 0.0f);
}

TEST_CASE("cross_entropy matches per-position oracle") {
  const Tensor logits = random_tensor({6, 9}, 6, 2.0f);
  const std::vector<int> targets{0, 3, 8, 2, 5, 1};
  const ops::Mask mask{1, 0, 1, 1, 0, 1};
  double sum = 0;
  int n = 0;
  for (std::size_t r = 0; r < 6; ++r) {
    if (!mask[r]) continue;
    double mx = -1e30, z = 0;
    for (std::size_t c = 0; c < 9; ++c) mx = std::max(mx, double(logits.at(r, c)));
    for (std::size_t c = 0; c < 9; ++c) z += std::exp(double(logits.at(r, c)) - mx);
    sum += -(double(logits.at(r, std::size_t(targets[r]))) - mx - std::log(z));
    ++n;
  }
  CHECK(cross_entropy(logits, targets, mask) == doctest::Approx(sum / n).epsilon(1e-5));
}

TEST_CASE("cross_entropy edge cases") {
  const Tensor logits = random_tensor({2, 4}, 7);
  CHECK(cross_entropy(logits, std::vector<int>{1, 2}, ops::Mask{0, 0}) == 0.0f);
  CHECK_THROWS_AS(cross_entropy(logits, std::vector<int>{1, 9}, ops::Mask{1, 1}), IndexError);
  Tensor sharp = Tensor::filled({1, 4}, -100.0f);
  sharp.data[2] = 100.0f;
  CHECK(cross_entropy(sharp, std::vector<int>{2}, ops::Mask{1}) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("weighted_mean rejects bad weights") {
  Tape<double> t(false);
  const Var a = t.constant({1}, {2.0});
  const Var b = t.constant({1}, {4.0});
  const std::vector<Var> terms{a, b};
  CHECK(t.scalar(ops::weighted_mean(t, terms, std::vector<double>{1.0, 3.0})) == doctest::Approx(3.5));
  CHECK_THROWS_AS(ops::weighted_mean(t, terms, std::vector<double>{0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(ops::weighted_mean(t, terms, std::vector<double>{-1.0, 2.0}), ConfigError);
}

TEST_CASE("grad_check on individual ops") {
  GradCheckOptions opt;
  SUBCASE("matmul") {
    const std::vector<Tensor> ps{random_tensor({3, 4}, 1), random_tensor({4, 5}, 2)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) { return probe(t, ops::matmul(t, v[0], v[1]), 9); },
        ps, opt);
    CHECK(r.max_relative_error < 1e-6);
  }
  SUBCASE("rms_norm") {
    const std::vector<Tensor> ps{random_tensor({3, 6}, 3), random_tensor({6}, 4)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) { return probe(t, ops::rms_norm(t, v[0], v[1]), 9); },
        ps, opt);
    CHECK(r.max_relative_error < 1e-4);
  }
  SUBCASE("gelu") {
    const std::vector<Tensor> ps{random_tensor({4, 5}, 5, 2.0f)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) { return probe(t, ops::gelu(t, v[0]), 9); }, ps, opt);
    CHECK(r.max_relative_error < 1e-4);
  }
  SUBCASE("softmax") {
    const std::vector<Tensor> ps{random_tensor({3, 7}, 6)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) { return probe(t, ops::softmax(t, v[0]), 9); }, ps, opt);
    CHECK(r.max_relative_error < 1e-5);
  }
  SUBCASE("causal attention") {
    const std::vector<Tensor> ps{random_tensor({2 * 5, 3 * 8}, 7)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) {
          return probe(t, ops::causal_attention(t, v[0], 2, 5, 2), 9);
        },
        ps, opt);
    CHECK(r.max_relative_error < 1e-5);
  }
  SUBCASE("embedding, take_rows and add") {
    const std::vector<Tensor> ps{random_tensor({6, 4}, 8), random_tensor({3, 4}, 9)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) {
          const std::vector<int> ids{1, 5, 1};
          const std::vector<std::size_t> rows{2, 0};
          const Var e = ops::add(t, ops::embedding(t, v[0], ids), v[1]);
          return probe(t, ops::take_rows(t, e, rows), 9);
        },
        ps, opt);
    CHECK(r.max_relative_error < 1e-6);
  }
  SUBCASE("cross_entropy and weighted_mean") {
    const std::vector<Tensor> ps{random_tensor({4, 6}, 10), random_tensor({4, 6}, 11)};
    const auto r = grad_check(
        [](Tape<double>& t, std::span<const Var> v) {
          const std::vector<int> tg{1, 0, 5, 3};
          const ops::Mask m{1, 1, 0, 1};
          const std::vector<Var> terms{ops::cross_entropy(t, v[0], tg, m),
                                       ops::cross_entropy(t, v[1], tg, m)};
          return ops::weighted_mean(t, terms, std::vector<double>{1.0, 2.0});
        },
        ps, opt);
    CHECK(r.max_relative_error < 1e-5);
  }
}

TEST_CASE("causal attention ignores future positions") {
  Tensor qkv = random_tensor({6, 12}, 12);
  Tape<float> t1(false);
  const Tensor a = to_tensor(t1, ops::causal_attention(t1, t1.constant(qkv), 1, 6, 2));
  for (std::size_t c = 0; c < 12; ++c) qkv.at(5, c) += 3.0f;
  Tape<float> t2(false);
  const Tensor b = to_tensor(t2, ops::causal_attention(t2, t2.constant(qkv), 1, 6, 2));
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(a.at(r, c) == b.at(r, c));
}

TEST_CASE("backward requires a recording tape") {
  Tape<float> t(false);
  const Var x = t.constant({1}, {1.0f});
  CHECK_THROWS_AS(t.backward(x), Error);
}

TEST_CASE("adam matches hand formula") {
  Tensor p({2}, {1.0f, -2.0f});
  p.grad = std::vector<float>{0.5f, -1.0f};
  AdamState adam;
  Tensor* ps[] = {&p};
  adam.step(ps, 0.1);
  // First step: m_hat = g, v_hat = g^2, update = lr * g / (|g| + eps).
  CHECK(p.data[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-6));
  CHECK(p.data[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));
  CHECK(adam.steps() == 1);
}

TEST_CASE("adam with zero learning rate leaves parameters unchanged") {
  Tensor p = random_tensor({3, 3}, 13);
  const auto before = p.data;
  p.grad = random_tensor({3, 3}, 14).data;
  AdamState adam;
  Tensor* ps[] = {&p};
  adam.step(ps, 0.0);
  CHECK(p.data == before);
}
