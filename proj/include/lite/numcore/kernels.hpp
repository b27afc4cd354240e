#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace lite::kernels {

// ---------------------------------------------------------------------------
// Multiply counter. Kernels report every multiply they execute (one
// multiply-accumulate counts as 2 FLOPs) to the innermost active scope on the
// calling thread. Used to validate the analytic cost model.

inline thread_local std::uint64_t* flop_sink = nullptr;

inline void count_flops(std::uint64_t n) {
  if (flop_sink != nullptr) *flop_sink += n;
}

class FlopScope {
 public:
  FlopScope() : previous_(flop_sink) { flop_sink = &count_; }
  ~FlopScope() { flop_sink = previous_; }
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_ = 0;
  std::uint64_t* previous_;
};

// ---------------------------------------------------------------------------

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<RowMat<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const RowMat<S>>;

// c[m x n] (+)= op(a) * op(b), where op(a) is m x k and op(b) is k x n.
// Row-major storage; `trans_a` means `a` is stored k x m.
template <typename S>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const S* a, const S* b, S* c, bool accumulate) {
  const auto M = static_cast<Eigen::Index>(m);
  const auto N = static_cast<Eigen::Index>(n);
  const auto K = static_cast<Eigen::Index>(k);
  MatMap<S> cm(c, M, N);
  if (!accumulate) cm.setZero();
  if (m == 0 || n == 0 || k == 0) return;
  count_flops(2ull * m * n * k);
  if (!trans_a && !trans_b) {
    cm.noalias() += ConstMatMap<S>(a, M, K) * ConstMatMap<S>(b, K, N);
  } else if (!trans_a && trans_b) {
    cm.noalias() += ConstMatMap<S>(a, M, K) * ConstMatMap<S>(b, N, K).transpose();
  } else if (trans_a && !trans_b) {
    cm.noalias() += ConstMatMap<S>(a, K, M).transpose() * ConstMatMap<S>(b, K, N);
  } else {
    cm.noalias() += ConstMatMap<S>(a, K, M).transpose() * ConstMatMap<S>(b, N, K).transpose();
  }
}

// In-place numerically stable softmax over one row.
template <typename S>
void softmax_row(std::span<S> row) {
  S peak = -std::numeric_limits<S>::infinity();
  for (S v : row) peak = std::max(peak, v);
  S total = 0;
  for (S& v : row) {
    v = std::exp(v - peak);
    total += v;
  }
  const S inv = S(1) / total;
  for (S& v : row) v *= inv;
}

// y = x / sqrt(mean(x^2) + eps) * gain over one row. Returns the inverse rms.
template <typename S>
S rms_norm_row(std::span<const S> x, std::span<const S> gain, std::span<S> y, S eps) {
  S sum_sq = 0;
  for (S v : x) sum_sq += v * v;
  const S inv_rms = S(1) / std::sqrt(sum_sq / static_cast<S>(x.size()) + eps);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * inv_rms * gain[i];
  // sum of squares (as multiply-accumulates) plus the two scalings
  count_flops(4ull * x.size());
  return inv_rms;
}

}  // namespace lite::kernels
