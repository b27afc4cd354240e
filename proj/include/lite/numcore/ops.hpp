#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lite/errors.hpp"
#include "lite/numcore/kernels.hpp"
#include "lite/numcore/tape.hpp"

// Differentiable operations recorded on a Tape. Each op checks shapes,
// computes its value eagerly and registers a closure that accumulates into
// its inputs' gradients.
namespace lite::ops {

inline constexpr double kRmsNormEps = 1e-5;

using Mask = std::vector<std::uint8_t>;

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

template <typename S>
std::size_t cols_of(const Tape<S>& t, Var v) {
  const auto& s = t.shape(v);
  return s.empty() ? 1 : s.back();
}

}  // namespace detail

// [m x k] * [k x n] -> [m x n]
template <typename S>
Var matmul(Tape<S>& t, Var a, Var b) {
  const Shape& sa = t.shape(a);
  const Shape& sb = t.shape(b);
  detail::require(sa.size() == 2 && sb.size() == 2, "matmul expects 2-d operands");
  detail::require(sa[1] == sb[0],
                  "matmul inner dimensions differ: " + shape_str(sa) + " * " + shape_str(sb));
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  std::vector<S> out(m * n);
  kernels::gemm<S>(false, false, m, n, k, t.value(a).data(), t.value(b).data(), out.data(), false);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.push({m, n}, std::move(out), rg, [a, b, m, n, k](Tape<S>& tp, Var self) {
    const S* dc = tp.grad(self).data();
    if (tp.requires_grad(a)) {
      kernels::gemm<S>(false, true, m, k, n, dc, tp.value(b).data(), tp.grad(a).data(), true);
    }
    if (tp.requires_grad(b)) {
      kernels::gemm<S>(true, false, k, n, m, tp.value(a).data(), dc, tp.grad(b).data(), true);
    }
  });
}

// Elementwise sum of equal-shape tensors.
template <typename S>
Var add(Tape<S>& t, Var a, Var b) {
  detail::require(t.shape(a) == t.shape(b), "add shape mismatch: " + shape_str(t.shape(a)) +
                                                " + " + shape_str(t.shape(b)));
  auto va = t.value(a);
  auto vb = t.value(b);
  std::vector<S> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.push(t.shape(a), std::move(out), rg, [a, b](Tape<S>& tp, Var self) {
    auto g = tp.grad(self);
    for (Var in : {a, b}) {
      if (!tp.requires_grad(in)) continue;
      auto gi = tp.grad(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

// Row gather: out[i] = table[ids[i]].
template <typename S>
Var embedding(Tape<S>& t, Var table, std::span<const int> ids) {
  const Shape& st = t.shape(table);
  detail::require(st.size() == 2, "embedding table must be 2-d");
  const std::size_t rows = st[0], d = st[1];
  auto tv = t.value(table);
  std::vector<S> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw IndexError("embedding index " + std::to_string(ids[i]) + " outside [0, " +
                       std::to_string(rows) + ")");
    }
    std::copy_n(tv.begin() + static_cast<std::ptrdiff_t>(ids[i] * d), d,
                out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return t.push({ids.size(), d}, std::move(out), t.requires_grad(table),
                [table, idx = std::move(idx), d](Tape<S>& tp, Var self) {
                  auto g = tp.grad(self);
                  auto gt = tp.grad(table);
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    S* dst = gt.data() + static_cast<std::size_t>(idx[i]) * d;
                    const S* src = g.data() + i * d;
                    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                  }
                });
}

// Selects whole rows of a 2-d value.
template <typename S>
Var take_rows(Tape<S>& t, Var x, std::span<const std::size_t> rows) {
  const Shape& sx = t.shape(x);
  detail::require(sx.size() == 2, "take_rows expects a 2-d value");
  const std::size_t n = sx[0], d = sx[1];
  auto xv = t.value(x);
  std::vector<S> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n) throw IndexError("row " + std::to_string(rows[i]) + " out of range");
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(rows[i] * d), d,
                out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return t.push({rows.size(), d}, std::move(out), t.requires_grad(x),
                [x, idx = std::move(idx), d](Tape<S>& tp, Var self) {
                  auto g = tp.grad(self);
                  auto gx = tp.grad(x);
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    for (std::size_t j = 0; j < d; ++j) gx[idx[i] * d + j] += g[i * d + j];
                  }
                });
}

// Row-wise RMS normalization scaled by a per-feature gain.
template <typename S>
Var rms_norm(Tape<S>& t, Var x, Var gain, double eps = kRmsNormEps) {
  const std::size_t d = detail::cols_of(t, x);
  detail::require(d >= 1, "rms_norm needs a non-empty last dimension");
  detail::require(t.shape(gain) == Shape{d}, "rms_norm gain must have shape [" +
                                                 std::to_string(d) + "]");
  auto xv = t.value(x);
  auto gv = t.value(gain);
  const std::size_t rows = xv.size() / d;
  std::vector<S> out(xv.size());
  std::vector<S> inv_rms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    inv_rms[r] = kernels::rms_norm_row<S>(xv.subspan(r * d, d), gv,
                                          std::span<S>(out).subspan(r * d, d), static_cast<S>(eps));
  }
  const bool rg = t.requires_grad(x) || t.requires_grad(gain);
  return t.push(t.shape(x), std::move(out), rg,
                [x, gain, d, rows, inv_rms = std::move(inv_rms)](Tape<S>& tp, Var self) {
                  auto g = tp.grad(self);
                  auto xv = tp.value(x);
                  auto gv = tp.value(gain);
                  const bool gx = tp.requires_grad(x);
                  const bool gg = tp.requires_grad(gain);
                  for (std::size_t r = 0; r < rows; ++r) {
                    const S* xr = xv.data() + r * d;
                    const S* gr = g.data() + r * d;
                    const S ir = inv_rms[r];
                    if (gg) {
                      auto ggain = tp.grad(gain);
                      for (std::size_t j = 0; j < d; ++j) ggain[j] += gr[j] * xr[j] * ir;
                    }
                    if (gx) {
                      S dot = 0;
                      for (std::size_t j = 0; j < d; ++j) dot += gr[j] * gv[j] * xr[j];
                      const S coef = dot * ir * ir * ir / static_cast<S>(d);
                      S* dx = tp.grad(x).data() + r * d;
                      for (std::size_t j = 0; j < d; ++j) dx[j] += ir * gv[j] * gr[j] - xr[j] * coef;
                    }
                  }
                });
}

// tanh-approximated GELU. The tanh values are kept for the backward pass.
template <typename S>
Var gelu(Tape<S>& t, Var x) {
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  const S kC = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  const S kA = static_cast<S>(0.044715);
  auto xv = t.value(x);
  const auto n = static_cast<Eigen::Index>(xv.size());
  Eigen::Map<const Arr> xa(xv.data(), n);
  Arr th = (kC * (xa + kA * xa.cube())).tanh();
  std::vector<S> out(xv.size());
  Eigen::Map<Arr>(out.data(), n) = S(0.5) * xa * (S(1) + th);
  std::vector<S> cache;
  if (t.recording() && t.requires_grad(x)) cache.assign(th.data(), th.data() + n);
  return t.push(t.shape(x), std::move(out), t.requires_grad(x),
                [x, n, kC, kA, cache = std::move(cache)](Tape<S>& tp, Var self) {
                  Eigen::Map<const Arr> g(tp.grad(self).data(), n);
                  Eigen::Map<const Arr> xa(tp.value(x).data(), n);
                  Eigen::Map<const Arr> th(cache.data(), n);
                  Eigen::Map<Arr> gx(tp.grad(x).data(), n);
                  const Arr dth = (S(1) - th.square()) * kC * (S(1) + S(3) * kA * xa.square());
                  gx += g * (S(0.5) * (S(1) + th) + S(0.5) * xa * dth);
                });
}

// Softmax over the last dimension.
template <typename S>
Var softmax(Tape<S>& t, Var x) {
  const std::size_t v = detail::cols_of(t, x);
  detail::require(v >= 1, "softmax over an empty last dimension");
  auto xv = t.value(x);
  std::vector<S> out(xv.begin(), xv.end());
  for (std::size_t r = 0; r < out.size() / v; ++r) {
    kernels::softmax_row<S>(std::span<S>(out).subspan(r * v, v));
  }
  return t.push(t.shape(x), std::move(out), t.requires_grad(x), [x, v](Tape<S>& tp, Var self) {
    auto g = tp.grad(self);
    auto p = tp.value(self);
    auto gx = tp.grad(x);
    for (std::size_t r = 0; r < g.size() / v; ++r) {
      S dot = 0;
      for (std::size_t j = 0; j < v; ++j) dot += g[r * v + j] * p[r * v + j];
      for (std::size_t j = 0; j < v; ++j) gx[r * v + j] += p[r * v + j] * (g[r * v + j] - dot);
    }
  });
}

// Multi-head causal self-attention over a packed [batch*seq x 3d] buffer
// holding Q, K and V side by side. The full seq x seq score matrix is
// computed and the upper triangle masked, so the executed work is
// 4 * seq^2 * d FLOPs per sequence.
template <typename S>
Var causal_attention(Tape<S>& t, Var qkv, std::size_t batch, std::size_t seq,
                     std::size_t n_heads) {
  using Mat = kernels::RowMat<S>;
  using Stride = Eigen::OuterStride<>;
  using CMap = Eigen::Map<const Mat, 0, Stride>;
  using WMap = Eigen::Map<Mat, 0, Stride>;

  const Shape& sq = t.shape(qkv);
  detail::require(sq.size() == 2 && sq[0] == batch * seq && sq[1] % 3 == 0,
                  "attention expects [batch*seq x 3d], got " + shape_str(sq));
  const std::size_t d = sq[1] / 3;
  detail::require(n_heads >= 1 && d % n_heads == 0, "d_model not divisible by head count");
  const std::size_t hd = d / n_heads;
  const auto T = static_cast<Eigen::Index>(seq);
  const auto HD = static_cast<Eigen::Index>(hd);
  const auto ld = static_cast<Eigen::Index>(3 * d);
  const S scale = S(1) / std::sqrt(static_cast<S>(hd));

  auto in = t.value(qkv);
  std::vector<S> out(batch * seq * d);
  std::vector<S> probs(batch * n_heads * seq * seq);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < n_heads; ++h) {
      const S* base = in.data() + b * seq * 3 * d + h * hd;
      CMap q(base, T, HD, Stride(ld));
      CMap k(base + d, T, HD, Stride(ld));
      CMap v(base + 2 * d, T, HD, Stride(ld));
      Eigen::Map<Mat> p(probs.data() + (b * n_heads + h) * seq * seq, T, T);
      p.noalias() = q * k.transpose();
      kernels::count_flops(2ull * seq * seq * hd);
      for (Eigen::Index i = 0; i < T; ++i) {
        for (Eigen::Index j = 0; j < T; ++j) {
          p(i, j) = j <= i ? p(i, j) * scale : -std::numeric_limits<S>::infinity();
        }
        kernels::softmax_row<S>(std::span<S>(p.row(i).data(), seq));
      }
      WMap o(out.data() + b * seq * d + h * hd, T, HD, Stride(static_cast<Eigen::Index>(d)));
      o.noalias() = p * v;
      kernels::count_flops(2ull * seq * seq * hd);
    }
  }

  return t.push(
      {batch * seq, d}, std::move(out), t.requires_grad(qkv),
      [=, probs = std::move(probs)](Tape<S>& tp, Var self) {
        auto in = tp.value(qkv);
        auto gin = tp.grad(qkv);
        auto gout = tp.grad(self);
        Mat dp(T, T);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = b * seq * 3 * d + h * hd;
            CMap q(in.data() + off, T, HD, Stride(ld));
            CMap k(in.data() + off + d, T, HD, Stride(ld));
            CMap v(in.data() + off + 2 * d, T, HD, Stride(ld));
            WMap dq(gin.data() + off, T, HD, Stride(ld));
            WMap dk(gin.data() + off + d, T, HD, Stride(ld));
            WMap dv(gin.data() + off + 2 * d, T, HD, Stride(ld));
            CMap dout(gout.data() + b * seq * d + h * hd, T, HD,
                      Stride(static_cast<Eigen::Index>(d)));
            Eigen::Map<const Mat> p(probs.data() + (b * n_heads + h) * seq * seq, T, T);

            dv.noalias() += p.transpose() * dout;
            dp.noalias() = dout * v.transpose();
            for (Eigen::Index i = 0; i < T; ++i) {
              S dot = 0;
              for (Eigen::Index j = 0; j <= i; ++j) dot += dp(i, j) * p(i, j);
              for (Eigen::Index j = 0; j < T; ++j) {
                dp(i, j) = j <= i ? p(i, j) * (dp(i, j) - dot) * scale : S(0);
              }
            }
            dq.noalias() += dp * k;
            dk.noalias() += dp.transpose() * q;
          }
        }
      });
}

// Mean negative log-likelihood of `targets` over rows whose mask is set.
// Returns 0 (with zero gradient) when no row is masked in.
template <typename S>
Var cross_entropy(Tape<S>& t, Var logits, std::span<const int> targets,
                  std::span<const std::uint8_t> mask) {
  const Shape& sl = t.shape(logits);
  detail::require(sl.size() == 2, "cross_entropy expects [T x V] logits");
  const std::size_t rows = sl[0], v = sl[1];
  detail::require(targets.size() == rows && mask.size() == rows,
                  "cross_entropy targets/mask length must equal logits rows");
  auto lv = t.value(logits);
  std::vector<S> probs(rows * v);
  std::size_t active = 0;
  S total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= v) {
      throw IndexError("target " + std::to_string(targets[r]) + " outside vocabulary of " +
                       std::to_string(v));
    }
    std::span<S> pr = std::span<S>(probs).subspan(r * v, v);
    std::copy_n(lv.begin() + static_cast<std::ptrdiff_t>(r * v), v, pr.begin());
    S peak = -std::numeric_limits<S>::infinity();
    for (S x : pr) peak = std::max(peak, x);
    S sum = 0;
    for (S& x : pr) {
      x = std::exp(x - peak);
      sum += x;
    }
    const S log_z = peak + std::log(sum);
    total += log_z - lv[r * v + static_cast<std::size_t>(targets[r])];
    for (S& x : pr) x /= sum;
    ++active;
  }
  const S loss = active == 0 ? S(0) : total / static_cast<S>(active);
  std::vector<int> tg(targets.begin(), targets.end());
  Mask mk(mask.begin(), mask.end());
  return t.push({1}, {loss}, t.requires_grad(logits),
                [=, probs = std::move(probs), tg = std::move(tg), mk = std::move(mk)](
                    Tape<S>& tp, Var self) {
                  if (active == 0) return;
                  const S g = tp.grad(self)[0] / static_cast<S>(active);
                  auto gl = tp.grad(logits);
                  for (std::size_t r = 0; r < rows; ++r) {
                    if (!mk[r]) continue;
                    for (std::size_t j = 0; j < v; ++j) gl[r * v + j] += g * probs[r * v + j];
                    gl[r * v + static_cast<std::size_t>(tg[r])] -= g;
                  }
                });
}

// sum_i w_i * x_i / sum_i w_i over scalar values. Terms with zero weight are
// skipped entirely.
template <typename S>
Var weighted_mean(Tape<S>& t, std::span<const Var> terms, std::span<const double> weights) {
  detail::require(terms.size() == weights.size(), "weighted_mean needs one weight per term");
  double wsum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw ConfigError("loss weights must be non-negative");
    wsum += w;
  }
  if (!(wsum > 0)) throw ConfigError("loss weights sum to zero");
  S acc = 0;
  bool rg = false;
  std::vector<std::pair<Var, S>> used;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const S w = static_cast<S>(weights[i]);
    acc += w * t.scalar(terms[i]);
    rg = rg || t.requires_grad(terms[i]);
    used.emplace_back(terms[i], w);
  }
  const S denom = static_cast<S>(wsum);
  return t.push({1}, {acc / denom}, rg, [used = std::move(used), denom](Tape<S>& tp, Var self) {
    const S g = tp.grad(self)[0] / denom;
    for (const auto& [v, w] : used) {
      if (tp.requires_grad(v)) tp.grad(v)[0] += g * w;
    }
  });
}

template <typename S>
Var sum_squares(Tape<S>& t, Var x) {
  auto xv = t.value(x);
  S acc = 0;
  for (S v : xv) acc += v * v;
  return t.push({1}, {acc}, t.requires_grad(x), [x](Tape<S>& tp, Var self) {
    const S g = tp.grad(self)[0];
    auto xv = tp.value(x);
    auto gx = tp.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += S(2) * xv[i] * g;
  });
}

// Sum of w[i] * x[i] for a fixed weight vector; lets grad_check reduce a
// tensor-valued op to a scalar with a non-trivial upstream gradient.
template <typename S>
Var dot_with(Tape<S>& t, Var x, std::vector<S> weights) {
  auto xv = t.value(x);
  detail::require(weights.size() == xv.size(), "dot_with weight length mismatch");
  S acc = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * weights[i];
  return t.push({1}, {acc}, t.requires_grad(x),
                [x, weights = std::move(weights)](Tape<S>& tp, Var self) {
                  const S g = tp.grad(self)[0];
                  auto gx = tp.grad(x);
                  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += weights[i] * g;
                });
}

}  // namespace lite::ops
