#include "lite/numcore/adam.hpp"

#include <cmath>
#include <string>

#include "lite/errors.hpp"

namespace lite {

void AdamState::step(std::span<Tensor* const> params, double lr) {
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.emplace_back(p->numel(), 0.0f);
      v_.emplace_back(p->numel(), 0.0f);
    }
  }
  if (m_.size() != params.size()) throw DimensionError("optimizer parameter count changed");

  ++step_;
  const double c1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(step_));
  const auto b1 = static_cast<float>(hyper_.beta1);
  const auto b2 = static_cast<float>(hyper_.beta2);
  const auto step_size = static_cast<float>(lr / c1);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  const auto eps = static_cast<float>(hyper_.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (m_[i].size() != p.numel()) {
      throw DimensionError("optimizer moments do not match parameter " + std::to_string(i));
    }
    if (!p.grad) continue;
    const auto& g = *p.grad;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      m[j] = b1 * m[j] + (1.0f - b1) * g[j];
      v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
      p.data[j] -= step_size * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
    }
  }
}

}  // namespace lite
