#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lite/numcore/tensor.hpp"

namespace lite {

struct AdamHyper {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are created on the first step
// and must keep matching the parameter shapes afterwards.
class AdamState {
 public:
  explicit AdamState(AdamHyper hyper = {}) : hyper_(hyper) {}

  // Applies one update using each parameter's `grad` and the given learning
  // rate, then increments the step counter.
  void step(std::span<Tensor* const> params, double lr);

  std::uint64_t steps() const { return step_; }
  const AdamHyper& hyper() const { return hyper_; }
  const std::vector<std::vector<float>>& first_moments() const { return m_; }
  const std::vector<std::vector<float>>& second_moments() const { return v_; }

 private:
  AdamHyper hyper_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

}  // namespace lite
