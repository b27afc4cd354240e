#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "lite/numcore/tape.hpp"
#include "lite/numcore/tensor.hpp"

namespace lite {

// Builds a scalar objective on a double tape from leaf variables that mirror
// the parameter tensors (same order, same shapes).
using Objective = std::function<Var(Tape<double>&, std::span<const Var> params)>;

struct GradCheckOptions {
  double step = 1e-3;
  // Coordinates sampled per tensor; 0 checks every coordinate.
  std::size_t coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

// Compares reverse-mode gradients against central differences, both on
// 64-bit shadow copies of `params`. Relative error per coordinate is
// |analytic - numeric| / (|analytic| + |numeric| + 1e-8).
// Throws NumericError if the objective is not finite.
GradCheckResult grad_check(const Objective& objective, std::span<const Tensor> params,
                           const GradCheckOptions& options = {});

}  // namespace lite
