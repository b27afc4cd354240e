#include "lite/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "lite/errors.hpp"

namespace lite {

namespace {

using Shadows = std::vector<std::vector<double>>;

struct Evaluation {
  double loss;
  Shadows grads;
};

Evaluation evaluate(const Objective& objective, std::span<const Tensor> params,
                    const Shadows& shadows, bool with_grads) {
  Tape<double> tape(with_grads);
  std::vector<Var> vars;
  vars.reserve(shadows.size());
  for (std::size_t i = 0; i < shadows.size(); ++i) {
    vars.push_back(tape.leaf(params[i].shape, shadows[i], true));
  }
  const Var loss = objective(tape, vars);
  const double value = tape.scalar(loss);
  if (!std::isfinite(value)) throw NumericError("grad_check objective is not finite");
  Evaluation out{value, {}};
  if (with_grads) {
    tape.backward(loss);
    for (Var v : vars) {
      auto g = tape.grad(v);
      out.grads.emplace_back(g.begin(), g.end());
      if (out.grads.back().empty()) out.grads.back().assign(tape.value(v).size(), 0.0);
    }
  }
  return out;
}

}  // namespace

GradCheckResult grad_check(const Objective& objective, std::span<const Tensor> params,
                           const GradCheckOptions& options) {
  Shadows shadows;
  for (const Tensor& p : params) shadows.emplace_back(p.data.begin(), p.data.end());

  const Evaluation analytic = evaluate(objective, params, shadows, true);
  std::mt19937_64 rng(options.seed);
  GradCheckResult result;

  for (std::size_t i = 0; i < shadows.size(); ++i) {
    std::vector<std::size_t> coords(shadows[i].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.coords_per_tensor != 0 && coords.size() > options.coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.coords_per_tensor);
    }
    for (std::size_t j : coords) {
      const double original = shadows[i][j];
      shadows[i][j] = original + options.step;
      const double up = evaluate(objective, params, shadows, false).loss;
      shadows[i][j] = original - options.step;
      const double down = evaluate(objective, params, shadows, false).loss;
      shadows[i][j] = original;

      const double numeric = (up - down) / (2.0 * options.step);
      const double exact = analytic.grads[i][j];
      const double rel = std::abs(exact - numeric) / (std::abs(exact) + std::abs(numeric) + 1e-8);
      result.max_relative_error = std::max(result.max_relative_error, rel);
      ++result.coordinates;
    }
  }
  return result;
}

}  // namespace lite
