#include "lite/numcore/tensor.hpp"

#include <functional>
#include <numeric>

#include "lite/errors.hpp"

namespace lite {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " elements");
  }
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0f); }

Tensor Tensor::filled(Shape shape, float value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<float>(n, value));
}

std::size_t Tensor::rows() const {
  if (shape.empty()) return 1;
  return numel() / (shape.back() == 0 ? 1 : shape.back());
}

std::size_t Tensor::cols() const { return shape.empty() ? 1 : shape.back(); }

void Tensor::zero_grad() {
  if (grad) {
    std::fill(grad->begin(), grad->end(), 0.0f);
  } else {
    grad.emplace(data.size(), 0.0f);
  }
}

}  // namespace lite
