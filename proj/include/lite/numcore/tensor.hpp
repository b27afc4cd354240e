#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lite {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major float32 tensor. `grad`, when present, always has the same
// number of elements as `data`.
struct Tensor {
  Shape shape;
  std::vector<float> data;
  std::optional<std::vector<float>> grad;

  Tensor() = default;
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, float value);

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  // Product of all leading dimensions; the tensor viewed as rows x cols.
  std::size_t rows() const;
  std::size_t cols() const;

  float& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data).subspan(r * cols(), cols());
  }

  // Allocates (or clears) the gradient buffer.
  void zero_grad();
  bool has_grad() const { return grad.has_value(); }
};

}  // namespace lite
