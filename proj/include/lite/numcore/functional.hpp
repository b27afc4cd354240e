#pragma once

#include <cstdint>
#include <span>

#include "lite/numcore/tape.hpp"
#include "lite/numcore/tensor.hpp"

// Value-only wrappers over the tape ops, for callers that just want numbers.
namespace lite {

Tensor to_tensor(const Tape<float>& tape, Var v);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& logits);
Tensor rms_norm(const Tensor& x, const Tensor& gain);
float cross_entropy(const Tensor& logits, std::span<const int> targets,
                    std::span<const std::uint8_t> mask);

}  // namespace lite
