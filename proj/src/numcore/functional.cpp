#include "lite/numcore/functional.hpp"

#include "lite/numcore/ops.hpp"

namespace lite {

Tensor to_tensor(const Tape<float>& tape, Var v) {
  auto values = tape.value(v);
  return Tensor(tape.shape(v), std::vector<float>(values.begin(), values.end()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape<float> tape(false);
  return to_tensor(tape, ops::matmul(tape, tape.constant(a), tape.constant(b)));
}

Tensor softmax(const Tensor& logits) {
  Tape<float> tape(false);
  return to_tensor(tape, ops::softmax(tape, tape.constant(logits)));
}

Tensor rms_norm(const Tensor& x, const Tensor& gain) {
  Tape<float> tape(false);
  return to_tensor(tape, ops::rms_norm(tape, tape.constant(x), tape.constant(gain)));
}

float cross_entropy(const Tensor& logits, std::span<const int> targets,
                    std::span<const std::uint8_t> mask) {
  Tape<float> tape(false);
  return tape.scalar(ops::cross_entropy(tape, tape.constant(logits), targets, mask));
}

}  // namespace lite
