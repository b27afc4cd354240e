#include "lite/training/loss.hpp"

#include <algorithm>

#include "lite/training/tokenizer.hpp"

namespace lite {

LiteWeights LiteWeights::standard(const ModelConfig& config) {
  LiteWeights w;
  for (int l : config.loss_layers()) w.weights[l] = l == config.n_layers ? 1.0 : 0.0;
  return w;
}

LiteWeights LiteWeights::equal(const ModelConfig& config) {
  LiteWeights w;
  for (int l : config.loss_layers()) w.weights[l] = 1.0;
  return w;
}

LiteWeights LiteWeights::from_config(const ModelConfig& config) {
  LiteWeights w;
  const auto layers = config.loss_layers();
  const auto ws = config.effective_loss_weights();
  for (std::size_t i = 0; i < layers.size(); ++i) w.weights[layers[i]] = ws[i];
  return w;
}

double LiteWeights::total() const {
  double s = 0;
  for (const auto& [l, w] : weights) s += w;
  return s;
}

void LiteWeights::validate() const {
  for (const auto& [l, w] : weights) {
    if (!(w >= 0)) throw ConfigError("loss weight for layer " + std::to_string(l) + " is negative");
  }
  if (!(total() > 0)) throw ConfigError("loss weights sum to zero");
}

NextTokenTargets shift_targets(std::span<const int> tokens, std::span<const std::uint8_t> output_mask) {
  if (tokens.size() != output_mask.size()) throw DimensionError("tokens and mask lengths differ");
  NextTokenTargets out;
  out.targets.assign(tokens.size(), CharTokenizer::kEos);
  out.mask.assign(tokens.size(), 0);
  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    out.targets[t] = tokens[t + 1];
    out.mask[t] = output_mask[t + 1];
  }
  return out;
}

namespace {

TapeLogits constants(Tape<float>& tape, const LayerLogitsStack& stack) {
  TapeLogits out;
  for (const auto& [l, t] : stack.logits) out.emplace(l, tape.constant(t));
  return out;
}

}  // namespace

float standard_loss(const LayerLogitsStack& stack, int final_layer, std::span<const int> targets,
                    std::span<const std::uint8_t> mask) {
  Tape<float> tape(false);
  return tape.scalar(standard_loss(tape, constants(tape, stack), final_layer, targets, mask));
}

float lite_loss(const LayerLogitsStack& stack, std::span<const int> targets,
                std::span<const std::uint8_t> mask, const LiteWeights& weights) {
  Tape<float> tape(false);
  return tape.scalar(lite_loss(tape, constants(tape, stack), targets, mask, weights));
}

Batch make_batch(std::span<const InstructionExample* const> examples) {
  Batch b;
  b.batch = examples.size();
  for (const auto* ex : examples) b.seq = std::max(b.seq, ex->tokens.size());
  b.tokens.assign(b.batch * b.seq, CharTokenizer::kEos);
  b.targets.assign(b.batch * b.seq, CharTokenizer::kEos);
  b.mask.assign(b.batch * b.seq, 0);
  for (std::size_t i = 0; i < b.batch; ++i) {
    const auto& ex = *examples[i];
    const auto shifted = shift_targets(ex.tokens, ex.mask);
    std::copy(ex.tokens.begin(), ex.tokens.end(), b.tokens.begin() + static_cast<std::ptrdiff_t>(i * b.seq));
    std::copy(shifted.targets.begin(), shifted.targets.end(),
              b.targets.begin() + static_cast<std::ptrdiff_t>(i * b.seq));
    std::copy(shifted.mask.begin(), shifted.mask.end(), b.mask.begin() + static_cast<std::ptrdiff_t>(i * b.seq));
  }
  return b;
}

}  // namespace lite
