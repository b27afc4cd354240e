#pragma once

#include <map>
#include <span>
#include <vector>

#include "lite/errors.hpp"
#include "lite/model/config.hpp"
#include "lite/model/transformer.hpp"
#include "lite/numcore/ops.hpp"
#include "lite/training/dataset.hpp"

namespace lite {

// Per-layer loss weights w_l over the loss layers (selected exit layers plus
// the final layer). Standard instruction tuning is the one-hot-final case.
struct LiteWeights {
  std::map<int, double> weights;

  static LiteWeights standard(const ModelConfig& config);
  static LiteWeights equal(const ModelConfig& config);
  // Uses config.loss_weights (equal when unset).
  static LiteWeights from_config(const ModelConfig& config);

  double total() const;
  // Throws ConfigError for negative weights or a zero sum.
  void validate() const;
};

// Next-token targets: position t is trained to predict token t+1, and only
// when token t+1 lies in the output span.
struct NextTokenTargets {
  std::vector<int> targets;
  ops::Mask mask;
};

NextTokenTargets shift_targets(std::span<const int> tokens, std::span<const std::uint8_t> output_mask);

// Logits recorded on a tape, keyed by 1-based layer.
using TapeLogits = std::map<int, Var>;

template <typename S>
Var standard_loss(Tape<S>& tape, const TapeLogits& stack, int final_layer,
                  std::span<const int> targets, std::span<const std::uint8_t> mask) {
  const auto it = stack.find(final_layer);
  if (it == stack.end()) throw ConfigError("logit stack lacks the final layer");
  return ops::cross_entropy(tape, it->second, targets, mask);
}

// sum_l w_l * CE_l / sum_l w_l with every CE_l computed on the same targets
// and mask. Layers with zero weight contribute nothing and are not evaluated.
template <typename S>
Var lite_loss(Tape<S>& tape, const TapeLogits& stack, std::span<const int> targets,
              std::span<const std::uint8_t> mask, const LiteWeights& weights) {
  weights.validate();
  std::vector<Var> terms;
  std::vector<double> ws;
  for (const auto& [layer, w] : weights.weights) {
    if (w == 0.0) continue;
    const auto it = stack.find(layer);
    if (it == stack.end()) {
      throw ConfigError("weighted layer " + std::to_string(layer) + " missing from logit stack");
    }
    terms.push_back(ops::cross_entropy(tape, it->second, targets, mask));
    ws.push_back(w);
  }
  return ops::weighted_mean(tape, terms, ws);
}

// Value-level versions over precomputed logits.
float standard_loss(const LayerLogitsStack& stack, int final_layer, std::span<const int> targets,
                    std::span<const std::uint8_t> mask);
float lite_loss(const LayerLogitsStack& stack, std::span<const int> targets,
                std::span<const std::uint8_t> mask, const LiteWeights& weights);

// A right-padded batch of examples, packed row-major.
struct Batch {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::vector<int> tokens;
  std::vector<int> targets;
  ops::Mask mask;
};

Batch make_batch(std::span<const InstructionExample* const> examples);

template <typename S>
struct BatchLoss {
  Var total;
  // Cross-entropy of every loss layer, including zero-weight ones.
  std::map<int, Var> per_layer;
};

// Full forward over a batch with the head applied at every loss layer.
template <typename S>
BatchLoss<S> batch_loss(Tape<S>& tape, const ModelConfig& config, const ModelVars& vars,
                        const Batch& batch, const LiteWeights& weights) {
  const auto layers = config.loss_layers();
  Var x = embed(tape, config, vars, batch.tokens, batch.batch, batch.seq);
  TapeLogits stack;
  std::size_t next = 0;
  for (int l = 1; l <= config.n_layers; ++l) {
    x = decoder_block(tape, vars.blocks[static_cast<std::size_t>(l - 1)], x, batch.batch,
                      batch.seq, config.n_heads);
    if (next < layers.size() && layers[next] == l) {
      stack.emplace(l, lm_head(tape, vars, x));
      ++next;
    }
  }
  BatchLoss<S> out;
  for (const auto& [layer, logits] : stack) {
    out.per_layer.emplace(layer, ops::cross_entropy(tape, logits, batch.targets, batch.mask));
  }
  std::vector<Var> terms;
  std::vector<double> ws;
  weights.validate();
  for (const auto& [layer, w] : weights.weights) {
    const auto it = out.per_layer.find(layer);
    if (it == out.per_layer.end()) {
      throw ConfigError("weighted layer " + std::to_string(layer) + " is not a loss layer");
    }
    terms.push_back(it->second);
    ws.push_back(w);
  }
  out.total = ops::weighted_mean(tape, terms, ws);
  return out;
}

}  // namespace lite
