#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "lite/errors.hpp"
#include "lite/model/config.hpp"
#include "lite/model/params.hpp"
#include "lite/numcore/ops.hpp"
#include "lite/numcore/tape.hpp"

namespace lite {

// Model parameters recorded as leaves on one tape.
struct BlockVars {
  Var attn_norm, w_qkv, w_o, mlp_norm, w_up, w_down;
};

struct ModelVars {
  Var tok_emb, pos_emb;
  std::vector<BlockVars> blocks;
  Var final_norm, lm_head;

  // Builds from leaves listed in ModelParams::named() order.
  static ModelVars from_flat(std::span<const Var> flat, int n_layers);
  std::vector<Var> flat() const;
};

template <typename S>
ModelVars bind_params(Tape<S>& tape, const ModelParams& params, bool requires_grad) {
  std::vector<Var> flat;
  for (const auto& [name, t] : params.named()) flat.push_back(tape.leaf(*t, requires_grad));
  return ModelVars::from_flat(flat, static_cast<int>(params.blocks.size()));
}

// Token plus learned absolute position embeddings for `batch` sequences of
// `seq` tokens each, packed row-major into [batch*seq x d].
template <typename S>
Var embed(Tape<S>& tape, const ModelConfig& config, const ModelVars& vars,
          std::span<const int> tokens, std::size_t batch, std::size_t seq) {
  if (tokens.size() != batch * seq) throw DimensionError("token count must equal batch*seq");
  if (seq > static_cast<std::size_t>(config.max_seq_len)) {
    throw LengthError("sequence of " + std::to_string(seq) + " tokens exceeds max_seq_len " +
                      std::to_string(config.max_seq_len));
  }
  for (int tok : tokens) {
    if (tok < 0 || tok >= config.vocab_size) {
      throw IndexError("token " + std::to_string(tok) + " outside vocabulary");
    }
  }
  std::vector<int> positions(tokens.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i % seq);
  return ops::add(tape, ops::embedding(tape, vars.tok_emb, tokens),
                  ops::embedding(tape, vars.pos_emb, positions));
}

// Pre-norm residual block: x + attn(norm(x)), then h + mlp(norm(h)).
template <typename S>
Var decoder_block(Tape<S>& tape, const BlockVars& b, Var x, std::size_t batch, std::size_t seq,
                  int n_heads) {
  const Var qkv = ops::matmul(tape, ops::rms_norm(tape, x, b.attn_norm), b.w_qkv);
  const Var attn = ops::causal_attention(tape, qkv, batch, seq, static_cast<std::size_t>(n_heads));
  const Var h = ops::add(tape, x, ops::matmul(tape, attn, b.w_o));
  const Var up = ops::gelu(tape, ops::matmul(tape, ops::rms_norm(tape, h, b.mlp_norm), b.w_up));
  return ops::add(tape, h, ops::matmul(tape, up, b.w_down));
}

// Shared LM head: final RMSNorm followed by the vocabulary projection. The
// same path serves every layer, including the last.
template <typename S>
Var lm_head(Tape<S>& tape, const ModelVars& vars, Var hidden) {
  return ops::matmul(tape, ops::rms_norm(tape, hidden, vars.final_norm), vars.lm_head);
}

// Hidden states for layers 0..n_layers (0 is the embedding output).
struct LayerStates {
  std::vector<Tensor> hidden;
};

// Per-layer logits keyed by 1-based layer index.
struct LayerLogitsStack {
  std::map<int, Tensor> logits;
};

LayerStates forward(const Model& model, std::span<const int> tokens);
Tensor head_at_layer(const Model& model, const Tensor& hidden);
// Logits for every loss layer (selected exit layers plus the final layer)
// from a single forward pass.
LayerLogitsStack logits_all_selected(const Model& model, std::span<const int> tokens);
// Standard model output: final layer through the head.
Tensor final_logits(const Model& model, std::span<const int> tokens);

}  // namespace lite
