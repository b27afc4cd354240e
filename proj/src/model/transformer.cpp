#include "lite/model/transformer.hpp"

#include "lite/numcore/functional.hpp"

namespace lite {

ModelVars ModelVars::from_flat(std::span<const Var> flat, int n_layers) {
  const auto n = static_cast<std::size_t>(n_layers);
  if (flat.size() != 4 + 6 * n) throw DimensionError("parameter list does not match layer count");
  ModelVars v;
  v.tok_emb = flat[0];
  v.pos_emb = flat[1];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t o = 2 + 6 * i;
    v.blocks.push_back({flat[o], flat[o + 1], flat[o + 2], flat[o + 3], flat[o + 4], flat[o + 5]});
  }
  v.final_norm = flat[2 + 6 * n];
  v.lm_head = flat[3 + 6 * n];
  return v;
}

std::vector<Var> ModelVars::flat() const {
  std::vector<Var> out{tok_emb, pos_emb};
  for (const auto& b : blocks) {
    out.insert(out.end(), {b.attn_norm, b.w_qkv, b.w_o, b.mlp_norm, b.w_up, b.w_down});
  }
  out.push_back(final_norm);
  out.push_back(lm_head);
  return out;
}

LayerStates forward(const Model& model, std::span<const int> tokens) {
  Tape<float> tape(false);
  const ModelVars vars = bind_params(tape, model.params, false);
  LayerStates states;
  Var x = embed(tape, model.config, vars, tokens, 1, tokens.size());
  states.hidden.push_back(to_tensor(tape, x));
  for (const BlockVars& b : vars.blocks) {
    x = decoder_block(tape, b, x, 1, tokens.size(), model.config.n_heads);
    states.hidden.push_back(to_tensor(tape, x));
  }
  return states;
}

Tensor head_at_layer(const Model& model, const Tensor& hidden) {
  if (hidden.rank() != 2 || hidden.cols() != static_cast<std::size_t>(model.config.d_model)) {
    throw DimensionError("hidden state must be [T x d_model], got " + shape_str(hidden.shape));
  }
  Tape<float> tape(false);
  ModelVars vars;
  vars.final_norm = tape.constant(model.params.final_norm);
  vars.lm_head = tape.constant(model.params.lm_head);
  return to_tensor(tape, lm_head(tape, vars, tape.constant(hidden)));
}

LayerLogitsStack logits_all_selected(const Model& model, std::span<const int> tokens) {
  Tape<float> tape(false);
  const ModelVars vars = bind_params(tape, model.params, false);
  const auto layers = model.config.loss_layers();
  LayerLogitsStack stack;
  Var x = embed(tape, model.config, vars, tokens, 1, tokens.size());
  std::size_t next = 0;
  for (int l = 1; l <= model.config.n_layers; ++l) {
    x = decoder_block(tape, vars.blocks[static_cast<std::size_t>(l - 1)], x, 1, tokens.size(),
                      model.config.n_heads);
    if (next < layers.size() && layers[next] == l) {
      stack.logits.emplace(l, to_tensor(tape, lm_head(tape, vars, x)));
      ++next;
    }
  }
  return stack;
}

Tensor final_logits(const Model& model, std::span<const int> tokens) {
  const LayerStates states = forward(model, tokens);
  return head_at_layer(model, states.hidden.back());
}

}  // namespace lite
