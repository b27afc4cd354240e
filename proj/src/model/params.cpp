#include "lite/model/params.hpp"

#include <random>

namespace lite {

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.emplace_back("tok_emb", &tok_emb);
  out.emplace_back("pos_emb", &pos_emb);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    auto& b = blocks[i];
    out.emplace_back(p + "attn_norm", &b.attn_norm);
    out.emplace_back(p + "w_qkv", &b.w_qkv);
    out.emplace_back(p + "w_o", &b.w_o);
    out.emplace_back(p + "mlp_norm", &b.mlp_norm);
    out.emplace_back(p + "w_up", &b.w_up);
    out.emplace_back(p + "w_down", &b.w_down);
  }
  out.emplace_back("final_norm", &final_norm);
  out.emplace_back("lm_head", &lm_head);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<ModelParams*>(this)->named()) out.emplace_back(name, t);
  return out;
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t->numel();
  return n;
}

void ModelParams::zero_grad() {
  for (Tensor* t : tensors()) t->zero_grad();
}

std::vector<std::pair<std::string, Shape>> expected_shapes(const ModelConfig& c) {
  const auto V = static_cast<std::size_t>(c.vocab_size);
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto f = static_cast<std::size_t>(c.d_ff);
  const auto S = static_cast<std::size_t>(c.max_seq_len);
  std::vector<std::pair<std::string, Shape>> out;
  out.emplace_back("tok_emb", Shape{V, d});
  out.emplace_back("pos_emb", Shape{S, d});
  for (int i = 0; i < c.n_layers; ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    out.emplace_back(p + "attn_norm", Shape{d});
    out.emplace_back(p + "w_qkv", Shape{d, 3 * d});
    out.emplace_back(p + "w_o", Shape{d, d});
    out.emplace_back(p + "mlp_norm", Shape{d});
    out.emplace_back(p + "w_up", Shape{d, f});
    out.emplace_back(p + "w_down", Shape{f, d});
  }
  out.emplace_back("final_norm", Shape{d});
  out.emplace_back("lm_head", Shape{d, V});
  return out;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 0.02f);

  ModelParams p;
  p.blocks.resize(static_cast<std::size_t>(config.n_layers));
  auto shapes = expected_shapes(config);
  auto named = p.named();
  for (std::size_t i = 0; i < named.size(); ++i) {
    const Shape& shape = shapes[i].second;
    Tensor& t = *named[i].second;
    if (shape.size() == 1) {
      t = Tensor::filled(shape, 1.0f);
    } else {
      t = Tensor::zeros(shape);
      for (float& v : t.data) v = normal(rng);
    }
  }
  return p;
}

}  // namespace lite
