#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lite/model/config.hpp"
#include "lite/numcore/tensor.hpp"

namespace lite {

struct BlockParams {
  Tensor attn_norm;  // [d]
  Tensor w_qkv;      // [d x 3d]
  Tensor w_o;        // [d x d]
  Tensor mlp_norm;   // [d]
  Tensor w_up;       // [d x d_ff]
  Tensor w_down;     // [d_ff x d]
};

// All trainable tensors. There is exactly one LM head; every tapped layer
// reuses it together with the final RMSNorm gain.
struct ModelParams {
  Tensor tok_emb;  // [V x d]
  Tensor pos_emb;  // [max_seq_len x d]
  std::vector<BlockParams> blocks;
  Tensor final_norm;  // [d]
  Tensor lm_head;     // [d x V]

  // Canonical parameter order, used by checkpoints, the optimizer and
  // gradient checks.
  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;
  std::vector<Tensor*> tensors();

  std::size_t parameter_count() const;
  void zero_grad();
};

// Normal(0, 0.02) weight matrices and embeddings, unit norm gains.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Shapes expected for `config`, in canonical order.
std::vector<std::pair<std::string, Shape>> expected_shapes(const ModelConfig& config);

struct Model {
  ModelConfig config;
  ModelParams params;
};

}  // namespace lite
