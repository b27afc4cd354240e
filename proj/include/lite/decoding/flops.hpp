#pragma once

#include <cstddef>
#include <cstdint>

#include "lite/model/config.hpp"

namespace lite {

// Analytic cost model for one decoding step without a KV cache: every step
// re-runs the exited-to layers over the whole context of t tokens. One
// multiply-accumulate counts as 2 FLOPs; embedding lookups are free.
struct BlockFlops {
  std::uint64_t attn_projections = 0;  // Q, K, V and output: 8 t d^2
  std::uint64_t attn_mixing = 0;       // scores and value mixing: 4 t^2 d
  std::uint64_t mlp = 0;               // up and down: 4 t d d_ff
  std::uint64_t total() const { return attn_projections + attn_mixing + mlp; }
};

BlockFlops block_flops(const ModelConfig& config, std::size_t context_len);

// Final RMSNorm (4 d) plus the vocabulary projection (2 d V) for one row.
std::uint64_t head_flops(const ModelConfig& config);

std::uint64_t flops_per_token(const ModelConfig& config, int exit_layer, int heads_evaluated,
                              std::size_t context_len);

// Cost of one standard decoding step (all layers, one head).
std::uint64_t flops_full_token(const ModelConfig& config, std::size_t context_len);

}  // namespace lite
