#include "lite/decoding/flops.hpp"

#include "lite/errors.hpp"

namespace lite {

BlockFlops block_flops(const ModelConfig& config, std::size_t context_len) {
  const auto t = static_cast<std::uint64_t>(context_len);
  const auto d = static_cast<std::uint64_t>(config.d_model);
  const auto f = static_cast<std::uint64_t>(config.d_ff);
  BlockFlops b;
  b.attn_projections = 8 * t * d * d;
  b.attn_mixing = 4 * t * t * d;
  b.mlp = 4 * t * d * f;
  return b;
}

std::uint64_t head_flops(const ModelConfig& config) {
  const auto d = static_cast<std::uint64_t>(config.d_model);
  const auto v = static_cast<std::uint64_t>(config.vocab_size);
  return 4 * d + 2 * d * v;
}

std::uint64_t flops_per_token(const ModelConfig& config, int exit_layer, int heads_evaluated,
                              std::size_t context_len) {
  if (exit_layer < 0 || exit_layer > config.n_layers) {
    throw ConfigError("exit layer " + std::to_string(exit_layer) + " outside [0, " +
                      std::to_string(config.n_layers) + "]");
  }
  if (heads_evaluated < 0) throw ConfigError("heads_evaluated must be non-negative");
  return static_cast<std::uint64_t>(exit_layer) * block_flops(config, context_len).total() +
         static_cast<std::uint64_t>(heads_evaluated) * head_flops(config);
}

std::uint64_t flops_full_token(const ModelConfig& config, std::size_t context_len) {
  return flops_per_token(config, config.n_layers, 1, context_len);
}

}  // namespace lite
