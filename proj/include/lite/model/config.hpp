#pragma once

#include <string>
#include <vector>

#include "lite/io/kv_text.hpp"

namespace lite {

// Architecture hyperparameters plus the layers tapped for intermediate losses
// and early exit. Layers are 1-based: layer l is the output of decoder block l.
struct ModelConfig {
  int vocab_size = 64;
  int d_model = 128;
  int n_layers = 8;
  int n_heads = 4;
  int d_ff = 512;
  int max_seq_len = 256;
  std::vector<int> selected_exit_layers{2, 4, 6};
  // One weight per entry of loss_layers(); empty means equal weights.
  std::vector<double> loss_weights;

  // Throws ConfigError on any violated invariant.
  void validate() const;

  // selected_exit_layers with the final layer appended when missing.
  std::vector<int> loss_layers() const;
  // loss_weights, or equal weights when none are set.
  std::vector<double> effective_loss_weights() const;

  // Intermediate layers only (selected layers below n_layers).
  std::vector<int> intermediate_layers() const;

  io::KvDocument to_kv() const;
  static ModelConfig from_kv(const io::KvDocument& doc);

  // Keys understood by from_kv().
  static const std::vector<std::string>& kv_keys();

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace lite
