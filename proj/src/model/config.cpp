#include "lite/model/config.hpp"

#include <algorithm>

#include "lite/errors.hpp"

namespace lite {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(d_model, "d_model");
  positive(n_layers, "n_layers");
  positive(n_heads, "n_heads");
  positive(d_ff, "d_ff");
  positive(max_seq_len, "max_seq_len");
  if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
  for (std::size_t i = 0; i < selected_exit_layers.size(); ++i) {
    const int l = selected_exit_layers[i];
    if (l < 1 || l > n_layers) {
      throw ConfigError("selected_exit_layers entry " + std::to_string(l) + " outside [1, " +
                        std::to_string(n_layers) + "]");
    }
    if (i > 0 && l <= selected_exit_layers[i - 1]) {
      throw ConfigError("selected_exit_layers must be strictly increasing");
    }
  }
  if (!loss_weights.empty()) {
    if (loss_weights.size() != loss_layers().size()) {
      throw ConfigError("loss_weights needs one weight per loss layer (" +
                        std::to_string(loss_layers().size()) + ")");
    }
    double total = 0;
    for (double w : loss_weights) {
      if (!(w >= 0)) throw ConfigError("loss_weights must be non-negative");
      total += w;
    }
    if (!(total > 0)) throw ConfigError("loss_weights must not sum to zero");
    if (!(loss_weights.back() > 0)) throw ConfigError("final layer loss weight must be positive");
  }
}

std::vector<int> ModelConfig::loss_layers() const {
  std::vector<int> layers = selected_exit_layers;
  if (layers.empty() || layers.back() != n_layers) layers.push_back(n_layers);
  return layers;
}

std::vector<double> ModelConfig::effective_loss_weights() const {
  if (!loss_weights.empty()) return loss_weights;
  return std::vector<double>(loss_layers().size(), 1.0);
}

std::vector<int> ModelConfig::intermediate_layers() const {
  std::vector<int> out;
  for (int l : selected_exit_layers) {
    if (l < n_layers) out.push_back(l);
  }
  return out;
}

io::KvDocument ModelConfig::to_kv() const {
  io::KvDocument doc;
  doc.set("vocab_size", std::to_string(vocab_size));
  doc.set("d_model", std::to_string(d_model));
  doc.set("n_layers", std::to_string(n_layers));
  doc.set("n_heads", std::to_string(n_heads));
  doc.set("d_ff", std::to_string(d_ff));
  doc.set("max_seq_len", std::to_string(max_seq_len));
  doc.set("selected_exit_layers", io::join_ints(selected_exit_layers));
  if (!loss_weights.empty()) doc.set("loss_weights", io::join_doubles(loss_weights));
  return doc;
}

const std::vector<std::string>& ModelConfig::kv_keys() {
  static const std::vector<std::string> keys{"vocab_size", "d_model",     "n_layers",
                                             "n_heads",    "d_ff",        "max_seq_len",
                                             "selected_exit_layers",      "loss_weights"};
  return keys;
}

ModelConfig ModelConfig::from_kv(const io::KvDocument& doc) {
  ModelConfig c;
  auto get = [&](const char* key, int fallback) {
    return static_cast<int>(doc.get_int(key, fallback));
  };
  c.vocab_size = get("vocab_size", c.vocab_size);
  c.d_model = get("d_model", c.d_model);
  c.n_layers = get("n_layers", c.n_layers);
  c.n_heads = get("n_heads", c.n_heads);
  c.d_ff = get("d_ff", c.d_ff);
  c.max_seq_len = get("max_seq_len", c.max_seq_len);
  if (doc.has("selected_exit_layers")) c.selected_exit_layers = doc.get_int_list("selected_exit_layers");
  if (doc.has("loss_weights")) c.loss_weights = doc.get_double_list("loss_weights");
  c.validate();
  return c;
}

}  // namespace lite
