#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lite/model/params.hpp"
#include "lite/numcore/tensor.hpp"

namespace lite::test {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, scale);
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data) v = dist(rng);
  return t;
}

inline ModelConfig micro_config(int layers = 2) {
  ModelConfig c;
  c.vocab_size = 64;
  c.d_model = 8;
  c.n_layers = layers;
  c.n_heads = 2;
  c.d_ff = 32;
  c.max_seq_len = 48;
  c.selected_exit_layers = layers > 1 ? std::vector<int>{1} : std::vector<int>{};
  return c;
}

// A micro model with a wider init so gradients are not vanishingly small.
inline Model micro_model(std::uint64_t seed, int layers = 2, float scale = 0.3f) {
  Model m;
  m.config = micro_config(layers);
  m.params = init_params(m.config, seed);
  std::mt19937_64 rng(seed + 99);
  std::normal_distribution<float> dist(0.0f, scale);
  for (auto& [name, t] : m.params.named()) {
    if (t->rank() == 2) {
      for (auto& v : t->data) v = dist(rng);
    } else {
      for (auto& v : t->data) v = 1.0f + 0.1f * dist(rng);
    }
  }
  return m;
}

inline std::vector<int> random_tokens(std::size_t n, int vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, vocab - 1);
  std::vector<int> out(n);
  for (auto& t : out) t = dist(rng);
  return out;
}

}  // namespace lite::test
