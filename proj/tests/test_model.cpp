#include <cstring>

#include "doctest.h"
#include "lite/errors.hpp"
#include "lite/model/checkpoint.hpp"
#include "lite/model/transformer.hpp"
#include "test_util.hpp"

using namespace lite;

TEST_CASE("config validation") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.loss_layers() == std::vector<int>{2, 4, 6, 8});
  CHECK(c.intermediate_layers() == std::vector<int>{2, 4, 6});
  c.n_heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.selected_exit_layers = {4, 2};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.selected_exit_layers = {0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.loss_weights = {1, 1, 1, 0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.loss_weights = {1, 1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config key-value round trip") {
  ModelConfig c;
  c.selected_exit_layers = {1, 3};
  c.loss_weights = {0.5, 0.25, 1.0};
  const ModelConfig back = ModelConfig::from_kv(io::KvDocument::parse(c.to_kv().serialize()));
  CHECK(back == c);
}

TEST_CASE("parameter count matches closed form") {
  const ModelConfig c;
  const std::size_t V = 64, d = 128, S = 256, N = 8, F = 512;
  const std::size_t want = V * d + S * d + N * (2 * d + 4 * d * d + 2 * d * F) + d + d * V;
  CHECK(init_params(c, 1).parameter_count() == want);
  // LITE adds no parameters: the same count holds for any tapped layer set.
  ModelConfig none = c;
  none.selected_exit_layers = {};
  CHECK(init_params(none, 1).parameter_count() == want);
}

TEST_CASE("init is seeded") {
  const ModelConfig c = test::micro_config();
  CHECK(init_params(c, 5).lm_head.data == init_params(c, 5).lm_head.data);
  CHECK(init_params(c, 5).lm_head.data != init_params(c, 6).lm_head.data);
  const auto shapes = expected_shapes(c);
  ModelParams p = init_params(c, 5);
  const auto named = p.named();
  REQUIRE(shapes.size() == named.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    CHECK(shapes[i].first == named[i].first);
    CHECK(shapes[i].second == named[i].second->shape);
  }
}

TEST_CASE("zeroed sublayer outputs make every block the identity") {
  Model m = test::micro_model(3, 3);
  for (auto& b : m.params.blocks) {
    std::fill(b.w_o.data.begin(), b.w_o.data.end(), 0.0f);
    std::fill(b.w_down.data.begin(), b.w_down.data.end(), 0.0f);
  }
  const auto tokens = test::random_tokens(7, 16, 4);
  const LayerStates s = forward(m, tokens);
  REQUIRE(s.hidden.size() == 4);
  for (std::size_t l = 1; l < s.hidden.size(); ++l) CHECK(s.hidden[l].data == s.hidden[0].data);
}

TEST_CASE("model is causal") {
  const Model m = test::micro_model(4);
  auto tokens = test::random_tokens(9, 16, 5);
  const Tensor a = final_logits(m, tokens);
  tokens.back() = (tokens.back() + 3) % 16;
  const Tensor b = final_logits(m, tokens);
  for (std::size_t r = 0; r + 1 < 9; ++r)
    for (std::size_t c = 0; c < 16; ++c) CHECK(a.at(r, c) == b.at(r, c));
  bool changed = false;
  for (std::size_t c = 0; c < 16; ++c) changed = changed || a.at(8, c) != b.at(8, c);
  CHECK(changed);
}

TEST_CASE("shared head at every layer") {
  const Model m = test::micro_model(6, 2);
  const auto tokens = test::random_tokens(5, 16, 7);
  const LayerStates s = forward(m, tokens);
  const LayerLogitsStack stack = logits_all_selected(m, tokens);
  REQUIRE(stack.logits.size() == 2);
  CHECK(stack.logits.at(1).data == head_at_layer(m, s.hidden[1]).data);
  CHECK(stack.logits.at(2).data == final_logits(m, tokens).data);
  CHECK_THROWS_AS(head_at_layer(m, Tensor::zeros({2, 5})), DimensionError);
}

TEST_CASE("embedding guards") {
  const Model m = test::micro_model(8);
  CHECK_THROWS_AS(forward(m, std::vector<int>(49, 1)), LengthError);
  CHECK_THROWS_AS(forward(m, std::vector<int>{1, 64}), IndexError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const Model m = test::micro_model(9, 2);
  const auto bytes = encode_checkpoint(m);
  const Model back = decode_checkpoint(bytes);
  CHECK(back.config == m.config);
  const auto a = m.params.named();
  const auto b = back.params.named();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::memcmp(a[i].second->data.data(), b[i].second->data.data(),
                      a[i].second->data.size() * sizeof(float)) == 0);
  }
  CHECK(encode_checkpoint(back) == bytes);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto bytes = encode_checkpoint(test::micro_model(10));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  CHECK_THROWS_AS(decode_checkpoint(cut), FormatError);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(extra), FormatError);
}
