#include <cmath>
#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "lite/errors.hpp"
#include "lite/model/checkpoint.hpp"
#include "lite/model/transformer.hpp"
#include "lite/numcore/functional.hpp"
#include "lite/numcore/grad_check.hpp"
#include "lite/training/tokenizer.hpp"
#include "lite/training/trainer.hpp"
#include "test_util.hpp"

using namespace lite;

namespace {

LayerLogitsStack random_stack(std::uint64_t seed, std::size_t rows = 10) {
  LayerLogitsStack s;
  for (int l : {2, 4, 6, 8}) s.logits[l] = test::random_tensor({rows, 64}, seed * 31 + l, 2.0f);
  return s;
}

std::vector<int> random_targets(std::size_t n, std::uint64_t seed) {
  return test::random_tokens(n, 64, seed);
}

ops::Mask random_mask(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ops::Mask m(n);
  for (auto& v : m) v = rng() % 3 != 0;
  m[0] = 1;
  return m;
}

double oracle_ce(const Tensor& logits, std::span<const int> targets, std::span<const std::uint8_t> mask) {
  double sum = 0;
  int n = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (!mask[r]) continue;
    double mx = -1e30, z = 0;
    for (std::size_t c = 0; c < logits.cols(); ++c) mx = std::max(mx, double(logits.at(r, c)));
    for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(double(logits.at(r, c)) - mx);
    sum += std::log(z) + mx - logits.at(r, std::size_t(targets[r]));
    ++n;
  }
  return sum / n;
}

std::vector<InstructionExample> micro_data(int n, std::uint64_t seed) {
  DatasetSpec spec;
  spec.counts = {{TaskFamily::Copy, n}};
  spec.min_len = 1;
  spec.max_len = 2;
  spec.max_seq_len = 64;
  return gen_dataset(spec, seed);
}

}  // namespace

TEST_CASE("tokenizer round trip") {
  const std::string text = "Instruction: add mod 100\nInput: 12,7\nOutput: 19.";
  CHECK(CharTokenizer::decode(CharTokenizer::encode(text)) == text);
  CHECK_THROWS_AS(CharTokenizer::encode("W"), IndexError);
  CHECK_FALSE(CharTokenizer::can_encode("hello!"));
  const std::vector<int> toks{CharTokenizer::encode("ab")[0], CharTokenizer::kEos, 20};
  CHECK(CharTokenizer::decode(toks) == "a");
  for (int t = 1; t < CharTokenizer::kVocabSize; ++t) {
    CHECK(CharTokenizer::encode(std::string(1, CharTokenizer::symbol(t)))[0] == t);
  }
}

TEST_CASE("task definitions") {
  CHECK(solve_task(TaskFamily::Reverse, "abc") == "cba");
  CHECK(solve_task(TaskFamily::Copy, "xyz") == "xyz");
  CHECK(solve_task(TaskFamily::Upper, "abv") == "ABV");
  CHECK(solve_task(TaskFamily::Sort, "cab") == "abc");
  CHECK(solve_task(TaskFamily::Add, "75,40") == "15");
  CHECK(solve_task(TaskFamily::Pattern, "abcab") == "cab");
  CHECK(family_from_instruction("uppercase") == TaskFamily::Upper);
  CHECK(family_from_name("pattern") == TaskFamily::Pattern);
}

TEST_CASE("rendered example masks exactly the output and eos") {
  const InstructionExample ex = make_example("reverse", "abc", "cba", 256);
  CHECK(ex.prompt_text() == "Instruction: reverse\nInput: abc\nOutput: ");
  REQUIRE(ex.tokens.size() == ex.prompt_len + 4);
  CHECK(ex.tokens.back() == CharTokenizer::kEos);
  for (std::size_t i = 0; i < ex.tokens.size(); ++i) CHECK(bool(ex.mask[i]) == (i >= ex.prompt_len));
  CHECK_THROWS_AS(make_example("copy", std::string(300, 'a'), "a", 256), LengthError);
}

TEST_CASE("dataset generation is deterministic and respects exclusions") {
  const DatasetSpec spec = DatasetSpec::uniform(20);
  const auto a = gen_dataset(spec, 11);
  const auto b = gen_dataset(spec, 11);
  REQUIRE(a.size() == 120);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(encode_record(a[i]) == encode_record(b[i]));
  const auto ids = prompt_ids(a);
  CHECK(ids.size() == a.size());
  const auto c = gen_dataset(spec, 12, ids);
  for (const auto& ex : c) {
    CHECK(ids.count(ex.prompt_id()) == 0);
    CHECK(solve_task(ex.family, ex.input) == ex.output);
  }
}

TEST_CASE("dataset records survive a file round trip") {
  auto data = gen_dataset(DatasetSpec::uniform(3), 5);
  const auto path = (std::filesystem::temp_directory_path() / "lite_dataset_test.tsv").string();
  write_dataset(path, data);
  const auto back = read_dataset(path, 256);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].tokens == data[i].tokens);
    CHECK(back[i].output == data[i].output);
  }
  CHECK_THROWS_AS(decode_record("only\ttwo", 256), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("shifted targets") {
  const std::vector<int> toks{5, 6, 7, 0};
  const ops::Mask m{0, 0, 1, 1};
  const auto s = shift_targets(toks, m);
  CHECK(s.targets == std::vector<int>{6, 7, 0, 0});
  CHECK(s.mask == ops::Mask{0, 1, 1, 0});
}

TEST_CASE("standard loss matches per-token oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stack = random_stack(seed);
    const auto tg = random_targets(10, seed);
    const auto m = random_mask(10, seed);
    CHECK(standard_loss(stack, 8, tg, m) == doctest::Approx(oracle_ce(stack.logits.at(8), tg, m)).epsilon(1e-5));
  }
}

TEST_CASE("lite loss reduces to standard loss bit-exactly") {
  const ModelConfig c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto stack = random_stack(seed);
    const auto tg = random_targets(10, seed);
    const auto m = random_mask(10, seed);
    const float a = lite_loss(stack, tg, m, LiteWeights::standard(c));
    const float b = standard_loss(stack, 8, tg, m);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }
}

TEST_CASE("equal-weight lite loss is the mean of per-layer losses") {
  const ModelConfig c;
  const auto stack = random_stack(3);
  const auto tg = random_targets(10, 3);
  const auto m = random_mask(10, 3);
  double mean = 0;
  for (int l : {2, 4, 6, 8}) mean += cross_entropy(stack.logits.at(l), tg, m) / 4.0;
  CHECK(lite_loss(stack, tg, m, LiteWeights::equal(c)) == doctest::Approx(mean).epsilon(1e-6));

  LayerLogitsStack same;
  for (int l : {2, 4, 6, 8}) same.logits[l] = stack.logits.at(2);
  LiteWeights w;
  w.weights = {{2, 0.3}, {4, 1.7}, {6, 2.0}, {8, 0.1}};
  CHECK(lite_loss(same, tg, m, w) == doctest::Approx(cross_entropy(stack.logits.at(2), tg, m)).epsilon(1e-6));

  LiteWeights zero;
  zero.weights = {{2, 0.0}, {8, 0.0}};
  CHECK_THROWS_AS(lite_loss(stack, tg, m, zero), ConfigError);
}

TEST_CASE("prompt targets never affect the loss") {
  const auto ex = make_example("reverse", "abcd", "dcba", 256);
  const auto s = shift_targets(ex.tokens, ex.mask);
  const Tensor logits = test::random_tensor({ex.tokens.size(), 64}, 4, 2.0f);
  const float base = cross_entropy(logits, s.targets, s.mask);
  for (std::size_t i = 0; i < s.targets.size(); ++i) {
    auto t = s.targets;
    t[i] = (t[i] + 1) % 64;
    const float changed = cross_entropy(logits, t, s.mask);
    if (s.mask[i]) {
      CHECK(changed != base);
    } else {
      CHECK(changed == base);
    }
  }
}

TEST_CASE("lite objective passes gradient check") {
  for (int layers : {1, 2}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Model m = test::micro_model(seed, layers);
      if (layers == 2) m.config.selected_exit_layers = {1};
      const auto data = micro_data(2, seed);
      const InstructionExample* ptrs[] = {&data[0], &data[1]};
      const Batch batch = make_batch(ptrs);
      const LiteWeights w = LiteWeights::equal(m.config);
      std::vector<Tensor> params;
      for (const auto& [name, t] : m.params.named()) params.push_back(*t);
      GradCheckOptions opt;
      opt.coords_per_tensor = 6;
      opt.seed = seed;
      const auto r = grad_check(
          [&](Tape<double>& tape, std::span<const Var> vars) {
            const ModelVars mv = ModelVars::from_flat(vars, m.config.n_layers);
            return batch_loss<double>(tape, m.config, mv, batch, w).total;
          },
          params, opt);
      CHECK(r.max_relative_error < 1e-3);
    }
  }
}

TEST_CASE("zero learning rate step leaves parameters bit-identical") {
  Model m = test::micro_model(2);
  const auto before = encode_checkpoint(m);
  const auto data = micro_data(3, 2);
  const InstructionExample* ptrs[] = {&data[0], &data[1], &data[2]};
  AdamState adam;
  train_step(m, adam, LiteWeights::equal(m.config), make_batch(ptrs), 0.0);
  CHECK(encode_checkpoint(m) == before);
}

TEST_CASE("training is deterministic and reduces loss") {
  ModelConfig c = test::micro_config();
  TrainRunConfig run;
  run.epochs = 3;
  run.batch_size = 4;
  run.lr = 1e-2;
  run.warmup_steps = 0;
  run.lr_schedule = "constant";
  run.log_every = 1;
  const auto data = micro_data(16, 3);
  const auto a = train(c, run, LiteWeights::equal(c), data);
  const auto b = train(c, run, LiteWeights::equal(c), data);
  CHECK(encode_checkpoint(a.model) == encode_checkpoint(b.model));
  REQUIRE(a.epoch_log.size() == 3);
  CHECK(a.epoch_log[1].total_loss < a.epoch_log[0].total_loss);
  CHECK(a.epoch_log[2].total_loss < a.epoch_log[1].total_loss);
  CHECK(a.epoch_log[0].layer_loss.size() == 2);
  const std::string csv = train_log_csv(a.log);
  CHECK(csv.rfind("step,epoch,total_loss,loss_layer_1,loss_layer_2,lr,wall_ms\n", 0) == 0);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  Model m = test::micro_model(4);
  m.params.lm_head.data[0] = std::nanf("");
  const auto data = micro_data(2, 4);
  const InstructionExample* ptrs[] = {&data[0], &data[1]};
  AdamState adam;
  CHECK_THROWS_AS(train_step(m, adam, LiteWeights::equal(m.config), make_batch(ptrs), 1e-3),
                  NumericError);
}

TEST_CASE("training config parsing") {
  const auto doc = io::KvDocument::parse("epochs = 2\nlr = 0.01\nlr_schedule = constant\n");
  const auto r = TrainRunConfig::from_kv(doc);
  CHECK(r.epochs == 2);
  CHECK(r.lr == 0.01);
  CHECK_THROWS_AS(TrainRunConfig::from_kv(io::KvDocument::parse("epochs = 0\n")), ConfigError);
  CHECK_THROWS_AS(TrainRunConfig::from_kv(io::KvDocument::parse("epochs = two\n")), ConfigError);
}
