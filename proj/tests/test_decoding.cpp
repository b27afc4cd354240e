#include <random>

#include "doctest.h"
#include "lite/decoding/flops.hpp"
#include "lite/decoding/generate.hpp"
#include "lite/decoding/trace_io.hpp"
#include "lite/errors.hpp"
#include "lite/numcore/kernels.hpp"
#include "test_util.hpp"

using namespace lite;
using kernels::FlopScope;

namespace {

Model decode_model(std::uint64_t seed, int layers = 4) {
  Model m;
  m.config = test::micro_config(layers);
  m.config.selected_exit_layers.clear();
  for (int l = 1; l < layers; ++l) m.config.selected_exit_layers.push_back(l);
  m.params = init_params(m.config, seed);
  // Larger weights give peaked, varied confidences.
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 0.5f);
  for (auto& [name, t] : m.params.named()) {
    if (t->rank() == 2) for (auto& v : t->data) v = dist(rng);
  }
  return m;
}

Prompt random_prompt(std::uint64_t seed, int max_new = 12) {
  Prompt p;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(1, 15);
  std::uniform_int_distribution<int> len(1, 10);
  const int n = len(rng);
  for (int i = 0; i < n; ++i) p.tokens.push_back(tok(rng));
  p.id = "p" + std::to_string(seed);
  p.max_new_tokens = max_new;
  return p;
}

ExitPolicy random_policy(const ModelConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> thr(0.1, 1.0);
  ExitPolicy p;
  for (int l : c.selected_exit_layers) {
    if (rng() % 3 == 0) continue;
    p.checkpoints.push_back({l, thr(rng)});
  }
  return p;
}

std::string csv_of(const GenerationTrace& t) {
  return trace_table(std::span<const GenerationTrace>(&t, 1)).to_string();
}

}  // namespace

TEST_CASE("greedy pick") {
  std::vector<float> onehot(16, 0.0f);
  onehot[7] = 1.0f;
  CHECK(greedy_pick(onehot) == 7);
  std::vector<float> tie(16, 0.01f);
  tie[3] = tie[9] = 0.4f;
  CHECK(greedy_pick(tie) == 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> p(64);
    for (auto& v : p) v = u(rng);
    int best = 0;
    for (int i = 1; i < 64; ++i) if (p[std::size_t(i)] > p[std::size_t(best)]) best = i;
    CHECK(greedy_pick(p) == best);
  }
  CHECK_THROWS_AS(greedy_pick(std::vector<float>{}), DimensionError);
}

TEST_CASE("flops model structure") {
  const ModelConfig c;
  CHECK(flops_per_token(c, c.n_layers, 1, 40) == flops_full_token(c, 40));
  CHECK(flops_per_token(c, 3, 1, 40) < flops_full_token(c, 40));
  ModelConfig wide = c;
  wide.d_ff *= 2;
  const BlockFlops a = block_flops(c, 40), b = block_flops(wide, 40);
  CHECK(b.attn_projections == a.attn_projections);
  CHECK(b.attn_mixing == a.attn_mixing);
  CHECK(b.mlp == 2 * a.mlp);
  CHECK(a.total() == 8ull * 40 * 128 * 128 + 4ull * 40 * 40 * 128 + 4ull * 40 * 128 * 512);
  CHECK(head_flops(c) == 4ull * 128 + 2ull * 128 * 64);
  CHECK_THROWS_AS(flops_per_token(c, 9, 1, 40), ConfigError);
}

TEST_CASE("analytic flops agree with the instrumented counter") {
  const Model m = decode_model(2, 2);
  const Prompt p = random_prompt(3, 10);
  FlopScope scope;
  const GenerationTrace t = generate_full(m, p);
  const double measured = double(scope.count());
  const double analytic = double(t.total_flops());
  CHECK(std::abs(measured - analytic) / measured < 0.05);
}

TEST_CASE("full decoding charges the full cost at every context length") {
  const Model m = decode_model(4);
  const Prompt p = random_prompt(5);
  const GenerationTrace t = generate_full(m, p);
  std::uint64_t want = 0;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    CHECK(t.steps[i].exit_layer == m.config.n_layers);
    CHECK(t.steps[i].context_len == p.tokens.size() + i);
    want += flops_full_token(m.config, p.tokens.size() + i);
  }
  CHECK(t.total_flops() == want);
  CHECK(t.length() <= std::size_t(p.max_new_tokens));
}

TEST_CASE("reduction cases are byte identical") {
  const Model m = decode_model(6);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Prompt p = random_prompt(s);
    const GenerationTrace full = generate_full(m, p);
    CHECK(csv_of(generate_fixed_exit(m, p, m.config.n_layers)) == csv_of(full));
    CHECK(csv_of(generate_dynamic(m, p, ExitPolicy{})) == csv_of(full));
    CHECK(generate_dynamic(m, p, ExitPolicy{}).text == full.text);
  }
}

TEST_CASE("fixed exit stops at its layer") {
  const Model m = decode_model(7);
  const Prompt p = random_prompt(8);
  const GenerationTrace t = generate_fixed_exit(m, p, 2);
  for (const auto& s : t.steps) {
    CHECK(s.exit_layer == 2);
    CHECK(s.flops < flops_full_token(m.config, s.context_len));
  }
  CHECK_THROWS_AS(generate_fixed_exit(m, p, 0), ConfigError);
  CHECK_THROWS_AS(generate_fixed_exit(m, p, 5), ConfigError);
}

TEST_CASE("dynamic exit matches the full-forward replay oracle") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Model m = decode_model(100 + s % 3);
    const Prompt p = random_prompt(s);
    const ExitPolicy pol = random_policy(m.config, s);
    const GenerationTrace got = generate_dynamic(m, p, pol);
    const GenerationTrace want = replay_dynamic_oracle(m, p, pol);
    REQUIRE(got.steps.size() == want.steps.size());
    for (std::size_t i = 0; i < got.steps.size(); ++i) {
      CHECK(got.steps[i].token == want.steps[i].token);
      CHECK(got.steps[i].exit_layer == want.steps[i].exit_layer);
      CHECK(got.steps[i].confidence == want.steps[i].confidence);
      CHECK(got.steps[i].heads_evaluated == want.steps[i].heads_evaluated);
    }
    for (const auto& st : got.steps) {
      if (st.exit_layer == m.config.n_layers) continue;
      bool found = false;
      for (const auto& c : pol.checkpoints) {
        if (c.layer == st.exit_layer) {
          found = true;
          CHECK(st.confidence >= c.threshold);
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("confident first checkpoint exits immediately") {
  const Model m = decode_model(9);
  ExitPolicy pol;
  // Every distribution over 64 tokens has max probability >= 1/64.
  pol.checkpoints = {{1, 0.015}, {2, 0.9}};
  const GenerationTrace t = generate_dynamic(m, random_prompt(10), pol);
  for (const auto& s : t.steps) {
    CHECK(s.exit_layer == 1);
    CHECK(s.heads_evaluated == 1);
    CHECK(s.flops == flops_per_token(m.config, 1, 1, s.context_len));
  }
}

TEST_CASE("unreachable thresholds fall back to the final layer") {
  const Model m = decode_model(11);
  ExitPolicy pol;
  pol.checkpoints = {{1, 1.0}, {3, 1.0}};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Prompt p = random_prompt(s);
    const GenerationTrace full = generate_full(m, p);
    const GenerationTrace dyn = generate_dynamic(m, p, pol);
    CHECK(dyn.text == full.text);
    for (const auto& st : dyn.steps) {
      if (st.confidence < 1.0) CHECK(st.heads_evaluated == 3);
    }
    // Extra head checks are charged, so the fallback path costs more.
    if (!dyn.steps.empty()) CHECK(dyn.total_flops() > full.total_flops());
    CHECK(dyn.total_flops_uncharged() == full.total_flops());
  }
}

TEST_CASE("early exits cost less than full decoding per step") {
  const Model m = decode_model(12);
  ExitPolicy pol;
  pol.checkpoints = {{1, 0.3}, {2, 0.3}, {3, 0.3}};
  const GenerationTrace t = generate_dynamic(m, random_prompt(13), pol);
  for (const auto& s : t.steps) {
    if (s.exit_layer < m.config.n_layers) CHECK(s.flops < flops_full_token(m.config, s.context_len));
  }
}

TEST_CASE("generation guards and determinism") {
  const Model m = decode_model(14);
  Prompt p = random_prompt(15);
  p.max_new_tokens = 48;
  CHECK_THROWS_AS(generate_full(m, p), LengthError);
  CHECK_THROWS_AS(generate_full(m, Prompt{}), LengthError);
  ExitPolicy bad;
  bad.checkpoints = {{2, 0.5}, {1, 0.5}};
  CHECK_THROWS_AS(generate_dynamic(m, random_prompt(1), bad), ConfigError);
  const ExitPolicy pol = random_policy(m.config, 3);
  CHECK(csv_of(generate_dynamic(m, random_prompt(2), pol)) ==
        csv_of(generate_dynamic(m, random_prompt(2), pol)));
  std::vector<Prompt> prompts;
  for (std::uint64_t s = 0; s < 6; ++s) prompts.push_back(random_prompt(s));
  const auto one = generate_all(m, prompts, DecodeMode::dynamic(pol), 1);
  const auto many = generate_all(m, prompts, DecodeMode::dynamic(pol), 3);
  CHECK(trace_table(one).to_string() == trace_table(many).to_string());
}

TEST_CASE("zero new tokens gives an empty trace") {
  const Model m = decode_model(16);
  const GenerationTrace t = generate_full(m, random_prompt(1, 0));
  CHECK(t.steps.empty());
  CHECK(t.text.empty());
  CHECK(t.stop == StopReason::MaxNewTokens);
}

TEST_CASE("engine strings") {
  CHECK(DecodeMode::parse("full").kind == DecodeKind::Full);
  CHECK(DecodeMode::parse("fixed:3").fixed_layer == 3);
  CHECK(DecodeMode::parse("fixed:3").describe() == "fixed:3");
  CHECK_THROWS_AS(DecodeMode::parse("fixed:x"), ConfigError);
  CHECK_THROWS_AS(DecodeMode::parse("fixed:3x"), ConfigError);
  CHECK_THROWS_AS(DecodeMode::parse("beam"), ConfigError);
}

TEST_CASE("policy text format") {
  ExitPolicy p;
  p.checkpoints = {{2, 0.95}, {4, 0.9}, {6, 0.15}};
  p.calibration_ids = {"00aa", "ff01"};
  const ExitPolicy back = ExitPolicy::parse(p.serialize());
  CHECK(back.checkpoints == p.checkpoints);
  CHECK(back.calibration_ids == p.calibration_ids);
  CHECK_THROWS_AS(ExitPolicy::parse("2 0.9 7\n"), ConfigError);
  CHECK_THROWS_AS(ExitPolicy::parse("two 0.9\n"), ConfigError);
  const ModelConfig c;
  CHECK_NOTHROW(p.validate(c));
  ExitPolicy q = p;
  q.checkpoints[0].layer = 3;
  CHECK_THROWS_AS(q.validate(c), ConfigError);
  q = p;
  q.checkpoints[1].threshold = 0.0;
  CHECK_THROWS_AS(q.validate(c), ConfigError);
  ExitPolicy lower = p;
  lower.checkpoints[0].threshold = 0.5;
  CHECK(lower.pointwise_at_most(p));
  CHECK_FALSE(p.pointwise_at_most(lower));
}

TEST_CASE("trace csv round trip and summary") {
  const Model m = decode_model(17);
  std::vector<GenerationTrace> traces;
  for (std::uint64_t s = 0; s < 4; ++s) {
    traces.push_back(generate_dynamic(m, random_prompt(s), random_policy(m.config, s)));
  }
  const auto table = trace_table(traces);
  const auto back = traces_from_table(io::CsvTable::parse(table.to_string()));
  std::size_t nonempty = 0;
  for (const auto& t : traces) nonempty += t.steps.empty() ? 0 : 1;
  REQUIRE(back.size() == nonempty);
  std::size_t j = 0;
  for (const auto& t : traces) {
    if (t.steps.empty()) continue;
    CHECK(back[j].tokens == t.tokens);
    CHECK(back[j].total_flops() == t.total_flops());
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      CHECK(back[j].steps[i].confidence == t.steps[i].confidence);
    }
    ++j;
  }
  const io::Json s = trace_summary(traces, "dynamic");
  CHECK(s["prompts"].size() == traces.size());
  CHECK(s["prompts"][0]["T"].get<std::size_t>() == traces[0].length());
  CHECK(s["prompts"][0].contains("stop_reason"));
}
