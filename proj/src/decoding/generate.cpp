#include "lite/decoding/generate.hpp"

#include <algorithm>

#include "lite/decoding/flops.hpp"
#include "lite/errors.hpp"
#include "lite/model/transformer.hpp"
#include "lite/numcore/functional.hpp"
#include "lite/parallel.hpp"
#include "lite/training/tokenizer.hpp"

namespace lite {

Prompt prompt_from_example(const InstructionExample& example, int max_new_tokens) {
  Prompt p;
  p.id = example.prompt_id();
  const auto toks = example.prompt_tokens();
  p.tokens.assign(toks.begin(), toks.end());
  p.max_new_tokens = max_new_tokens;
  return p;
}

Prompt prompt_from_text(std::string_view text, int max_new_tokens) {
  Prompt p;
  p.tokens = CharTokenizer::encode(text);
  p.max_new_tokens = max_new_tokens;
  InstructionExample tmp;
  tmp.tokens = p.tokens;
  tmp.prompt_len = p.tokens.size();
  p.id = tmp.prompt_id();
  return p;
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::Eos: return "eos";
    case StopReason::MaxNewTokens: return "max_new_tokens";
  }
  return "unknown";
}

std::uint64_t GenerationTrace::total_flops() const {
  std::uint64_t s = 0;
  for (const auto& st : steps) s += st.flops;
  return s;
}

std::uint64_t GenerationTrace::total_flops_uncharged() const {
  std::uint64_t s = 0;
  for (const auto& st : steps) s += st.flops_uncharged;
  return s;
}

int greedy_pick(std::span<const float> probs) {
  if (probs.empty()) throw DimensionError("greedy_pick on an empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<int>(best);
}

DecodeMode DecodeMode::parse(std::string_view spec, const ExitPolicy& policy) {
  if (spec == "full") return full();
  if (spec == "dynamic") return dynamic(policy);
  if (spec.rfind("fixed:", 0) == 0) {
    const std::string num(spec.substr(6));
    std::size_t used = 0;
    int layer = 0;
    try {
      layer = std::stoi(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) throw ConfigError("bad fixed exit layer '" + num + "'");
    return fixed(layer);
  }
  throw ConfigError("unknown engine '" + std::string(spec) + "' (full, fixed:<layer>, dynamic)");
}

std::string DecodeMode::describe() const {
  switch (kind) {
    case DecodeKind::Full: return "full";
    case DecodeKind::Fixed: return "fixed:" + std::to_string(fixed_layer);
    case DecodeKind::Dynamic: return "dynamic";
  }
  return "unknown";
}

namespace {

struct HeadReading {
  int token = 0;
  double confidence = 0.0;
};

HeadReading read_probs(std::span<const float> probs) {
  const int tok = greedy_pick(probs);
  return {tok, static_cast<double>(probs[static_cast<std::size_t>(tok)])};
}

void check_prompt(const Model& model, const Prompt& prompt) {
  if (prompt.tokens.empty()) throw LengthError("prompt is empty");
  if (prompt.max_new_tokens < 0) throw ConfigError("max_new_tokens must be non-negative");
  const std::size_t need = prompt.tokens.size() + static_cast<std::size_t>(prompt.max_new_tokens);
  if (need > static_cast<std::size_t>(model.config.max_seq_len)) {
    throw LengthError("prompt of " + std::to_string(prompt.tokens.size()) + " tokens plus " +
                      std::to_string(prompt.max_new_tokens) + " new tokens exceeds max_seq_len " +
                      std::to_string(model.config.max_seq_len));
  }
}

// Shared greedy loop; `step` maps the current context to (token step record).
template <typename StepFn>
GenerationTrace run_loop(const Model& model, const Prompt& prompt, StepFn&& step) {
  check_prompt(model, prompt);
  GenerationTrace trace;
  trace.prompt_id = prompt.id;
  std::vector<int> context = prompt.tokens;
  trace.stop = StopReason::MaxNewTokens;
  for (int t = 0; t < prompt.max_new_tokens; ++t) {
    TokenStep s = step(context);
    s.t = t;
    s.context_len = context.size();
    trace.steps.push_back(s);
    if (s.token == CharTokenizer::kEos) {
      trace.stop = StopReason::Eos;
      break;
    }
    trace.tokens.push_back(s.token);
    context.push_back(s.token);
  }
  trace.text = CharTokenizer::decode(trace.tokens);
  return trace;
}

}  // namespace

GenerationTrace generate(const Model& model, const Prompt& prompt, const DecodeMode& mode) {
  const ModelConfig& cfg = model.config;
  std::vector<ExitPolicy::Checkpoint> checks;
  int stop_layer = cfg.n_layers;
  if (mode.kind == DecodeKind::Fixed) {
    if (mode.fixed_layer < 1 || mode.fixed_layer > cfg.n_layers) {
      throw ConfigError("fixed exit layer " + std::to_string(mode.fixed_layer) + " outside [1, " +
                        std::to_string(cfg.n_layers) + "]");
    }
    stop_layer = mode.fixed_layer;
  } else if (mode.kind == DecodeKind::Dynamic) {
    mode.policy.validate(cfg);
    checks = mode.policy.checkpoints;
  }

  Tape<float> tape(false);
  const ModelVars vars = bind_params(tape, model.params, false);
  const std::size_t bound = tape.size();

  return run_loop(model, prompt, [&](const std::vector<int>& context) {
    tape.truncate(bound);
    const std::size_t t = context.size();
    const std::size_t last[] = {t - 1};
    Var x = embed(tape, cfg, vars, context, 1, t);
    TokenStep s;
    std::size_t next = 0;
    for (int l = 1; l <= stop_layer; ++l) {
      x = decoder_block(tape, vars.blocks[static_cast<std::size_t>(l - 1)], x, 1, t, cfg.n_heads);
      const bool is_check = next < checks.size() && checks[next].layer == l;
      if (!is_check && l != stop_layer) continue;
      const Var probs = ops::softmax(tape, lm_head(tape, vars, ops::take_rows(tape, x, last)));
      const HeadReading r = read_probs(tape.value(probs));
      ++s.heads_evaluated;
      if (l == stop_layer || r.confidence >= checks[next].threshold) {
        s.exit_layer = l;
        s.token = r.token;
        s.confidence = r.confidence;
        break;
      }
      ++next;
    }
    s.flops = flops_per_token(cfg, s.exit_layer, s.heads_evaluated, t);
    s.flops_uncharged = flops_per_token(cfg, s.exit_layer, 1, t);
    return s;
  });
}

GenerationTrace generate_full(const Model& model, const Prompt& prompt) {
  return generate(model, prompt, DecodeMode::full());
}

GenerationTrace generate_fixed_exit(const Model& model, const Prompt& prompt, int layer) {
  return generate(model, prompt, DecodeMode::fixed(layer));
}

GenerationTrace generate_dynamic(const Model& model, const Prompt& prompt,
                                 const ExitPolicy& policy) {
  return generate(model, prompt, DecodeMode::dynamic(policy));
}

std::vector<GenerationTrace> generate_all(const Model& model, std::span<const Prompt> prompts,
                                          const DecodeMode& mode, int threads) {
  std::vector<GenerationTrace> out(prompts.size());
  parallel_for(prompts.size(), threads,
               [&](std::size_t i) { out[i] = generate(model, prompts[i], mode); });
  return out;
}

GenerationTrace replay_dynamic_oracle(const Model& model, const Prompt& prompt,
                                      const ExitPolicy& policy) {
  policy.validate(model.config);
  const int n = model.config.n_layers;
  return run_loop(model, prompt, [&](const std::vector<int>& context) {
    const LayerStates states = forward(model, context);
    auto reading_at = [&](int layer) {
      const Tensor& h = states.hidden[static_cast<std::size_t>(layer)];
      Tensor last = Tensor::zeros({1, h.cols()});
      std::copy_n(h.row(h.rows() - 1).begin(), h.cols(), last.data.begin());
      const Tensor probs = softmax(head_at_layer(model, last));
      return read_probs(probs.data);
    };
    TokenStep s;
    for (const auto& c : policy.checkpoints) {
      const HeadReading r = reading_at(c.layer);
      ++s.heads_evaluated;
      if (c.layer == n || r.confidence >= c.threshold) {
        s.exit_layer = c.layer;
        s.token = r.token;
        s.confidence = r.confidence;
        return s;
      }
    }
    const HeadReading r = reading_at(n);
    ++s.heads_evaluated;
    s.exit_layer = n;
    s.token = r.token;
    s.confidence = r.confidence;
    return s;
  });
}

}  // namespace lite
