#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lite/decoding/policy.hpp"
#include "lite/model/params.hpp"
#include "lite/training/dataset.hpp"

namespace lite {

// Prompt length plus max_new_tokens must fit in the model's max_seq_len.
struct Prompt {
  std::string id;
  std::vector<int> tokens;
  int max_new_tokens = 64;
};

Prompt prompt_from_example(const InstructionExample& example, int max_new_tokens);
Prompt prompt_from_text(std::string_view text, int max_new_tokens);

enum class StopReason { Eos, MaxNewTokens };
std::string_view stop_reason_name(StopReason reason);

// One greedy decoding step. `flops` charges every head evaluated on the way
// to the exit layer; `flops_uncharged` counts only the head that produced the
// token.
struct TokenStep {
  int t = 0;
  int token = 0;
  int exit_layer = 0;
  double confidence = 0.0;
  int heads_evaluated = 0;
  std::size_t context_len = 0;
  std::uint64_t flops = 0;
  std::uint64_t flops_uncharged = 0;
};

struct GenerationTrace {
  std::string prompt_id;
  std::vector<TokenStep> steps;  // includes the EOS step when one was emitted
  std::vector<int> tokens;       // generated tokens without EOS
  std::string text;
  StopReason stop = StopReason::MaxNewTokens;

  std::size_t length() const { return tokens.size(); }
  std::uint64_t total_flops() const;
  std::uint64_t total_flops_uncharged() const;
};

// Argmax; ties go to the lowest token id.
int greedy_pick(std::span<const float> probs);

enum class DecodeKind { Full, Fixed, Dynamic };

struct DecodeMode {
  DecodeKind kind = DecodeKind::Full;
  int fixed_layer = 0;
  ExitPolicy policy;

  static DecodeMode full() { return {}; }
  static DecodeMode fixed(int layer) { return {DecodeKind::Fixed, layer, {}}; }
  static DecodeMode dynamic(ExitPolicy policy) {
    return {DecodeKind::Dynamic, 0, std::move(policy)};
  }
  // "full", "fixed:<layer>" or "dynamic" (policy supplied separately).
  static DecodeMode parse(std::string_view spec, const ExitPolicy& policy = {});
  std::string describe() const;
};

// Greedy decoding without a KV cache: every step re-runs the needed layers
// over the whole context.
GenerationTrace generate(const Model& model, const Prompt& prompt, const DecodeMode& mode);
GenerationTrace generate_full(const Model& model, const Prompt& prompt);
GenerationTrace generate_fixed_exit(const Model& model, const Prompt& prompt, int layer);
GenerationTrace generate_dynamic(const Model& model, const Prompt& prompt,
                                 const ExitPolicy& policy);

std::vector<GenerationTrace> generate_all(const Model& model, std::span<const Prompt> prompts,
                                          const DecodeMode& mode, int threads = 1);

// Reference for dynamic decoding: each step runs the full forward pass, reads
// every policy layer through the head and then applies the exit rule. Returns
// the same trace fields as generate_dynamic except the FLOP counts.
GenerationTrace replay_dynamic_oracle(const Model& model, const Prompt& prompt,
                                      const ExitPolicy& policy);

}  // namespace lite
