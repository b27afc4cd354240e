#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lite/decoding/generate.hpp"
#include "lite/training/dataset.hpp"

namespace lite {

struct EvalOptions {
  int max_new_tokens = 64;
  int threads = 1;
};

struct PromptOutcome {
  std::string prompt_id;
  std::string family;
  std::string expected;
  std::string full_text;
  std::string dynamic_text;
  std::size_t full_tokens = 0;
  std::size_t dynamic_tokens = 0;
  std::uint64_t full_flops = 0;
  std::uint64_t dynamic_flops = 0;
  std::uint64_t dynamic_flops_uncharged = 0;
  double similarity = 1.0;
};

struct CostSummary {
  std::size_t prompts = 0;
  double accuracy_full = 0.0;  // exact match, fraction
  double accuracy_dynamic = 0.0;
  double edit_full = 0.0;  // mean normalized edit distance to the reference
  double edit_dynamic = 0.0;
  std::uint64_t flops_full = 0;
  std::uint64_t flops_dynamic = 0;
  std::uint64_t flops_dynamic_uncharged = 0;
  double mean_tokens_full = 0.0;
  double mean_tokens_dynamic = 0.0;
  double mean_similarity = 1.0;

  double mean_flops_full() const;
  double mean_flops_dynamic() const;
  double improvement_pct() const;
  double improvement_uncharged_pct() const;
};

struct CostReport {
  std::string policy_name;
  CostSummary overall;
  std::map<std::string, CostSummary> by_family;
  std::map<int, double> exit_percent;
  std::vector<PromptOutcome> prompts;
};

// 100 * (1 - dynamic / full).
double improvement_pct(std::uint64_t full, std::uint64_t dynamic);

// Percent of generated tokens (EOS steps included) leaving at each layer.
std::map<int, double> exit_histogram(std::span<const GenerationTrace> traces);

// Throws ConfigError when a prompt was also used to fit the policy.
void require_disjoint(const ExitPolicy& policy, std::span<const InstructionExample> examples);

CostSummary summarize(std::span<const PromptOutcome> outcomes);

CostReport evaluate_cost_quality(const Model& model, std::span<const InstructionExample> examples,
                                 const ExitPolicy& policy, const EvalOptions& options = {},
                                 const std::string& policy_name = "policy");

struct NamedPolicy {
  std::string name;
  ExitPolicy policy;
};

// Full decoding runs once; each policy is then decoded dynamically.
std::vector<CostReport> threshold_sweep(const Model& model,
                                        std::span<const InstructionExample> examples,
                                        std::span<const NamedPolicy> policies,
                                        const EvalOptions& options = {});

// Exact-match accuracy of one engine against the reference answers.
double task_accuracy(const Model& model, std::span<const InstructionExample> examples,
                     const DecodeMode& mode, const EvalOptions& options = {});

}  // namespace lite
