#include "lite/analysis/evaluation.hpp"

#include "lite/analysis/similarity.hpp"
#include "lite/errors.hpp"

namespace lite {

namespace {

double ratio(double num, std::size_t den) { return den == 0 ? 0.0 : num / static_cast<double>(den); }

std::vector<Prompt> make_prompts(std::span<const InstructionExample> examples, int max_new) {
  std::vector<Prompt> prompts;
  prompts.reserve(examples.size());
  for (const auto& ex : examples) prompts.push_back(prompt_from_example(ex, max_new));
  return prompts;
}

CostReport assemble(std::span<const InstructionExample> examples,
                    std::span<const GenerationTrace> full, std::span<const GenerationTrace> dyn,
                    const std::string& name) {
  CostReport report;
  report.policy_name = name;
  std::map<std::string, std::vector<PromptOutcome>> families;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    PromptOutcome o;
    o.prompt_id = full[i].prompt_id;
    o.family = std::string(family_name(examples[i].family));
    o.expected = examples[i].output;
    o.full_text = full[i].text;
    o.dynamic_text = dyn[i].text;
    o.full_tokens = full[i].length();
    o.dynamic_tokens = dyn[i].length();
    o.full_flops = full[i].total_flops();
    o.dynamic_flops = dyn[i].total_flops();
    o.dynamic_flops_uncharged = dyn[i].total_flops_uncharged();
    o.similarity = similarity_proxy(o.full_text, o.dynamic_text);
    families[o.family].push_back(o);
    report.prompts.push_back(std::move(o));
  }
  report.overall = summarize(report.prompts);
  for (const auto& [fam, outs] : families) report.by_family[fam] = summarize(outs);
  if (!dyn.empty()) report.exit_percent = exit_histogram(dyn);
  return report;
}

}  // namespace

double CostSummary::mean_flops_full() const { return ratio(static_cast<double>(flops_full), prompts); }
double CostSummary::mean_flops_dynamic() const {
  return ratio(static_cast<double>(flops_dynamic), prompts);
}
double CostSummary::improvement_pct() const { return lite::improvement_pct(flops_full, flops_dynamic); }
double CostSummary::improvement_uncharged_pct() const {
  return lite::improvement_pct(flops_full, flops_dynamic_uncharged);
}

double improvement_pct(std::uint64_t full, std::uint64_t dynamic) {
  if (full == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(dynamic) / static_cast<double>(full));
}

std::map<int, double> exit_histogram(std::span<const GenerationTrace> traces) {
  std::map<int, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& tr : traces) {
    for (const auto& s : tr.steps) {
      ++counts[s.exit_layer];
      ++total;
    }
  }
  if (total == 0) throw Error("exit histogram needs at least one generated token");
  std::map<int, double> pct;
  for (const auto& [layer, c] : counts) {
    pct[layer] = 100.0 * static_cast<double>(c) / static_cast<double>(total);
  }
  return pct;
}

void require_disjoint(const ExitPolicy& policy, std::span<const InstructionExample> examples) {
  std::size_t overlap = 0;
  std::string first;
  for (const auto& ex : examples) {
    const std::string id = ex.prompt_id();
    if (policy.calibration_ids.count(id)) {
      if (overlap++ == 0) first = id;
    }
  }
  if (overlap > 0) {
    throw ConfigError(std::to_string(overlap) +
                      " evaluation prompts were used for calibration (first: " + first + ")");
  }
}

CostSummary summarize(std::span<const PromptOutcome> outcomes) {
  CostSummary s;
  s.prompts = outcomes.size();
  double acc_f = 0, acc_d = 0, ed_f = 0, ed_d = 0, tok_f = 0, tok_d = 0, sim = 0;
  for (const auto& o : outcomes) {
    acc_f += o.full_text == o.expected ? 1.0 : 0.0;
    acc_d += o.dynamic_text == o.expected ? 1.0 : 0.0;
    ed_f += normalized_edit_distance(o.full_text, o.expected);
    ed_d += normalized_edit_distance(o.dynamic_text, o.expected);
    tok_f += static_cast<double>(o.full_tokens);
    tok_d += static_cast<double>(o.dynamic_tokens);
    sim += o.similarity;
    s.flops_full += o.full_flops;
    s.flops_dynamic += o.dynamic_flops;
    s.flops_dynamic_uncharged += o.dynamic_flops_uncharged;
  }
  s.accuracy_full = ratio(acc_f, s.prompts);
  s.accuracy_dynamic = ratio(acc_d, s.prompts);
  s.edit_full = ratio(ed_f, s.prompts);
  s.edit_dynamic = ratio(ed_d, s.prompts);
  s.mean_tokens_full = ratio(tok_f, s.prompts);
  s.mean_tokens_dynamic = ratio(tok_d, s.prompts);
  s.mean_similarity = s.prompts == 0 ? 1.0 : sim / static_cast<double>(s.prompts);
  return s;
}

CostReport evaluate_cost_quality(const Model& model, std::span<const InstructionExample> examples,
                                 const ExitPolicy& policy, const EvalOptions& options,
                                 const std::string& policy_name) {
  const NamedPolicy p{policy_name, policy};
  return threshold_sweep(model, examples, std::span<const NamedPolicy>(&p, 1), options).front();
}

std::vector<CostReport> threshold_sweep(const Model& model,
                                        std::span<const InstructionExample> examples,
                                        std::span<const NamedPolicy> policies,
                                        const EvalOptions& options) {
  for (const auto& p : policies) {
    p.policy.validate(model.config);
    require_disjoint(p.policy, examples);
  }
  const auto prompts = make_prompts(examples, options.max_new_tokens);
  const auto full = generate_all(model, prompts, DecodeMode::full(), options.threads);
  std::vector<CostReport> reports;
  for (const auto& p : policies) {
    const auto dyn = generate_all(model, prompts, DecodeMode::dynamic(p.policy), options.threads);
    reports.push_back(assemble(examples, full, dyn, p.name));
  }
  return reports;
}

double task_accuracy(const Model& model, std::span<const InstructionExample> examples,
                     const DecodeMode& mode, const EvalOptions& options) {
  const auto prompts = make_prompts(examples, options.max_new_tokens);
  const auto traces = generate_all(model, prompts, mode, options.threads);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (traces[i].text == examples[i].output) ++correct;
  }
  return ratio(static_cast<double>(correct), examples.size());
}

}  // namespace lite
