#include "lite/analysis/alignment.hpp"

#include <algorithm>

#include "lite/errors.hpp"
#include "lite/model/transformer.hpp"
#include "lite/parallel.hpp"
#include "lite/training/tokenizer.hpp"

namespace lite {

std::size_t AlignmentSamples::layer_index(int layer) const {
  const auto it = std::find(layers.begin(), layers.end(), layer);
  if (it == layers.end()) throw IndexError("layer " + std::to_string(layer) + " was not sampled");
  return static_cast<std::size_t>(it - layers.begin());
}

namespace {

std::vector<StepDecisions> teacher_pass(const Model& model, const Prompt& prompt,
                                        std::span<const int> layers) {
  const ModelConfig& cfg = model.config;
  if (prompt.tokens.empty()) throw LengthError("prompt is empty");
  if (prompt.tokens.size() + static_cast<std::size_t>(prompt.max_new_tokens) >
      static_cast<std::size_t>(cfg.max_seq_len)) {
    throw LengthError("prompt plus max_new_tokens exceeds max_seq_len");
  }
  Tape<float> tape(false);
  const ModelVars vars = bind_params(tape, model.params, false);
  const std::size_t bound = tape.size();
  std::vector<int> context = prompt.tokens;
  std::vector<StepDecisions> out;
  for (int step = 0; step < prompt.max_new_tokens; ++step) {
    tape.truncate(bound);
    const std::size_t t = context.size();
    const std::size_t last[] = {t - 1};
    StepDecisions d;
    Var x = embed(tape, cfg, vars, context, 1, t);
    std::size_t next = 0;
    for (int l = 1; l <= cfg.n_layers; ++l) {
      x = decoder_block(tape, vars.blocks[static_cast<std::size_t>(l - 1)], x, 1, t, cfg.n_heads);
      if (next >= layers.size() || layers[next] != l) continue;
      const Var probs = ops::softmax(tape, lm_head(tape, vars, ops::take_rows(tape, x, last)));
      const auto p = tape.value(probs);
      const int tok = greedy_pick(p);
      d.tokens.push_back(tok);
      d.confidences.push_back(static_cast<double>(p[static_cast<std::size_t>(tok)]));
      ++next;
    }
    const int driver = d.tokens.back();
    out.push_back(std::move(d));
    if (driver == CharTokenizer::kEos) break;
    context.push_back(driver);
  }
  return out;
}

}  // namespace

AlignmentSamples collect_alignment(const Model& model, std::span<const Prompt> prompts,
                                   int threads) {
  AlignmentSamples samples;
  samples.layers = model.config.loss_layers();
  std::vector<std::vector<StepDecisions>> per_prompt(prompts.size());
  parallel_for(prompts.size(), threads, [&](std::size_t i) {
    per_prompt[i] = teacher_pass(model, prompts[i], samples.layers);
  });
  for (std::size_t i = 0; i < per_prompt.size(); ++i) {
    for (auto& d : per_prompt[i]) {
      d.prompt = i;
      samples.steps.push_back(std::move(d));
    }
  }
  return samples;
}

double AlignmentRow::percent() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(matches) / static_cast<double>(total);
}

const AlignmentRow& AlignmentReport::at(int layer) const {
  for (const auto& r : rows) {
    if (r.layer == layer) return r;
  }
  throw IndexError("no alignment row for layer " + std::to_string(layer));
}

AlignmentReport alignment_report(const AlignmentSamples& samples) {
  AlignmentReport report;
  for (std::size_t li = 0; li < samples.layers.size(); ++li) {
    AlignmentRow row;
    row.layer = samples.layers[li];
    for (const auto& s : samples.steps) {
      ++row.total;
      if (samples.matches_final(s, li)) ++row.matches;
    }
    report.rows.push_back(row);
  }
  return report;
}

AlignmentReport measure_alignment(const Model& model, std::span<const Prompt> prompts,
                                  int threads) {
  return alignment_report(collect_alignment(model, prompts, threads));
}

}  // namespace lite
