#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lite/decoding/generate.hpp"

namespace lite {

// Token decisions of every loss layer at one teacher-forced step. The final
// layer's greedy token drives the context.
struct StepDecisions {
  std::size_t prompt = 0;
  std::vector<int> tokens;          // aligned with AlignmentSamples::layers
  std::vector<double> confidences;  // max softmax probability per layer
};

struct AlignmentSamples {
  std::vector<int> layers;  // ascending; the last entry is the final layer
  std::vector<StepDecisions> steps;

  std::size_t layer_index(int layer) const;
  bool matches_final(const StepDecisions& s, std::size_t layer_idx) const {
    return s.tokens[layer_idx] == s.tokens.back();
  }
};

AlignmentSamples collect_alignment(const Model& model, std::span<const Prompt> prompts,
                                   int threads = 1);

struct AlignmentRow {
  int layer = 0;
  std::size_t matches = 0;
  std::size_t total = 0;
  double percent() const;
};

struct AlignmentReport {
  std::string dataset_id;
  std::string checkpoint_id;
  std::vector<AlignmentRow> rows;

  const AlignmentRow& at(int layer) const;
};

AlignmentReport alignment_report(const AlignmentSamples& samples);
AlignmentReport measure_alignment(const Model& model, std::span<const Prompt> prompts,
                                  int threads = 1);

}  // namespace lite
