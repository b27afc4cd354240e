#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lite/analysis/alignment.hpp"
#include "lite/decoding/policy.hpp"

namespace lite {

// Confidence bins of width 0.05: bin k covers [k/20, (k+1)/20), the last bin
// also holds confidence 1.
inline constexpr int kConfidenceBins = 20;
double bin_edge(int k);
int confidence_bin(double confidence);

struct ConfidenceBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::size_t matches = 0;

  bool empty() const { return count == 0; }
  // Fraction of samples agreeing with the final layer; 0 for empty bins.
  double alignment() const;
};

struct LayerCurve {
  int layer = 0;
  std::vector<ConfidenceBin> bins;

  std::size_t total() const;
  // Alignment of the highest non-empty bin minus the lowest, in [−1, 1].
  double top_bottom_gap() const;
};

struct ConfidenceCurve {
  int final_layer = 0;
  std::vector<LayerCurve> layers;

  const LayerCurve& at(int layer) const;
};

ConfidenceCurve confidence_curve(const AlignmentSamples& samples);
ConfidenceCurve confidence_curve(const Model& model, std::span<const Prompt> prompts,
                                 int threads = 1);

// Per intermediate layer, the smallest edge τ ≥ 0.05 whose pooled alignment
// over all bins ≥ τ exceeds `target`. Layers with no such τ are left out.
ExitPolicy calibrate_thresholds(const ConfidenceCurve& curve, double target);

// Replays the exit rule over recorded decisions: the fraction of tokens that
// exit before the final layer and still agree with it. Returns {agreement,
// early-exit count}; agreement is 1 when nothing exits early.
struct ExitAgreement {
  double agreement = 1.0;
  std::size_t early_exits = 0;
  std::size_t steps = 0;
};
ExitAgreement policy_exit_agreement(const AlignmentSamples& samples, const ExitPolicy& policy);

}  // namespace lite
