#include "lite/analysis/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "lite/errors.hpp"

namespace lite {

double bin_edge(int k) { return static_cast<double>(k) / kConfidenceBins; }

int confidence_bin(double confidence) {
  int k = static_cast<int>(std::floor(confidence * kConfidenceBins));
  k = std::clamp(k, 0, kConfidenceBins - 1);
  while (k > 0 && confidence < bin_edge(k)) --k;
  while (k + 1 < kConfidenceBins && confidence >= bin_edge(k + 1)) ++k;
  return k;
}

double ConfidenceBin::alignment() const {
  return count == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(count);
}

std::size_t LayerCurve::total() const {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

double LayerCurve::top_bottom_gap() const {
  const ConfidenceBin* lo = nullptr;
  const ConfidenceBin* hi = nullptr;
  for (const auto& b : bins) {
    if (b.empty()) continue;
    if (!lo) lo = &b;
    hi = &b;
  }
  if (!lo) throw CalibrationError("layer " + std::to_string(layer) + " has no samples");
  return hi->alignment() - lo->alignment();
}

const LayerCurve& ConfidenceCurve::at(int layer) const {
  for (const auto& c : layers) {
    if (c.layer == layer) return c;
  }
  throw IndexError("no confidence curve for layer " + std::to_string(layer));
}

ConfidenceCurve confidence_curve(const AlignmentSamples& samples) {
  ConfidenceCurve curve;
  curve.final_layer = samples.layers.empty() ? 0 : samples.layers.back();
  for (std::size_t li = 0; li < samples.layers.size(); ++li) {
    LayerCurve lc;
    lc.layer = samples.layers[li];
    for (int k = 0; k < kConfidenceBins; ++k) {
      ConfidenceBin b;
      b.lower = bin_edge(k);
      b.upper = bin_edge(k + 1);
      lc.bins.push_back(b);
    }
    for (const auto& s : samples.steps) {
      auto& b = lc.bins[static_cast<std::size_t>(confidence_bin(s.confidences[li]))];
      ++b.count;
      if (samples.matches_final(s, li)) ++b.matches;
    }
    curve.layers.push_back(std::move(lc));
  }
  return curve;
}

ConfidenceCurve confidence_curve(const Model& model, std::span<const Prompt> prompts,
                                 int threads) {
  return confidence_curve(collect_alignment(model, prompts, threads));
}

ExitPolicy calibrate_thresholds(const ConfidenceCurve& curve, double target) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("calibration target must be in (0, 1)");
  bool any = false;
  for (const auto& lc : curve.layers) any = any || lc.total() > 0;
  if (!any) throw CalibrationError("confidence curve has no samples");

  ExitPolicy policy;
  for (const auto& lc : curve.layers) {
    if (lc.layer >= curve.final_layer) continue;
    for (int k = 1; k < kConfidenceBins; ++k) {
      std::size_t count = 0, matches = 0;
      for (int j = k; j < kConfidenceBins; ++j) {
        count += lc.bins[static_cast<std::size_t>(j)].count;
        matches += lc.bins[static_cast<std::size_t>(j)].matches;
      }
      if (count == 0) break;
      if (static_cast<double>(matches) / static_cast<double>(count) > target) {
        policy.checkpoints.push_back({lc.layer, bin_edge(k)});
        break;
      }
    }
  }
  return policy;
}

ExitAgreement policy_exit_agreement(const AlignmentSamples& samples, const ExitPolicy& policy) {
  std::vector<std::size_t> idx;
  for (const auto& c : policy.checkpoints) idx.push_back(samples.layer_index(c.layer));
  const int final_layer = samples.layers.back();
  ExitAgreement out;
  std::size_t agree = 0;
  for (const auto& s : samples.steps) {
    ++out.steps;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (policy.checkpoints[i].layer == final_layer) break;
      if (s.confidences[idx[i]] >= policy.checkpoints[i].threshold) {
        ++out.early_exits;
        if (samples.matches_final(s, idx[i])) ++agree;
        break;
      }
    }
  }
  if (out.early_exits > 0) {
    out.agreement = static_cast<double>(agree) / static_cast<double>(out.early_exits);
  }
  return out;
}

}  // namespace lite
