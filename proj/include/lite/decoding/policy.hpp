#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lite/model/config.hpp"

namespace lite {

// Ordered (layer, threshold) checkpoints for dynamic early exit. The final
// layer is the implicit fallback and never needs an entry.
//
// Text form, one checkpoint per line:
//   # comment
//   2 0.95
//   4 0.9
//   #@calibration_id 3f2a9c0d11e4b7a8
// "#@calibration_id" lines record the prompt ids the thresholds were fitted
// on so evaluation can refuse overlapping prompt sets.
struct ExitPolicy {
  struct Checkpoint {
    int layer = 0;
    double threshold = 1.0;
    bool operator==(const Checkpoint&) const = default;
  };

  std::vector<Checkpoint> checkpoints;
  std::set<std::string> calibration_ids;

  bool empty() const { return checkpoints.empty(); }

  // Throws ConfigError unless layers are strictly increasing members of the
  // config's selected exit layers and thresholds lie in (0, 1].
  void validate(const ModelConfig& config) const;

  // True when every threshold of `this` is <= the threshold `other` uses at
  // the same layer and both name the same layers.
  bool pointwise_at_most(const ExitPolicy& other) const;

  std::string serialize() const;
  static ExitPolicy parse(std::string_view text);
  static ExitPolicy load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace lite
