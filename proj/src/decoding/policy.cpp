#include "lite/decoding/policy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lite/errors.hpp"
#include "lite/io/kv_text.hpp"

namespace lite {

namespace {
constexpr std::string_view kCalibrationTag = "#@calibration_id";
}

void ExitPolicy::validate(const ModelConfig& config) const {
  const auto& selected = config.selected_exit_layers;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const auto& c = checkpoints[i];
    if (std::find(selected.begin(), selected.end(), c.layer) == selected.end()) {
      throw ConfigError("policy layer " + std::to_string(c.layer) + " is not a selected exit layer");
    }
    if (i > 0 && c.layer <= checkpoints[i - 1].layer) {
      throw ConfigError("policy layers must be strictly increasing");
    }
    if (!(c.threshold > 0.0 && c.threshold <= 1.0)) {
      throw ConfigError("policy threshold " + io::format_double(c.threshold) + " outside (0, 1]");
    }
  }
}

bool ExitPolicy::pointwise_at_most(const ExitPolicy& other) const {
  if (checkpoints.size() != other.checkpoints.size()) return false;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i].layer != other.checkpoints[i].layer) return false;
    if (checkpoints[i].threshold > other.checkpoints[i].threshold) return false;
  }
  return true;
}

std::string ExitPolicy::serialize() const {
  std::string out = "# layer threshold\n";
  for (const auto& c : checkpoints) {
    out += std::to_string(c.layer) + " " + io::format_double(c.threshold) + "\n";
  }
  for (const auto& id : calibration_ids) out += std::string(kCalibrationTag) + " " + id + "\n";
  return out;
}

ExitPolicy ExitPolicy::parse(std::string_view text) {
  ExitPolicy policy;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind(kCalibrationTag, 0) == 0) {
      std::istringstream fields(line.substr(kCalibrationTag.size()));
      std::string id;
      while (fields >> id) policy.calibration_ids.insert(id);
      continue;
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    Checkpoint c;
    std::string rest;
    if (!(fields >> c.layer >> c.threshold) || (fields >> rest)) {
      throw ConfigError("policy line " + std::to_string(line_no) + ": expected 'layer threshold'");
    }
    policy.checkpoints.push_back(c);
  }
  return policy;
}

ExitPolicy ExitPolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open policy file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExitPolicy::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write policy file '" + path + "'");
  out << serialize();
}

}  // namespace lite
