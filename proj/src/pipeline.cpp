#include "lite/pipeline.hpp"

#include <filesystem>

#include "lite/errors.hpp"
#include "lite/io/hash.hpp"
#include "lite/model/checkpoint.hpp"

#ifndef LITE_VERSION
#define LITE_VERSION "unknown"
#endif

namespace lite {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kDataKeys{
    "train_examples", "calibration_examples", "eval_examples", "min_len", "max_len",
    "data_seed",      "calibration_target",   "max_new_tokens", "dataset"};

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  train.validate();
  if (data.train_examples < 1) throw ConfigError("train_examples must be >= 1");
  if (data.calibration_examples < 0 || data.eval_examples < 0) {
    throw ConfigError("split sizes must be non-negative");
  }
  if (data.min_len < 1 || data.max_len < data.min_len) {
    throw ConfigError("need 1 <= min_len <= max_len");
  }
  if (!(calibration_target > 0.0 && calibration_target < 1.0)) {
    throw ConfigError("calibration_target must be in (0, 1)");
  }
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
}

std::vector<std::string> ExperimentConfig::kv_keys() {
  std::vector<std::string> keys = ModelConfig::kv_keys();
  const auto& t = TrainRunConfig::kv_keys();
  keys.insert(keys.end(), t.begin(), t.end());
  keys.insert(keys.end(), kDataKeys.begin(), kDataKeys.end());
  return keys;
}

ExperimentConfig ExperimentConfig::from_kv(const io::KvDocument& doc) {
  const auto unknown = doc.unknown_keys(kv_keys());
  if (!unknown.empty()) throw ConfigError("unknown config key '" + unknown.front() + "'");
  ExperimentConfig c;
  c.model = ModelConfig::from_kv(doc);
  c.train = TrainRunConfig::from_kv(doc);
  c.data.train_examples = static_cast<int>(doc.get_int("train_examples", c.data.train_examples));
  c.data.calibration_examples =
      static_cast<int>(doc.get_int("calibration_examples", c.data.calibration_examples));
  c.data.eval_examples = static_cast<int>(doc.get_int("eval_examples", c.data.eval_examples));
  c.data.min_len = static_cast<int>(doc.get_int("min_len", c.data.min_len));
  c.data.max_len = static_cast<int>(doc.get_int("max_len", c.data.max_len));
  c.data.seed = static_cast<std::uint64_t>(
      doc.get_int("data_seed", static_cast<long long>(c.data.seed)));
  c.calibration_target = doc.get_double("calibration_target", c.calibration_target);
  c.max_new_tokens = static_cast<int>(doc.get_int("max_new_tokens", c.max_new_tokens));
  c.dataset = doc.get_string("dataset", "");
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_kv(io::KvDocument::load(path));
}

io::KvDocument ExperimentConfig::to_kv() const {
  io::KvDocument doc = model.to_kv();
  const io::KvDocument train_doc = train.to_kv();
  for (const auto& [k, v] : train_doc.entries()) doc.set(k, v);
  doc.set("train_examples", std::to_string(data.train_examples));
  doc.set("calibration_examples", std::to_string(data.calibration_examples));
  doc.set("eval_examples", std::to_string(data.eval_examples));
  doc.set("min_len", std::to_string(data.min_len));
  doc.set("max_len", std::to_string(data.max_len));
  doc.set("data_seed", std::to_string(data.seed));
  doc.set("calibration_target", io::format_double(calibration_target));
  doc.set("max_new_tokens", std::to_string(max_new_tokens));
  if (!dataset.empty()) doc.set("dataset", dataset);
  return doc;
}

DatasetSpec spread_over_families(int total, const DataConfig& data, int max_seq_len) {
  DatasetSpec spec;
  spec.min_len = data.min_len;
  spec.max_len = data.max_len;
  spec.max_seq_len = max_seq_len;
  const int n = static_cast<int>(std::size(kAllFamilies));
  for (int i = 0; i < n; ++i) {
    spec.counts.emplace_back(kAllFamilies[i], total / n + (i < total % n ? 1 : 0));
  }
  return spec;
}

Splits make_splits(const DataConfig& data, int max_seq_len) {
  Splits s;
  s.train = gen_dataset(spread_over_families(data.train_examples, data, max_seq_len), data.seed);
  auto used = prompt_ids(s.train);
  s.calibration = gen_dataset(spread_over_families(data.calibration_examples, data, max_seq_len),
                              data.seed + 1, used);
  const auto cal_ids = prompt_ids(s.calibration);
  used.insert(cal_ids.begin(), cal_ids.end());
  s.evaluation =
      gen_dataset(spread_over_families(data.eval_examples, data, max_seq_len), data.seed + 2, used);
  return s;
}

TrainMode train_mode_from_name(std::string_view name) {
  if (name == "standard") return TrainMode::Standard;
  if (name == "lite") return TrainMode::Lite;
  throw ConfigError("unknown training mode '" + std::string(name) + "' (standard, lite)");
}

std::string_view train_mode_name(TrainMode mode) {
  return mode == TrainMode::Standard ? "standard" : "lite";
}

LiteWeights weights_for(TrainMode mode, const ModelConfig& config) {
  return mode == TrainMode::Standard ? LiteWeights::standard(config)
                                     : LiteWeights::from_config(config);
}

std::string dataset_id(std::span<const InstructionExample> examples) {
  std::string text;
  for (const auto& ex : examples) text += encode_record(ex) + "\n";
  return io::sha256_hex(text).substr(0, 16);
}

Model train_cached(const ExperimentConfig& config, TrainMode mode,
                   std::span<const InstructionExample> data, const std::string& cache_dir,
                   const TrainHooks& hooks) {
  const LiteWeights weights = weights_for(mode, config.model);
  std::string key_text = config.model.to_kv().serialize() + config.train.to_kv().serialize();
  key_text += "mode=" + std::string(train_mode_name(mode)) + "\n";
  key_text += "data=" + dataset_id(data) + "\n";
  const std::string key = io::sha256_hex(key_text).substr(0, 16);
  fs::path path;
  if (!cache_dir.empty()) {
    path = fs::path(cache_dir) / (std::string(train_mode_name(mode)) + "-" + key + ".ckpt");
    if (fs::exists(path)) return load_checkpoint(path.string());
  }
  TrainResult result = train(config.model, config.train, weights, data, hooks);
  if (!cache_dir.empty()) {
    fs::create_directories(cache_dir);
    const fs::path tmp = path.string() + ".tmp";
    save_checkpoint(tmp.string(), result.model);
    fs::rename(tmp, path);
  }
  return std::move(result.model);
}

void RunManifest::add_input(const std::string& path) { inputs[path] = io::sha256_file(path); }
void RunManifest::add_output(const std::string& path) { outputs[path] = io::sha256_file(path); }

io::Json RunManifest::to_json() const {
  io::Json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["seed"] = seed;
  j["version"] = version;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["timings_ms"] = timings_ms;
  return j;
}

void RunManifest::write(const std::string& path) const { io::write_json(path, to_json()); }

std::string version_string() { return LITE_VERSION; }

}  // namespace lite
