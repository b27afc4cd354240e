#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lite/io/csv_json.hpp"
#include "lite/io/kv_text.hpp"
#include "lite/model/config.hpp"
#include "lite/model/params.hpp"
#include "lite/training/dataset.hpp"
#include "lite/training/trainer.hpp"

namespace lite {

struct DataConfig {
  int train_examples = 4000;
  int calibration_examples = 1200;
  int eval_examples = 1200;
  int min_len = 3;
  int max_len = 6;
  std::uint64_t seed = 7;
};

// Everything one experiment needs, read from a single key-value file. Model
// keys, training keys and the keys below share one namespace.
struct ExperimentConfig {
  ModelConfig model;
  TrainRunConfig train;
  DataConfig data;
  double calibration_target = 0.95;
  int max_new_tokens = 64;
  // Training data file for the train command.
  std::string dataset;

  void validate() const;
  static ExperimentConfig from_kv(const io::KvDocument& doc);
  static ExperimentConfig load(const std::string& path);
  io::KvDocument to_kv() const;
  static std::vector<std::string> kv_keys();
};

// Train, calibration and evaluation sets with pairwise disjoint prompts.
struct Splits {
  std::vector<InstructionExample> train;
  std::vector<InstructionExample> calibration;
  std::vector<InstructionExample> evaluation;
};

DatasetSpec spread_over_families(int total, const DataConfig& data, int max_seq_len);
Splits make_splits(const DataConfig& data, int max_seq_len);

enum class TrainMode { Standard, Lite };
TrainMode train_mode_from_name(std::string_view name);
std::string_view train_mode_name(TrainMode mode);
LiteWeights weights_for(TrainMode mode, const ModelConfig& config);

// Content hash of a dataset as written to disk.
std::string dataset_id(std::span<const InstructionExample> examples);

// Trains, or loads the checkpoint a previous identical run left in
// `cache_dir` (keyed by config, mode and dataset content). An empty
// cache_dir disables caching.
Model train_cached(const ExperimentConfig& config, TrainMode mode,
                   std::span<const InstructionExample> data, const std::string& cache_dir,
                   const TrainHooks& hooks = {});

// Run record written beside every command's outputs.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::map<std::string, double> timings_ms;
  std::string version;

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  io::Json to_json() const;
  void write(const std::string& path) const;
};

std::string version_string();

}  // namespace lite
