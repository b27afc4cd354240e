#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lite/io/kv_text.hpp"
#include "lite/model/params.hpp"
#include "lite/numcore/adam.hpp"
#include "lite/training/dataset.hpp"
#include "lite/training/loss.hpp"

namespace lite {

struct TrainRunConfig {
  int epochs = 20;
  int batch_size = 32;
  double lr = 1e-3;
  // "constant" or "cosine"; both use linear warmup over warmup_steps.
  std::string lr_schedule = "cosine";
  int warmup_steps = 100;
  double min_lr_ratio = 0.1;
  std::uint64_t seed = 1234;
  int log_every = 50;
  // Write a checkpoint after every N epochs; 0 writes only the final one.
  int checkpoint_every = 0;
  // Stop after this many optimizer steps; 0 means run all epochs.
  long max_steps = 0;
  AdamHyper adam;

  void validate() const;
  long total_steps(std::size_t dataset_size) const;
  double lr_at(long step, long total_steps) const;

  static TrainRunConfig from_kv(const io::KvDocument& doc);
  io::KvDocument to_kv() const;
  static const std::vector<std::string>& kv_keys();
};

struct TrainLogRow {
  long step = 0;
  int epoch = 0;
  double total_loss = 0;
  std::map<int, double> layer_loss;
  double lr = 0;
  double wall_ms = 0;
};

struct TrainHooks {
  std::function<void(const TrainLogRow&)> on_log;
  // Called at checkpoint cadence and once at the end (final = true).
  std::function<void(const Model&, int epoch, bool final)> on_checkpoint;
};

struct TrainResult {
  Model model;
  std::vector<TrainLogRow> log;         // every log_every steps
  std::vector<TrainLogRow> epoch_log;   // one row per epoch, epoch means
};

// Trains from scratch: parameters initialised from run.seed, batches drawn
// from a per-epoch shuffle of `data`. Throws NumericError on a non-finite
// loss, reporting the step and per-layer components.
TrainResult train(const ModelConfig& config, const TrainRunConfig& run, const LiteWeights& weights,
                  std::span<const InstructionExample> data, const TrainHooks& hooks = {});

// Continues training an existing model (used by tests for single steps).
void train_step(Model& model, AdamState& adam, const LiteWeights& weights, const Batch& batch,
                double lr, std::map<int, double>* layer_loss = nullptr, double* total = nullptr);

// CSV with columns step,epoch,total_loss,loss_layer_<l>...,lr,wall_ms.
std::string train_log_csv(std::span<const TrainLogRow> rows);

}  // namespace lite
