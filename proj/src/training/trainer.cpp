#include "lite/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "lite/errors.hpp"
#include "lite/model/transformer.hpp"

namespace lite {

void TrainRunConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= 0)) throw ConfigError("lr must be non-negative");
  if (lr_schedule != "constant" && lr_schedule != "cosine") {
    throw ConfigError("lr_schedule must be 'constant' or 'cosine'");
  }
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (min_lr_ratio < 0 || min_lr_ratio > 1) throw ConfigError("min_lr_ratio must be in [0, 1]");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
}

long TrainRunConfig::total_steps(std::size_t dataset_size) const {
  const long per_epoch = static_cast<long>((dataset_size + static_cast<std::size_t>(batch_size) - 1) /
                                           static_cast<std::size_t>(batch_size));
  const long all = per_epoch * epochs;
  return max_steps > 0 ? std::min(all, max_steps) : all;
}

double TrainRunConfig::lr_at(long step, long total) const {
  if (warmup_steps > 0 && step < warmup_steps) {
    return lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  if (lr_schedule == "constant") return lr;
  const double span = static_cast<double>(std::max(1L, total - warmup_steps));
  const double progress = std::clamp(static_cast<double>(step - warmup_steps) / span, 0.0, 1.0);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return lr * (min_lr_ratio + (1.0 - min_lr_ratio) * cosine);
}

const std::vector<std::string>& TrainRunConfig::kv_keys() {
  static const std::vector<std::string> keys{
      "epochs",    "batch_size", "lr",         "lr_schedule",      "warmup_steps",
      "min_lr_ratio", "seed",    "log_every",  "checkpoint_every", "max_steps",
      "adam_beta1", "adam_beta2", "adam_eps"};
  return keys;
}

TrainRunConfig TrainRunConfig::from_kv(const io::KvDocument& doc) {
  TrainRunConfig r;
  r.epochs = static_cast<int>(doc.get_int("epochs", r.epochs));
  r.batch_size = static_cast<int>(doc.get_int("batch_size", r.batch_size));
  r.lr = doc.get_double("lr", r.lr);
  r.lr_schedule = doc.get_string("lr_schedule", r.lr_schedule);
  r.warmup_steps = static_cast<int>(doc.get_int("warmup_steps", r.warmup_steps));
  r.min_lr_ratio = doc.get_double("min_lr_ratio", r.min_lr_ratio);
  r.seed = static_cast<std::uint64_t>(doc.get_int("seed", static_cast<long long>(r.seed)));
  r.log_every = static_cast<int>(doc.get_int("log_every", r.log_every));
  r.checkpoint_every = static_cast<int>(doc.get_int("checkpoint_every", r.checkpoint_every));
  r.max_steps = doc.get_int("max_steps", r.max_steps);
  r.adam.beta1 = doc.get_double("adam_beta1", r.adam.beta1);
  r.adam.beta2 = doc.get_double("adam_beta2", r.adam.beta2);
  r.adam.eps = doc.get_double("adam_eps", r.adam.eps);
  r.validate();
  return r;
}

io::KvDocument TrainRunConfig::to_kv() const {
  io::KvDocument doc;
  doc.set("epochs", std::to_string(epochs));
  doc.set("batch_size", std::to_string(batch_size));
  doc.set("lr", io::format_double(lr));
  doc.set("lr_schedule", lr_schedule);
  doc.set("warmup_steps", std::to_string(warmup_steps));
  doc.set("min_lr_ratio", io::format_double(min_lr_ratio));
  doc.set("seed", std::to_string(seed));
  doc.set("log_every", std::to_string(log_every));
  doc.set("checkpoint_every", std::to_string(checkpoint_every));
  doc.set("max_steps", std::to_string(max_steps));
  doc.set("adam_beta1", io::format_double(adam.beta1));
  doc.set("adam_beta2", io::format_double(adam.beta2));
  doc.set("adam_eps", io::format_double(adam.eps));
  return doc;
}

void train_step(Model& model, AdamState& adam, const LiteWeights& weights, const Batch& batch,
                double lr, std::map<int, double>* layer_loss, double* total) {
  model.params.zero_grad();
  Tape<float> tape(true);
  const ModelVars vars = bind_params(tape, model.params, true);
  const BatchLoss<float> loss = batch_loss(tape, model.config, vars, batch, weights);

  const double value = tape.scalar(loss.total);
  bool finite = std::isfinite(value);
  for (const auto& [l, v] : loss.per_layer) finite = finite && std::isfinite(tape.scalar(v));
  if (!finite) {
    std::ostringstream msg;
    msg << "non-finite loss at optimizer step " << adam.steps() + 1 << ": total=" << value;
    for (const auto& [l, v] : loss.per_layer) msg << " layer" << l << "=" << tape.scalar(v);
    throw NumericError(msg.str());
  }
  if (layer_loss != nullptr) {
    for (const auto& [l, v] : loss.per_layer) (*layer_loss)[l] = tape.scalar(v);
  }
  if (total != nullptr) *total = value;

  tape.backward(loss.total);
  const auto flat = vars.flat();
  auto tensors = model.params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) tape.accumulate_grad_into(flat[i], *tensors[i]);
  adam.step(tensors, lr);
}

TrainResult train(const ModelConfig& config, const TrainRunConfig& run, const LiteWeights& weights,
                  std::span<const InstructionExample> data, const TrainHooks& hooks) {
  config.validate();
  run.validate();
  weights.validate();
  if (data.empty()) throw ConfigError("training dataset is empty");

  TrainResult result;
  result.model.config = config;
  result.model.params = init_params(config, run.seed);
  AdamState adam(run.adam);

  std::mt19937_64 rng(run.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const long total_steps = run.total_steps(data.size());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  long step = 0;
  TrainLogRow window;
  long window_steps = 0;
  for (int epoch = 1; epoch <= run.epochs && step < total_steps; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    TrainLogRow epoch_row;
    long epoch_steps = 0;
    for (std::size_t begin = 0; begin < order.size() && step < total_steps;
         begin += static_cast<std::size_t>(run.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(run.batch_size));
      std::vector<const InstructionExample*> members;
      for (std::size_t i = begin; i < end; ++i) members.push_back(&data[order[i]]);
      const Batch batch = make_batch(members);

      const double lr = run.lr_at(step, total_steps);
      std::map<int, double> layer_loss;
      double total = 0;
      train_step(result.model, adam, weights, batch, lr, &layer_loss, &total);
      ++step;

      for (auto* row : {&window, &epoch_row}) {
        row->total_loss += total;
        for (const auto& [l, v] : layer_loss) row->layer_loss[l] += v;
      }
      ++window_steps;
      ++epoch_steps;
      if (step % run.log_every == 0 || step == total_steps) {
        window.total_loss /= static_cast<double>(window_steps);
        for (auto& [l, v] : window.layer_loss) v /= static_cast<double>(window_steps);
        window.step = step;
        window.epoch = epoch;
        window.lr = lr;
        window.wall_ms = elapsed_ms();
        result.log.push_back(window);
        if (hooks.on_log) hooks.on_log(window);
        window = {};
        window_steps = 0;
      }
    }
    epoch_row.total_loss /= static_cast<double>(std::max(1L, epoch_steps));
    for (auto& [l, v] : epoch_row.layer_loss) v /= static_cast<double>(std::max(1L, epoch_steps));
    epoch_row.step = step;
    epoch_row.epoch = epoch;
    epoch_row.lr = run.lr_at(std::max(0L, step - 1), total_steps);
    epoch_row.wall_ms = elapsed_ms();
    result.epoch_log.push_back(epoch_row);
    const bool last = epoch == run.epochs || step >= total_steps;
    if (hooks.on_checkpoint && !last && run.checkpoint_every > 0 && epoch % run.checkpoint_every == 0) {
      hooks.on_checkpoint(result.model, epoch, false);
    }
  }
  if (hooks.on_checkpoint) {
    hooks.on_checkpoint(result.model, result.epoch_log.empty() ? 0 : result.epoch_log.back().epoch, true);
  }
  return result;
}

std::string train_log_csv(std::span<const TrainLogRow> rows) {
  std::vector<int> layers;
  for (const auto& r : rows) {
    for (const auto& [l, v] : r.layer_loss) {
      if (std::find(layers.begin(), layers.end(), l) == layers.end()) layers.push_back(l);
    }
  }
  std::sort(layers.begin(), layers.end());
  std::ostringstream out;
  out.precision(9);
  out << "step,epoch,total_loss";
  for (int l : layers) out << ",loss_layer_" << l;
  out << ",lr,wall_ms\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.epoch << ',' << r.total_loss;
    for (int l : layers) {
      const auto it = r.layer_loss.find(l);
      out << ',';
      if (it != r.layer_loss.end()) out << it->second;
    }
    out << ',' << r.lr << ',' << r.wall_ms << '\n';
  }
  return out.str();
}

}  // namespace lite
