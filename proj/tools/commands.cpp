#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

#include "lite/analysis/reports.hpp"
#include "lite/decoding/trace_io.hpp"
#include "lite/errors.hpp"
#include "lite/io/hash.hpp"
#include "lite/model/checkpoint.hpp"
#include "lite/pipeline.hpp"
#include "lite/training/tokenizer.hpp"

namespace lite::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string in_dir(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void prepare_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("missing required option '--out-dir'");
  fs::create_directories(dir);
}

RunManifest start_manifest(const std::string& command, const std::string& config_path) {
  RunManifest m;
  m.command = command;
  m.config_path = config_path;
  m.version = version_string();
  return m;
}

void finish(RunManifest& m, const std::string& dir, const std::vector<std::string>& outputs,
            Clock::time_point start) {
  for (const auto& o : outputs) m.add_output(o);
  m.timings_ms["total"] = ms_since(start);
  m.write(in_dir(dir, "manifest.json"));
}

std::vector<Prompt> prompts_for(std::span<const InstructionExample> examples, int max_new) {
  std::vector<Prompt> out;
  for (const auto& ex : examples) out.push_back(prompt_from_example(ex, max_new));
  return out;
}

std::string escape_tsv(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '\\') out += "\\\\";
    else if (ch == '\t') out += "\\t";
    else if (ch == '\n') out += "\\n";
    else out += ch;
  }
  return out;
}

std::string checkpoint_id(const std::string& path) { return io::sha256_file(path).substr(0, 16); }

}  // namespace

int cmd_gen_data(const GenDataArgs& a, const Common&) {
  const auto start = Clock::now();
  const ExperimentConfig cfg = ExperimentConfig::load(a.config);
  prepare_dir(a.out_dir);
  const Splits s = make_splits(cfg.data, cfg.model.max_seq_len);
  const std::vector<std::string> outs{in_dir(a.out_dir, "train.tsv"),
                                      in_dir(a.out_dir, "calibration.tsv"),
                                      in_dir(a.out_dir, "eval.tsv")};
  write_dataset(outs[0], s.train);
  write_dataset(outs[1], s.calibration);
  write_dataset(outs[2], s.evaluation);
  RunManifest m = start_manifest("gen-data", a.config);
  m.seed = cfg.data.seed;
  m.add_input(a.config);
  finish(m, a.out_dir, outs, start);
  std::cout << "train " << s.train.size() << ", calibration " << s.calibration.size()
            << ", eval " << s.evaluation.size() << " examples\n";
  return 0;
}

int cmd_train(const TrainArgs& a, const Common&) {
  const auto start = Clock::now();
  const ExperimentConfig cfg = ExperimentConfig::load(a.config);
  const std::string dataset = a.dataset.empty() ? cfg.dataset : a.dataset;
  if (dataset.empty()) throw ConfigError("missing required key 'dataset'");
  const TrainMode mode = train_mode_from_name(a.mode);
  prepare_dir(a.out_dir);
  const auto data = read_dataset(dataset, cfg.model.max_seq_len);
  if (data.empty()) throw ConfigError("dataset '" + dataset + "' is empty");

  TrainHooks hooks;
  hooks.on_log = [](const TrainLogRow& r) {
    std::cout << "step " << r.step << " epoch " << r.epoch << " loss " << r.total_loss << std::endl;
  };
  hooks.on_checkpoint = [&](const Model& model, int epoch, bool final) {
    if (!final) save_checkpoint(in_dir(a.out_dir, "epoch" + std::to_string(epoch) + ".ckpt"), model);
  };
  const TrainResult result = train(cfg.model, cfg.train, weights_for(mode, cfg.model), data, hooks);

  const std::vector<std::string> outs{in_dir(a.out_dir, "model.ckpt"),
                                      in_dir(a.out_dir, "train_log.csv"),
                                      in_dir(a.out_dir, "epoch_log.csv")};
  save_checkpoint(outs[0], result.model);
  io::write_text(outs[1], train_log_csv(result.log));
  io::write_text(outs[2], train_log_csv(result.epoch_log));
  RunManifest m = start_manifest("train --mode " + a.mode, a.config);
  m.seed = cfg.train.seed;
  m.add_input(a.config);
  m.add_input(dataset);
  finish(m, a.out_dir, outs, start);
  return 0;
}

int cmd_generate(const GenerateArgs& a, const Common& c) {
  const auto start = Clock::now();
  const Model model = load_checkpoint(a.checkpoint);
  DecodeMode mode;
  std::string policy_path;
  if (a.engine.rfind("dynamic:", 0) == 0) {
    policy_path = a.engine.substr(8);
    mode = DecodeMode::dynamic(ExitPolicy::load(policy_path));
  } else {
    mode = DecodeMode::parse(a.engine);
  }
  if (mode.kind == DecodeKind::Dynamic && policy_path.empty()) {
    throw ConfigError("engine 'dynamic' needs a policy file: dynamic:<path>");
  }
  prepare_dir(a.out_dir);
  const auto examples = read_dataset(a.prompts, model.config.max_seq_len);
  const auto prompts = prompts_for(examples, c.max_new_tokens);
  const auto traces = generate_all(model, prompts, mode, c.threads);

  const std::vector<std::string> outs{in_dir(a.out_dir, "outputs.tsv"),
                                      in_dir(a.out_dir, "trace.csv"),
                                      in_dir(a.out_dir, "summary.json")};
  std::string text;
  for (const auto& tr : traces) text += tr.prompt_id + "\t" + escape_tsv(tr.text) + "\n";
  io::write_text(outs[0], text);
  write_traces(outs[1], outs[2], traces, a.engine);
  RunManifest m = start_manifest("generate --engine " + a.engine, "");
  m.add_input(a.checkpoint);
  m.add_input(a.prompts);
  if (!policy_path.empty()) m.add_input(policy_path);
  finish(m, a.out_dir, outs, start);
  return 0;
}

int cmd_align(const AlignArgs& a, const Common& c) {
  const auto start = Clock::now();
  const Model model = load_checkpoint(a.checkpoint);
  prepare_dir(a.out_dir);
  const auto examples = read_dataset(a.dataset, model.config.max_seq_len);
  const auto samples = collect_alignment(model, prompts_for(examples, c.max_new_tokens), c.threads);
  AlignmentReport report = alignment_report(samples);
  report.dataset_id = dataset_id(examples);
  report.checkpoint_id = checkpoint_id(a.checkpoint);
  const ConfidenceCurve curve = confidence_curve(samples);

  const std::vector<std::string> outs{
      in_dir(a.out_dir, "alignment.csv"), in_dir(a.out_dir, "alignment.json"),
      in_dir(a.out_dir, "confidence_curve.csv"), in_dir(a.out_dir, "confidence_curve.json")};
  alignment_table(report).write(outs[0]);
  io::write_json(outs[1], alignment_json(report));
  curve_table(curve).write(outs[2]);
  io::write_json(outs[3], curve_json(curve));
  RunManifest m = start_manifest("align", "");
  m.add_input(a.checkpoint);
  m.add_input(a.dataset);
  finish(m, a.out_dir, outs, start);
  for (const auto& r : report.rows) {
    std::cout << "layer " << r.layer << ": " << r.percent() << "% of " << r.total << "\n";
  }
  return 0;
}

int cmd_calibrate(const CalibrateArgs& a, const Common& c) {
  const auto start = Clock::now();
  const Model model = load_checkpoint(a.checkpoint);
  prepare_dir(a.out_dir);
  const auto examples = read_dataset(a.dataset, model.config.max_seq_len);
  const ConfidenceCurve curve =
      confidence_curve(model, prompts_for(examples, c.max_new_tokens), c.threads);
  ExitPolicy policy = calibrate_thresholds(curve, a.target);
  policy.calibration_ids = prompt_ids(examples);

  const std::vector<std::string> outs{in_dir(a.out_dir, "policy.txt"),
                                      in_dir(a.out_dir, "confidence_curve.csv")};
  policy.save(outs[0]);
  curve_table(curve).write(outs[1]);
  RunManifest m = start_manifest("calibrate", "");
  m.add_input(a.checkpoint);
  m.add_input(a.dataset);
  finish(m, a.out_dir, outs, start);
  for (const auto& cp : policy.checkpoints) {
    std::cout << "layer " << cp.layer << " threshold " << cp.threshold << "\n";
  }
  return 0;
}

namespace {

int run_reports(const EvaluateArgs& a, const Common& c, const std::string& command) {
  const auto start = Clock::now();
  const Model model = load_checkpoint(a.checkpoint);
  prepare_dir(a.out_dir);
  const auto examples = read_dataset(a.dataset, model.config.max_seq_len);
  std::vector<NamedPolicy> policies;
  for (const auto& p : a.policies) {
    policies.push_back({fs::path(p).stem().string(), ExitPolicy::load(p)});
  }
  EvalOptions opts;
  opts.threads = c.threads;
  opts.max_new_tokens = c.max_new_tokens;
  const auto reports = threshold_sweep(model, examples, policies, opts);

  std::vector<std::string> outs{in_dir(a.out_dir, "cost.csv"), in_dir(a.out_dir, "cost.json"),
                                in_dir(a.out_dir, "families.csv"),
                                in_dir(a.out_dir, "exits.csv")};
  cost_table(reports).write(outs[0]);
  io::write_json(outs[1], cost_json(reports));
  family_table(reports).write(outs[2]);
  exit_table(reports).write(outs[3]);
  for (const auto& r : reports) {
    const std::string path = in_dir(a.out_dir, "prompts_" + r.policy_name + ".csv");
    prompt_table(r).write(path);
    outs.push_back(path);
  }
  RunManifest m = start_manifest(command, "");
  m.add_input(a.checkpoint);
  m.add_input(a.dataset);
  for (const auto& p : a.policies) m.add_input(p);
  finish(m, a.out_dir, outs, start);
  for (const auto& r : reports) {
    std::cout << r.policy_name << ": improvement " << r.overall.improvement_pct()
              << "%, accuracy full " << r.overall.accuracy_full << " dynamic "
              << r.overall.accuracy_dynamic << "\n";
  }
  return 0;
}

}  // namespace

int cmd_evaluate(const EvaluateArgs& a, const Common& c) {
  if (a.policies.size() != 1) throw ConfigError("evaluate takes exactly one '--policy'");
  return run_reports(a, c, "evaluate");
}

int cmd_sweep(const EvaluateArgs& a, const Common& c) {
  if (a.policies.size() < 2) throw ConfigError("sweep needs at least two '--policy' files");
  return run_reports(a, c, "sweep");
}

}  // namespace lite::cli
