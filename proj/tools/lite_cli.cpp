#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "lite/errors.hpp"
#include "lite/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace lite::cli;
  CLI::App app{"LITE instruction tuning and dynamic early-exit decoding"};
  app.set_version_flag("--version", lite::version_string());
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads for prompt-level parallelism")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-new-tokens", common.max_new_tokens, "Generation length cap")
      ->check(CLI::PositiveNumber);

  GenDataArgs gd;
  auto* gen_data = app.add_subcommand("gen-data", "Write train/calibration/eval splits");
  gen_data->add_option("--config", gd.config)->required();
  gen_data->add_option("--out-dir", gd.out_dir)->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a checkpoint");
  train->add_option("--config", tr.config)->required();
  train->add_option("--dataset", tr.dataset, "Overrides the config's 'dataset' key");
  train->add_option("--mode", tr.mode)->check(CLI::IsMember({"standard", "lite"}));
  train->add_option("--out-dir", tr.out_dir)->required();

  GenerateArgs ge;
  auto* generate = app.add_subcommand("generate", "Greedy decoding with traces");
  generate->add_option("--checkpoint", ge.checkpoint)->required();
  generate->add_option("--prompts", ge.prompts)->required();
  generate->add_option("--engine", ge.engine, "full | fixed:<layer> | dynamic:<policy file>");
  generate->add_option("--out-dir", ge.out_dir)->required();

  AlignArgs al;
  auto* align = app.add_subcommand("align", "Per-layer alignment and confidence curves");
  align->add_option("--checkpoint", al.checkpoint)->required();
  align->add_option("--dataset", al.dataset)->required();
  align->add_option("--out-dir", al.out_dir)->required();

  CalibrateArgs ca;
  auto* calibrate = app.add_subcommand("calibrate", "Fit per-layer exit thresholds");
  calibrate->add_option("--checkpoint", ca.checkpoint)->required();
  calibrate->add_option("--dataset", ca.dataset)->required();
  calibrate->add_option("--target", ca.target)->check(CLI::Range(0.0, 1.0));
  calibrate->add_option("--out-dir", ca.out_dir)->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Cost and quality of one policy");
  evaluate->add_option("--checkpoint", ev.checkpoint)->required();
  evaluate->add_option("--dataset", ev.dataset)->required();
  evaluate->add_option("--policy", ev.policies)->required();
  evaluate->add_option("--out-dir", ev.out_dir)->required();

  EvaluateArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Cost and quality over several policies");
  sweep->add_option("--checkpoint", sw.checkpoint)->required();
  sweep->add_option("--dataset", sw.dataset)->required();
  sweep->add_option("--policy", sw.policies)->required();
  sweep->add_option("--out-dir", sw.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen_data) return cmd_gen_data(gd, common);
    if (*train) return cmd_train(tr, common);
    if (*generate) return cmd_generate(ge, common);
    if (*align) return cmd_align(al, common);
    if (*calibrate) return cmd_calibrate(ca, common);
    if (*evaluate) return cmd_evaluate(ev, common);
    if (*sweep) return cmd_sweep(sw, common);
  } catch (const lite::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const lite::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
