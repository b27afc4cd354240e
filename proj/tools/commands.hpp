#pragma once

#include <string>
#include <vector>

namespace lite::cli {

struct Common {
  int threads = 1;
  int max_new_tokens = 64;
};

struct GenDataArgs {
  std::string config;
  std::string out_dir;
};

struct TrainArgs {
  std::string config;
  std::string dataset;
  std::string mode = "lite";
  std::string out_dir;
};

struct GenerateArgs {
  std::string checkpoint;
  std::string prompts;
  std::string engine = "full";
  std::string out_dir;
};

struct AlignArgs {
  std::string checkpoint;
  std::string dataset;
  std::string out_dir;
};

struct CalibrateArgs {
  std::string checkpoint;
  std::string dataset;
  double target = 0.95;
  std::string out_dir;
};

struct EvaluateArgs {
  std::string checkpoint;
  std::string dataset;
  std::vector<std::string> policies;
  std::string out_dir;
};

int cmd_gen_data(const GenDataArgs& a, const Common& c);
int cmd_train(const TrainArgs& a, const Common& c);
int cmd_generate(const GenerateArgs& a, const Common& c);
int cmd_align(const AlignArgs& a, const Common& c);
int cmd_calibrate(const CalibrateArgs& a, const Common& c);
int cmd_evaluate(const EvaluateArgs& a, const Common& c);
int cmd_sweep(const EvaluateArgs& a, const Common& c);

}  // namespace lite::cli
