#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lite/analysis/reports.hpp"
#include "lite/analysis/similarity.hpp"
#include "lite/decoding/flops.hpp"
#include "lite/decoding/trace_io.hpp"
#include "lite/errors.hpp"
#include "lite/model/checkpoint.hpp"
#include "lite/pipeline.hpp"
#include "lite/training/tokenizer.hpp"

namespace py = pybind11;
using namespace lite;

namespace {

// Reports cross the boundary as JSON text; the Python side parses them.
std::string dump(const io::Json& j) { return j.dump(); }

std::vector<InstructionExample> load_examples(const std::string& path, const Model& model) {
  return read_dataset(path, model.config.max_seq_len);
}

py::dict trace_dict(const GenerationTrace& t) {
  py::list steps;
  for (const auto& s : t.steps) {
    py::dict d;
    d["t"] = s.t;
    d["token"] = s.token;
    d["exit_layer"] = s.exit_layer;
    d["confidence"] = s.confidence;
    d["heads_evaluated"] = s.heads_evaluated;
    d["flops"] = s.flops;
    steps.append(d);
  }
  py::dict out;
  out["prompt_id"] = t.prompt_id;
  out["text"] = t.text;
  out["tokens"] = t.tokens;
  out["stop_reason"] = std::string(stop_reason_name(t.stop));
  out["total_flops"] = t.total_flops();
  out["steps"] = steps;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Intermediate-layer-loss tuning and confidence-based early exit";
  m.attr("__version__") = version_string();

  // Later registrations are tried first, so the subclass goes last.
  auto& base = py::register_exception<Error>(m, "LiteError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("d_model", &ModelConfig::d_model)
      .def_readwrite("n_layers", &ModelConfig::n_layers)
      .def_readwrite("n_heads", &ModelConfig::n_heads)
      .def_readwrite("d_ff", &ModelConfig::d_ff)
      .def_readwrite("max_seq_len", &ModelConfig::max_seq_len)
      .def_readwrite("selected_exit_layers", &ModelConfig::selected_exit_layers)
      .def_readwrite("loss_weights", &ModelConfig::loss_weights)
      .def("validate", &ModelConfig::validate)
      .def("loss_layers", &ModelConfig::loss_layers);

  py::class_<Model>(m, "Model")
      .def_readonly("config", &Model::config)
      .def("parameter_count", [](const Model& self) { return self.params.parameter_count(); })
      .def("save", [](const Model& self, const std::string& path) { save_checkpoint(path, self); })
      .def("to_bytes", [](const Model& self) {
        const auto b = encode_checkpoint(self);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      });

  m.def("init_model", [](const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    return Model{config, init_params(config, seed)};
  }, py::arg("config"), py::arg("seed") = 0);
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("encode", &CharTokenizer::encode, py::arg("text"));
  m.def("decode", [](const std::vector<int>& tokens) { return CharTokenizer::decode(tokens); },
        py::arg("tokens"));

  m.def("final_logits", [](const Model& model, const std::vector<int>& tokens) {
    const Tensor t = final_logits(model, tokens);
    return py::make_tuple(t.rows(), t.cols(), t.data);
  }, py::arg("model"), py::arg("tokens"), "Returns (rows, cols, row-major values).");

  m.def("flops_per_token", &flops_per_token, py::arg("config"), py::arg("exit_layer"),
        py::arg("heads_evaluated"), py::arg("context_len"));

  m.def("similarity", &similarity_proxy, py::arg("a"), py::arg("b"));
  m.def("edit_distance", &normalized_edit_distance, py::arg("a"), py::arg("b"));

  m.def("parse_policy", [](const std::string& text) {
    const ExitPolicy p = ExitPolicy::parse(text);
    std::vector<std::pair<int, double>> out;
    for (const auto& c : p.checkpoints) out.emplace_back(c.layer, c.threshold);
    return out;
  }, py::arg("text"));

  m.def("generate", [](const Model& model, const std::string& prompt, const std::string& engine,
                       const std::string& policy_text, int max_new_tokens) {
    const ExitPolicy policy = ExitPolicy::parse(policy_text);
    const DecodeMode mode = engine == "dynamic" ? DecodeMode::dynamic(policy) : DecodeMode::parse(engine, {});
    py::gil_scoped_release release;
    const GenerationTrace t = generate(model, prompt_from_text(prompt, max_new_tokens), mode);
    py::gil_scoped_acquire acquire;
    return trace_dict(t);
  }, py::arg("model"), py::arg("prompt"), py::arg("engine") = "full", py::arg("policy") = "",
     py::arg("max_new_tokens") = 64);

  m.def("gen_data", [](const std::string& config_text, const std::string& out_dir) {
    const ExperimentConfig cfg = ExperimentConfig::from_kv(io::KvDocument::parse(config_text));
    const Splits s = make_splits(cfg.data, cfg.model.max_seq_len);
    write_dataset(out_dir + "/train.tsv", s.train);
    write_dataset(out_dir + "/calibration.tsv", s.calibration);
    write_dataset(out_dir + "/eval.tsv", s.evaluation);
    return py::make_tuple(s.train.size(), s.calibration.size(), s.evaluation.size());
  }, py::arg("config_text"), py::arg("out_dir"));

  m.def("train", [](const std::string& config_text, const std::string& dataset, const std::string& mode) {
    const ExperimentConfig cfg = ExperimentConfig::from_kv(io::KvDocument::parse(config_text));
    const auto data = read_dataset(dataset, cfg.model.max_seq_len);
    py::gil_scoped_release release;
    TrainResult r = lite::train(cfg.model, cfg.train, weights_for(train_mode_from_name(mode), cfg.model), data);
    return std::move(r.model);
  }, py::arg("config_text"), py::arg("dataset"), py::arg("mode") = "lite");

  m.def("alignment", [](const Model& model, const std::string& dataset, int max_new_tokens, int threads) {
    std::vector<Prompt> prompts;
    for (const auto& ex : load_examples(dataset, model)) prompts.push_back(prompt_from_example(ex, max_new_tokens));
    py::gil_scoped_release release;
    const AlignmentSamples s = collect_alignment(model, prompts, threads);
    io::Json out = {{"alignment", alignment_json(alignment_report(s))},
                    {"curve", curve_json(confidence_curve(s))}};
    return dump(out);
  }, py::arg("model"), py::arg("dataset"), py::arg("max_new_tokens") = 64, py::arg("threads") = 1);

  m.def("calibrate", [](const Model& model, const std::string& dataset, double target, int max_new_tokens,
                        int threads) {
    const auto data = load_examples(dataset, model);
    std::vector<Prompt> prompts;
    for (const auto& ex : data) prompts.push_back(prompt_from_example(ex, max_new_tokens));
    py::gil_scoped_release release;
    ExitPolicy p = calibrate_thresholds(confidence_curve(model, prompts, threads), target);
    p.calibration_ids = prompt_ids(data);
    return p.serialize();
  }, py::arg("model"), py::arg("dataset"), py::arg("target") = 0.95, py::arg("max_new_tokens") = 64,
     py::arg("threads") = 1);

  m.def("evaluate", [](const Model& model, const std::string& dataset, const std::string& policy_text,
                       int max_new_tokens, int threads) {
    const auto data = load_examples(dataset, model);
    const ExitPolicy policy = ExitPolicy::parse(policy_text);
    EvalOptions opt;
    opt.max_new_tokens = max_new_tokens;
    opt.threads = threads;
    py::gil_scoped_release release;
    const std::vector<CostReport> r{evaluate_cost_quality(model, data, policy, opt, "policy")};
    return dump(cost_json(r));
  }, py::arg("model"), py::arg("dataset"), py::arg("policy"), py::arg("max_new_tokens") = 64,
     py::arg("threads") = 1);
}
