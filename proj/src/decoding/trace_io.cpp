#include "lite/decoding/trace_io.hpp"

#include <charconv>

#include "lite/errors.hpp"
#include "lite/training/tokenizer.hpp"

namespace lite {

namespace {

template <typename T>
T parse_num(const std::string& s, const char* what) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw FormatError(std::string("bad ") + what + " '" + s + "' in trace");
  }
  return v;
}

}  // namespace

io::CsvTable trace_table(std::span<const GenerationTrace> traces) {
  io::CsvTable table({"prompt_id", "t", "token_id", "exit_layer", "confidence",
                      "heads_evaluated", "flops"});
  for (const auto& tr : traces) {
    for (const auto& s : tr.steps) {
      table.add_row({tr.prompt_id, std::to_string(s.t), std::to_string(s.token),
                     std::to_string(s.exit_layer), io::fmt(s.confidence),
                     std::to_string(s.heads_evaluated), std::to_string(s.flops)});
    }
  }
  return table;
}

std::vector<GenerationTrace> traces_from_table(const io::CsvTable& table) {
  if (table.header().size() != 7 || table.header()[0] != "prompt_id") {
    throw FormatError("not a trace table");
  }
  std::vector<GenerationTrace> out;
  for (const auto& r : table.rows()) {
    if (out.empty() || out.back().prompt_id != r[0]) {
      out.emplace_back();
      out.back().prompt_id = r[0];
    }
    TokenStep s;
    s.t = parse_num<int>(r[1], "t");
    s.token = parse_num<int>(r[2], "token_id");
    s.exit_layer = parse_num<int>(r[3], "exit_layer");
    s.confidence = parse_num<double>(r[4], "confidence");
    s.heads_evaluated = parse_num<int>(r[5], "heads_evaluated");
    s.flops = parse_num<std::uint64_t>(r[6], "flops");
    auto& tr = out.back();
    tr.steps.push_back(s);
    if (s.token == CharTokenizer::kEos) {
      tr.stop = StopReason::Eos;
    } else {
      tr.tokens.push_back(s.token);
    }
  }
  for (auto& tr : out) tr.text = CharTokenizer::decode(tr.tokens);
  return out;
}

io::Json trace_summary(std::span<const GenerationTrace> traces, const std::string& engine) {
  io::Json doc;
  doc["engine"] = engine;
  io::Json items = io::Json::array();
  std::uint64_t charged = 0, uncharged = 0;
  for (const auto& tr : traces) {
    charged += tr.total_flops();
    uncharged += tr.total_flops_uncharged();
    items.push_back({{"prompt_id", tr.prompt_id},
                     {"text", tr.text},
                     {"T", tr.length()},
                     {"stop_reason", std::string(stop_reason_name(tr.stop))},
                     {"total_flops", tr.total_flops()},
                     {"total_flops_uncharged", tr.total_flops_uncharged()}});
  }
  doc["total_flops"] = charged;
  doc["total_flops_uncharged"] = uncharged;
  doc["prompts"] = std::move(items);
  return doc;
}

void write_traces(const std::string& csv_path, const std::string& json_path,
                  std::span<const GenerationTrace> traces, const std::string& engine) {
  trace_table(traces).write(csv_path);
  io::write_json(json_path, trace_summary(traces, engine));
}

}  // namespace lite
