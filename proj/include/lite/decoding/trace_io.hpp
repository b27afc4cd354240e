#pragma once

#include <span>
#include <string>
#include <vector>

#include "lite/decoding/generate.hpp"
#include "lite/io/csv_json.hpp"

namespace lite {

// Per-token rows: prompt_id,t,token_id,exit_layer,confidence,heads_evaluated,flops
io::CsvTable trace_table(std::span<const GenerationTrace> traces);
std::vector<GenerationTrace> traces_from_table(const io::CsvTable& table);

// Per-prompt summary: text, T, stop reason, charged and uncharged FLOPs.
io::Json trace_summary(std::span<const GenerationTrace> traces, const std::string& engine);

void write_traces(const std::string& csv_path, const std::string& json_path,
                  std::span<const GenerationTrace> traces, const std::string& engine);

}  // namespace lite
