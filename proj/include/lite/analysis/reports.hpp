#pragma once

#include <span>

#include "lite/analysis/alignment.hpp"
#include "lite/analysis/calibration.hpp"
#include "lite/analysis/evaluation.hpp"
#include "lite/io/csv_json.hpp"

namespace lite {

// layer,matches,total,percent_alignment
io::CsvTable alignment_table(const AlignmentReport& report);
io::Json alignment_json(const AlignmentReport& report);

// layer,bin_lower,bin_upper,count,matches,alignment,empty
io::CsvTable curve_table(const ConfidenceCurve& curve);
io::Json curve_json(const ConfidenceCurve& curve);

// One row per report: policy,prompts,accuracy_full,accuracy_dynamic,
// edit_full,edit_dynamic,flops_full,flops_dynamic,flops_dynamic_uncharged,
// mean_flops_full,mean_flops_dynamic,improvement_pct,improvement_uncharged_pct,
// mean_tokens_full,mean_tokens_dynamic,mean_similarity
io::CsvTable cost_table(std::span<const CostReport> reports);
// Same columns preceded by family, one row per (policy, family).
io::CsvTable family_table(std::span<const CostReport> reports);
// policy,layer,percent
io::CsvTable exit_table(std::span<const CostReport> reports);
// Per-prompt outcomes of one report.
io::CsvTable prompt_table(const CostReport& report);
io::Json cost_json(std::span<const CostReport> reports);

}  // namespace lite
