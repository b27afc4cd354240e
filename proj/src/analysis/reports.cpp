#include "lite/analysis/reports.hpp"

namespace lite {

using io::fmt;

namespace {

const std::vector<std::string> kCostColumns = {
    "prompts",          "accuracy_full",         "accuracy_dynamic",
    "edit_full",        "edit_dynamic",          "flops_full",
    "flops_dynamic",    "flops_dynamic_uncharged", "mean_flops_full",
    "mean_flops_dynamic", "improvement_pct",     "improvement_uncharged_pct",
    "mean_tokens_full", "mean_tokens_dynamic",   "mean_similarity"};

std::vector<std::string> cost_cells(const CostSummary& s) {
  return {std::to_string(s.prompts),
          fmt(s.accuracy_full),
          fmt(s.accuracy_dynamic),
          fmt(s.edit_full),
          fmt(s.edit_dynamic),
          std::to_string(s.flops_full),
          std::to_string(s.flops_dynamic),
          std::to_string(s.flops_dynamic_uncharged),
          fmt(s.mean_flops_full()),
          fmt(s.mean_flops_dynamic()),
          fmt(s.improvement_pct()),
          fmt(s.improvement_uncharged_pct()),
          fmt(s.mean_tokens_full),
          fmt(s.mean_tokens_dynamic),
          fmt(s.mean_similarity)};
}

io::Json summary_json(const CostSummary& s) {
  io::Json j;
  j["prompts"] = s.prompts;
  j["accuracy_full"] = s.accuracy_full;
  j["accuracy_dynamic"] = s.accuracy_dynamic;
  j["edit_full"] = s.edit_full;
  j["edit_dynamic"] = s.edit_dynamic;
  j["flops_full"] = s.flops_full;
  j["flops_dynamic"] = s.flops_dynamic;
  j["flops_dynamic_uncharged"] = s.flops_dynamic_uncharged;
  j["mean_flops_full"] = s.mean_flops_full();
  j["mean_flops_dynamic"] = s.mean_flops_dynamic();
  j["improvement_pct"] = s.improvement_pct();
  j["improvement_uncharged_pct"] = s.improvement_uncharged_pct();
  j["mean_tokens_full"] = s.mean_tokens_full;
  j["mean_tokens_dynamic"] = s.mean_tokens_dynamic;
  j["mean_similarity"] = s.mean_similarity;
  return j;
}

}  // namespace

io::CsvTable alignment_table(const AlignmentReport& report) {
  io::CsvTable t({"layer", "matches", "total", "percent_alignment"});
  for (const auto& r : report.rows) {
    t.add_row({std::to_string(r.layer), std::to_string(r.matches), std::to_string(r.total),
               fmt(r.percent())});
  }
  return t;
}

io::Json alignment_json(const AlignmentReport& report) {
  io::Json j;
  j["dataset_id"] = report.dataset_id;
  j["checkpoint_id"] = report.checkpoint_id;
  io::Json rows = io::Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"layer", r.layer},
                    {"matches", r.matches},
                    {"total", r.total},
                    {"percent_alignment", r.percent()}});
  }
  j["layers"] = std::move(rows);
  return j;
}

io::CsvTable curve_table(const ConfidenceCurve& curve) {
  io::CsvTable t({"layer", "bin_lower", "bin_upper", "count", "matches", "alignment", "empty"});
  for (const auto& lc : curve.layers) {
    for (const auto& b : lc.bins) {
      t.add_row({std::to_string(lc.layer), fmt(b.lower), fmt(b.upper), std::to_string(b.count),
                 std::to_string(b.matches), b.empty() ? "" : fmt(b.alignment()),
                 b.empty() ? "1" : "0"});
    }
  }
  return t;
}

io::Json curve_json(const ConfidenceCurve& curve) {
  io::Json j;
  j["final_layer"] = curve.final_layer;
  io::Json layers = io::Json::array();
  for (const auto& lc : curve.layers) {
    io::Json bins = io::Json::array();
    for (const auto& b : lc.bins) {
      io::Json bj = {{"lower", b.lower}, {"upper", b.upper}, {"count", b.count},
                     {"matches", b.matches}};
      bj["alignment"] = b.empty() ? io::Json(nullptr) : io::Json(b.alignment());
      bins.push_back(std::move(bj));
    }
    io::Json lj = {{"layer", lc.layer}, {"samples", lc.total()}};
    lj["top_bottom_gap"] = lc.total() ? io::Json(lc.top_bottom_gap()) : io::Json(nullptr);
    lj["bins"] = std::move(bins);
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

io::CsvTable cost_table(std::span<const CostReport> reports) {
  std::vector<std::string> header{"policy"};
  header.insert(header.end(), kCostColumns.begin(), kCostColumns.end());
  io::CsvTable t(header);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.policy_name};
    const auto cells = cost_cells(r.overall);
    row.insert(row.end(), cells.begin(), cells.end());
    t.add_row(std::move(row));
  }
  return t;
}

io::CsvTable family_table(std::span<const CostReport> reports) {
  std::vector<std::string> header{"policy", "family"};
  header.insert(header.end(), kCostColumns.begin(), kCostColumns.end());
  io::CsvTable t(header);
  for (const auto& r : reports) {
    for (const auto& [fam, s] : r.by_family) {
      std::vector<std::string> row{r.policy_name, fam};
      const auto cells = cost_cells(s);
      row.insert(row.end(), cells.begin(), cells.end());
      t.add_row(std::move(row));
    }
  }
  return t;
}

io::CsvTable exit_table(std::span<const CostReport> reports) {
  io::CsvTable t({"policy", "layer", "percent"});
  for (const auto& r : reports) {
    for (const auto& [layer, pct] : r.exit_percent) {
      t.add_row({r.policy_name, std::to_string(layer), fmt(pct)});
    }
  }
  return t;
}

io::CsvTable prompt_table(const CostReport& report) {
  io::CsvTable t({"prompt_id", "family", "expected", "full_text", "dynamic_text", "full_tokens",
                  "dynamic_tokens", "full_flops", "dynamic_flops", "dynamic_flops_uncharged",
                  "similarity"});
  for (const auto& o : report.prompts) {
    t.add_row({o.prompt_id, o.family, o.expected, o.full_text, o.dynamic_text,
               std::to_string(o.full_tokens), std::to_string(o.dynamic_tokens),
               std::to_string(o.full_flops), std::to_string(o.dynamic_flops),
               std::to_string(o.dynamic_flops_uncharged), fmt(o.similarity)});
  }
  return t;
}

io::Json cost_json(std::span<const CostReport> reports) {
  io::Json arr = io::Json::array();
  for (const auto& r : reports) {
    io::Json j;
    j["policy"] = r.policy_name;
    j["overall"] = summary_json(r.overall);
    io::Json fam;
    for (const auto& [name, s] : r.by_family) fam[name] = summary_json(s);
    j["by_family"] = std::move(fam);
    io::Json ex;
    for (const auto& [layer, pct] : r.exit_percent) ex[std::to_string(layer)] = pct;
    j["exit_percent"] = std::move(ex);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace lite
