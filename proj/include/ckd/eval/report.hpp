#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckd/eval/summary.hpp"

namespace ckd {

struct EvaluationReport {
  std::string feature_set_name;
  std::vector<ModelRow> rows;
  std::size_t best = 0;

  [[nodiscard]] const ModelRow& best_row() const { return rows.at(best); }
  [[nodiscard]] nlohmann::json to_json() const;
};

// Selects the best row with select_best. Throws on an empty row list.
EvaluationReport make_report(std::string feature_set_name, std::vector<ModelRow> rows);

// "90.40±5.07" for rate metrics in percent, "0.8507±0.0312" for AUC-ROC.
std::string format_stat(Metric m, const MetricStat& s);
std::string format_point(Metric m, double value);

// One line per (feature set, classifier) with a best-model marker.
std::string format_performance_table(std::span<const EvaluationReport> reports);
// Best model per feature set.
std::string format_best_table(std::span<const EvaluationReport> reports);
// Aggregate out-of-fold confusion counts per (feature set, classifier).
std::string format_confusion_table(std::span<const EvaluationReport> reports);

nlohmann::json summary_to_json(const MetricSummary& s);

}  // namespace ckd
