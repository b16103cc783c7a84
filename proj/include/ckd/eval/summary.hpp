#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ckd/eval/metrics.hpp"

namespace ckd {

enum class CiMethod { StudentT, Normal };

struct MetricStat {
  double mean = 0;
  double ci_halfwidth = 0;
};

struct MetricSummary {
  std::array<MetricStat, 5> stats{};
  std::size_t n_folds = 0;
  ConfusionCounts aggregate;
  std::vector<FoldMetrics> folds;

  [[nodiscard]] const MetricStat& get(Metric m) const { return stats[static_cast<std::size_t>(m)]; }
  [[nodiscard]] std::vector<double> fold_values(Metric m) const;
};

// Half-width of the `level` confidence interval of the mean.
double ci_halfwidth(std::span<const double> values, double level = 0.95, CiMethod method = CiMethod::StudentT);

MetricSummary summarize(std::span<const FoldMetrics> folds, CiMethod method = CiMethod::StudentT,
                        double level = 0.95);

struct ModelRow {
  std::string classifier;
  // Position in the classifier registry; breaks residual ties.
  std::size_t registry_order = 0;
  MetricSummary summary;
};

// Lexicographic argmax of (balanced accuracy, sensitivity, AUC-ROC, F1) means.
// Returns an index into rows.
std::size_t select_best(std::span<const ModelRow> rows);

}  // namespace ckd
