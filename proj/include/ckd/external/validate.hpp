#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckd/cohort/cohort.hpp"
#include "ckd/eval/metrics.hpp"
#include "ckd/models/trained_model.hpp"

namespace ckd {

// Point metrics of a shipped model on an external cohort. Metrics that are
// undefined for the cohort (single-class) are empty.
struct ExternalReport {
  std::string dataset;
  std::string feature_set;
  std::string model;
  std::size_t n = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  ConfusionCounts counts;
  std::array<std::optional<double>, 5> values;
  bool zero_division = false;

  [[nodiscard]] std::optional<double> get(Metric m) const { return values[static_cast<std::size_t>(m)]; }
  [[nodiscard]] bool single_class() const { return positives == 0 || negatives == 0; }
  [[nodiscard]] nlohmann::json to_json() const;
};

// Requires every model column among the cohort's encoded columns. An
// all-positive cohort reports sensitivity only; an all-negative one is refused.
ExternalReport external_evaluate(const TrainedModel& model, const Cohort& cohort, const std::string& dataset,
                                 const std::string& feature_set);
ExternalReport external_evaluate(const TrainedModel& model, const EncodedMatrix& data, const std::string& dataset,
                                 const std::string& feature_set);

// Delimited table: dataset, feature set, then the five metrics; "--" for
// undefined cells. Percentages to 2 decimals, AUC to 3.
std::string format_external_table(const std::vector<ExternalReport>& reports, char delimiter = '\t');
nlohmann::json external_reports_to_json(const std::vector<ExternalReport>& reports);

}  // namespace ckd
