#include "ckd/external/validate.hpp"

#include <algorithm>
#include <cstdio>

#include "ckd/cohort/encode.hpp"
#include "ckd/common/delimited.hpp"
#include "ckd/common/error.hpp"
#include "ckd/eval/cross_validate.hpp"

namespace ckd {

using nlohmann::json;

json ExternalReport::to_json() const {
  json metrics = json::object();
  for (auto m : kAllMetrics) {
    const auto v = get(m);
    metrics[std::string(metric_name(m))] = v ? json(*v) : json(nullptr);
  }
  return {{"dataset", dataset},
          {"feature_set", feature_set},
          {"model", model},
          {"n", n},
          {"positives", positives},
          {"negatives", negatives},
          {"confusion", {{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn}, {"fn", counts.fn}}},
          {"metrics", metrics},
          {"single_class", single_class()},
          {"zero_division", zero_division}};
}

ExternalReport external_evaluate(const TrainedModel& model, const EncodedMatrix& data, const std::string& dataset,
                                 const std::string& feature_set) {
  model.require_schema(data.schema_hash);
  for (const auto& c : model.columns())
    if (data.column_index(c) < 0)
      throw ValidationError("feature-set mismatch: model column " + c + " is not available in " + dataset);
  if (data.rows() == 0) throw ValidationError(dataset + " cohort is empty");

  ExternalReport r;
  r.dataset = dataset;
  r.feature_set = feature_set;
  r.model = model.spec().kind_name();
  r.n = data.rows();
  r.positives = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
  r.negatives = r.n - r.positives;
  if (r.positives == 0) throw ValidationError(dataset + " cohort has no CKD participants; no metric is defined");

  const auto scores = model.predict_proba(data);
  const auto pred = threshold_predictions(scores, model.threshold());
  r.counts = confusion(data.labels, pred);
  if (r.single_class()) {
    r.values[static_cast<std::size_t>(Metric::Sensitivity)] = sensitivity_ckd(r.counts);
    return r;
  }
  const auto fm = fold_metrics(0, data.labels, pred, scores);
  for (std::size_t i = 0; i < fm.values.size(); ++i) r.values[i] = fm.values[i];
  r.zero_division = fm.zero_division;
  return r;
}

ExternalReport external_evaluate(const TrainedModel& model, const Cohort& cohort, const std::string& dataset,
                                 const std::string& feature_set) {
  return external_evaluate(model, encode_onehot(cohort), dataset, feature_set);
}

namespace {

std::string cell(const ExternalReport& r, Metric m) {
  const auto v = r.get(m);
  if (!v) return "--";
  char buf[32];
  if (m == Metric::AucRoc) {
    std::snprintf(buf, sizeof buf, "%.3f", *v);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", *v * 100);
  }
  return buf;
}

}  // namespace

std::string format_external_table(const std::vector<ExternalReport>& reports, char delimiter) {
  DelimitedTable t;
  t.header = {"Test dataset", "Feature set"};
  for (auto m : kAllMetrics) t.header.emplace_back(metric_label(m));
  for (const auto& r : reports) {
    std::vector<std::string> row{r.dataset, r.feature_set};
    for (auto m : kAllMetrics) row.push_back(cell(r, m));
    t.rows.push_back(std::move(row));
  }
  return format_delimited(t, delimiter);
}

json external_reports_to_json(const std::vector<ExternalReport>& reports) {
  json a = json::array();
  for (const auto& r : reports) a.push_back(r.to_json());
  return {{"format", "ckdscreen-external"}, {"version", 1}, {"reports", a}};
}

}  // namespace ckd
