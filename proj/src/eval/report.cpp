#include "ckd/eval/report.hpp"

#include <cstdio>

#include "ckd/common/delimited.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> metric_header() {
  std::vector<std::string> h;
  for (auto m : kAllMetrics) h.emplace_back(metric_label(m));
  return h;
}

}  // namespace

std::string format_point(Metric m, double value) {
  return m == Metric::AucRoc ? fixed(value, 4) : fixed(100.0 * value, 2);
}

std::string format_stat(Metric m, const MetricStat& s) {
  if (m == Metric::AucRoc) return fixed(s.mean, 4) + "±" + fixed(s.ci_halfwidth, 4);
  return fixed(100.0 * s.mean, 2) + "±" + fixed(100.0 * s.ci_halfwidth, 2);
}

EvaluationReport make_report(std::string feature_set_name, std::vector<ModelRow> rows) {
  if (rows.empty()) throw ValidationError("report needs at least one classifier row");
  EvaluationReport r{std::move(feature_set_name), std::move(rows), 0};
  r.best = select_best(r.rows);
  return r;
}

json summary_to_json(const MetricSummary& s) {
  json metrics = json::object();
  for (auto m : kAllMetrics) {
    const auto& st = s.get(m);
    metrics[std::string(metric_name(m))] = {{"mean", st.mean}, {"ci_halfwidth", st.ci_halfwidth},
                                            {"folds", s.fold_values(m)}};
  }
  const auto& c = s.aggregate;
  return {{"n_folds", s.n_folds},
          {"metrics", metrics},
          {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}}};
}

json EvaluationReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) rows_json.push_back({{"classifier", r.classifier}, {"summary", summary_to_json(r.summary)}});
  return {{"feature_set", feature_set_name}, {"best", rows.at(best).classifier}, {"rows", rows_json}};
}

std::string format_performance_table(std::span<const EvaluationReport> reports) {
  DelimitedTable t;
  t.header = {"Feature set", "Classifier"};
  for (auto& h : metric_header()) t.header.push_back(h);
  t.header.emplace_back("Best");
  for (const auto& rep : reports) {
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& row = rep.rows[i];
      std::vector<std::string> cells{rep.feature_set_name, row.classifier};
      for (auto m : kAllMetrics) cells.push_back(format_stat(m, row.summary.get(m)));
      cells.emplace_back(i == rep.best ? "*" : "");
      t.rows.push_back(std::move(cells));
    }
  }
  return format_delimited(t);
}

std::string format_best_table(std::span<const EvaluationReport> reports) {
  DelimitedTable t;
  t.header = {"Feature set", "Best model"};
  for (auto& h : metric_header()) t.header.push_back(h);
  for (const auto& rep : reports) {
    const auto& row = rep.best_row();
    std::vector<std::string> cells{rep.feature_set_name, row.classifier};
    for (auto m : kAllMetrics) cells.push_back(format_stat(m, row.summary.get(m)));
    t.rows.push_back(std::move(cells));
  }
  return format_delimited(t);
}

std::string format_confusion_table(std::span<const EvaluationReport> reports) {
  DelimitedTable t;
  t.header = {"Feature set", "Classifier", "TP", "FP", "TN", "FN"};
  for (const auto& rep : reports) {
    for (const auto& row : rep.rows) {
      const auto& c = row.summary.aggregate;
      t.rows.push_back({rep.feature_set_name, row.classifier, std::to_string(c.tp), std::to_string(c.fp),
                        std::to_string(c.tn), std::to_string(c.fn)});
    }
  }
  return format_delimited(t);
}

}  // namespace ckd
