#include "ckd/eval/summary.hpp"

#include <cmath>
#include <tuple>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ckd/common/error.hpp"

namespace ckd {

std::vector<double> MetricSummary::fold_values(Metric m) const {
  std::vector<double> out;
  out.reserve(folds.size());
  for (const auto& f : folds) out.push_back(f.get(m));
  return out;
}

double ci_halfwidth(std::span<const double> values, double level, CiMethod method) {
  const auto n = values.size();
  if (n < 2) return 0.0;
  // Shifted by the first value so that constant input has exactly zero spread.
  const double origin = values[0];
  double shift = 0;
  for (double v : values) shift += v - origin;
  const double mean = origin + shift / static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double q = 0.5 + level / 2.0;
  double crit = 0;
  if (method == CiMethod::StudentT) {
    crit = boost::math::quantile(boost::math::students_t(static_cast<double>(n - 1)), q);
  } else {
    crit = boost::math::quantile(boost::math::normal(), q);
  }
  return crit * sd / std::sqrt(static_cast<double>(n));
}

MetricSummary summarize(std::span<const FoldMetrics> folds, CiMethod method, double level) {
  if (folds.empty()) throw ValidationError("summarize: no folds");
  MetricSummary s;
  s.n_folds = folds.size();
  s.folds.assign(folds.begin(), folds.end());
  for (const auto& f : folds) s.aggregate += f.counts;
  for (auto m : kAllMetrics) {
    const auto values = s.fold_values(m);
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    s.stats[static_cast<std::size_t>(m)] = {mean, ci_halfwidth(values, level, method)};
  }
  return s;
}

std::size_t select_best(std::span<const ModelRow> rows) {
  if (rows.empty()) throw ValidationError("select_best: no rows");
  auto key = [](const ModelRow& r) {
    const auto& s = r.summary;
    return std::make_tuple(s.get(Metric::BalancedAccuracy).mean, s.get(Metric::Sensitivity).mean,
                           s.get(Metric::AucRoc).mean, s.get(Metric::F1).mean);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto a = key(rows[i]);
    const auto b = key(rows[best]);
    if (a > b || (a == b && rows[i].registry_order < rows[best].registry_order)) best = i;
  }
  return best;
}

}  // namespace ckd
