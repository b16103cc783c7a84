#include "ckd/eval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "ckd/common/error.hpp"

namespace ckd {

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw ValidationError("confusion: label vectors differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ValidationError("confusion: label outside {CKD, non-CKD}");
    if (t == 1) {
      (p == 1 ? c.tp : c.fn)++;
    } else {
      (p == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

namespace {

double ratio(std::size_t num, std::size_t den, bool* zero_division) {
  if (den == 0) {
    if (zero_division) *zero_division = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double sensitivity_ckd(const ConfusionCounts& c, bool* zd) { return ratio(c.tp, c.tp + c.fn, zd); }
double specificity(const ConfusionCounts& c, bool* zd) { return ratio(c.tn, c.tn + c.fp, zd); }
double precision_ckd(const ConfusionCounts& c, bool* zd) { return ratio(c.tp, c.tp + c.fp, zd); }
double precision_nonckd(const ConfusionCounts& c, bool* zd) { return ratio(c.tn, c.tn + c.fn, zd); }

double precision_macro(const ConfusionCounts& c, bool* zd) {
  return 0.5 * (precision_ckd(c, zd) + precision_nonckd(c, zd));
}

double f1_ckd(const ConfusionCounts& c, bool* zd) {
  return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, zd);
}

double balanced_accuracy(const ConfusionCounts& c) {
  if (c.positives() == 0 || c.negatives() == 0) throw ValidationError("balanced accuracy needs both classes");
  return 0.5 * (sensitivity_ckd(c) + specificity(c));
}

namespace {

void check_scores(std::span<const int> y, std::span<const double> s, std::size_t& pos, std::size_t& neg) {
  if (y.size() != s.size()) throw ValidationError("auc: labels and scores differ in length");
  pos = 0;
  neg = 0;
  for (int v : y) {
    if (v == 1) {
      ++pos;
    } else if (v == 0) {
      ++neg;
    } else {
      throw ValidationError("auc: label outside {CKD, non-CKD}");
    }
  }
  if (pos == 0 || neg == 0) throw ValidationError("auc needs both classes");
}

}  // namespace

double auc_roc(std::span<const int> y, std::span<const double> s) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  check_scores(y, s, pos, neg);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  // Sum of mid-ranks of the positives.
  double rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && s[order[j]] == s[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (y[order[k]] == 1) rank_sum += mid;
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double auc_roc_trapezoid(std::span<const int> y, std::span<const double> s) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  check_scores(y, s, pos, neg);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  double area = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  double prev_tpr = 0;
  double prev_fpr = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && s[order[j]] == s[order[i]]) {
      (y[order[j]] == 1 ? tp : fp)++;
      ++j;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_tpr = tpr;
    prev_fpr = fpr;
    i = j;
  }
  return area;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::BalancedAccuracy: return "balanced_accuracy";
    case Metric::Sensitivity: return "sensitivity_ckd";
    case Metric::AucRoc: return "auc_roc";
    case Metric::F1: return "f1_ckd";
    case Metric::PrecisionMacro: return "precision_macro";
  }
  return "?";
}

std::string_view metric_label(Metric m) {
  switch (m) {
    case Metric::BalancedAccuracy: return "Balanced accuracy";
    case Metric::Sensitivity: return "Sensitivity (CKD)";
    case Metric::AucRoc: return "AUC-ROC";
    case Metric::F1: return "F1 (CKD)";
    case Metric::PrecisionMacro: return "Precision (macro)";
  }
  return "?";
}

FoldMetrics fold_metrics(std::size_t fold, std::span<const int> y_true, std::span<const int> y_pred,
                         std::span<const double> scores) {
  FoldMetrics m;
  m.fold = fold;
  m.counts = confusion(y_true, y_pred);
  bool zd = false;
  m.values[0] = balanced_accuracy(m.counts);
  m.values[1] = sensitivity_ckd(m.counts, &zd);
  m.values[2] = auc_roc(y_true, scores);
  m.values[3] = f1_ckd(m.counts, &zd);
  m.values[4] = precision_macro(m.counts, &zd);
  m.zero_division = zd;
  return m;
}

}  // namespace ckd
