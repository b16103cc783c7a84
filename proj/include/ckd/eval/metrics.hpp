#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace ckd {

// CKD is the positive class (label 1).
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  [[nodiscard]] std::size_t positives() const { return tp + fn; }
  [[nodiscard]] std::size_t negatives() const { return tn + fp; }
  [[nodiscard]] std::size_t total() const { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred);

// Ratios with a zero denominator evaluate to 0 and set *zero_division when
// the pointer is given.
double sensitivity_ckd(const ConfusionCounts& c, bool* zero_division = nullptr);
double specificity(const ConfusionCounts& c, bool* zero_division = nullptr);
double precision_ckd(const ConfusionCounts& c, bool* zero_division = nullptr);
double precision_nonckd(const ConfusionCounts& c, bool* zero_division = nullptr);
double precision_macro(const ConfusionCounts& c, bool* zero_division = nullptr);
double f1_ckd(const ConfusionCounts& c, bool* zero_division = nullptr);
// Throws when either class is empty.
double balanced_accuracy(const ConfusionCounts& c);

// Probability that a random positive outscores a random negative, ties 1/2.
double auc_roc(std::span<const int> y_true, std::span<const double> scores);
// Trapezoidal area under the empirical ROC curve.
double auc_roc_trapezoid(std::span<const int> y_true, std::span<const double> scores);

enum class Metric { BalancedAccuracy, Sensitivity, AucRoc, F1, PrecisionMacro };
inline constexpr std::array<Metric, 5> kAllMetrics{Metric::BalancedAccuracy, Metric::Sensitivity, Metric::AucRoc,
                                                   Metric::F1, Metric::PrecisionMacro};
std::string_view metric_name(Metric m);
std::string_view metric_label(Metric m);

struct FoldMetrics {
  std::size_t fold = 0;
  ConfusionCounts counts;
  std::array<double, 5> values{};
  bool zero_division = false;

  [[nodiscard]] double get(Metric m) const { return values[static_cast<std::size_t>(m)]; }
};

FoldMetrics fold_metrics(std::size_t fold, std::span<const int> y_true, std::span<const int> y_pred,
                         std::span<const double> scores);

}  // namespace ckd
