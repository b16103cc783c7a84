#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ckd/models/classifier.hpp"

namespace ckd {

class LogisticModel final : public Classifier {
 public:
  LogisticModel(std::vector<double> coef, double intercept) : coef_(std::move(coef)), intercept_(intercept) {}

  [[nodiscard]] double decision(std::span<const double> x) const;
  [[nodiscard]] double predict_proba(std::span<const double> x) const override;
  [[nodiscard]] std::size_t n_features() const override { return coef_.size(); }
  [[nodiscard]] std::vector<double> importances() const override;
  [[nodiscard]] const std::vector<double>& coefficients() const { return coef_; }
  [[nodiscard]] double intercept() const { return intercept_; }
  [[nodiscard]] nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticModel> from_json(const nlohmann::json& j);

 private:
  std::vector<double> coef_;
  double intercept_;
};

// Minimizes sum(w_i * logloss_i) / sum(w_i) + |coef|^2 / (2C) by damped
// Newton iterations. The intercept is not penalized.
std::unique_ptr<LogisticModel> fit_logistic(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                            double C);

}  // namespace ckd
