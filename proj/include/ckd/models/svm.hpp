#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ckd/models/classifier.hpp"

namespace ckd {

// RBF-kernel SVM. Probabilities come from a sigmoid fitted to the training
// decision values.
class SvmModel final : public Classifier {
 public:
  SvmModel(Matrix support, std::vector<double> dual_coef, double rho, double gamma, double sig_a, double sig_b);

  [[nodiscard]] double decision(std::span<const double> x) const;
  [[nodiscard]] double predict_proba(std::span<const double> x) const override;
  [[nodiscard]] std::size_t n_features() const override { return sv_.cols(); }
  [[nodiscard]] std::size_t n_support() const { return sv_.rows(); }
  [[nodiscard]] nlohmann::json to_json() const override;
  static std::unique_ptr<SvmModel> from_json(const nlohmann::json& j);

 private:
  Matrix sv_;
  std::vector<double> coef_;
  double rho_;
  double gamma_;
  double a_;
  double b_;
};

// Per-row box constraint C * w_i.
std::unique_ptr<SvmModel> fit_svm(const Matrix& X, std::span<const int> y, std::span<const double> w, double C,
                                  double gamma);

}  // namespace ckd
