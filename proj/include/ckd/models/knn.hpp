#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ckd/models/classifier.hpp"

namespace ckd {

class KnnModel final : public Classifier {
 public:
  KnnModel(Matrix X, std::vector<int> y, std::vector<double> w, std::size_t k, bool distance_weighted);

  [[nodiscard]] double predict_proba(std::span<const double> x) const override;
  [[nodiscard]] std::size_t n_features() const override { return X_.cols(); }
  [[nodiscard]] nlohmann::json to_json() const override;
  static std::unique_ptr<KnnModel> from_json(const nlohmann::json& j);

 private:
  Matrix X_;
  std::vector<int> y_;
  std::vector<double> w_;
  std::size_t k_;
  bool distance_weighted_;
};

}  // namespace ckd
