#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckd/common/matrix.hpp"
#include "ckd/models/tree.hpp"

namespace ckd {

// A fitted binary classifier over a fixed column layout.
class Classifier {
 public:
  virtual ~Classifier() = default;

  // Probability of the positive class.
  [[nodiscard]] virtual double predict_proba(std::span<const double> x) const = 0;
  [[nodiscard]] std::vector<double> predict_proba(const Matrix& X) const;
  [[nodiscard]] virtual std::size_t n_features() const = 0;
  // Non-negative per-column importances summing to 1 (or all zero); empty
  // when the model has none.
  [[nodiscard]] virtual std::vector<double> importances() const { return {}; }
  // Tree-structured models expose their trees for exact attribution.
  [[nodiscard]] virtual const TreeEnsemble* tree_ensemble() const { return nullptr; }
  [[nodiscard]] virtual nlohmann::json to_json() const = 0;
};

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

std::vector<double> normalize_importances(std::vector<double> v);

class TreeModel final : public Classifier {
 public:
  TreeModel(TreeEnsemble ensemble, std::vector<double> importances, std::size_t n_features)
      : ens_(std::move(ensemble)), imp_(normalize_importances(std::move(importances))), d_(n_features) {}

  [[nodiscard]] double predict_proba(std::span<const double> x) const override { return ens_.predict(x); }
  [[nodiscard]] std::size_t n_features() const override { return d_; }
  [[nodiscard]] std::vector<double> importances() const override { return imp_; }
  [[nodiscard]] const TreeEnsemble* tree_ensemble() const override { return &ens_; }
  [[nodiscard]] nlohmann::json to_json() const override;
  static std::unique_ptr<TreeModel> from_json(const nlohmann::json& j);

 private:
  TreeEnsemble ens_;
  std::vector<double> imp_;
  std::size_t d_;
};

}  // namespace ckd
