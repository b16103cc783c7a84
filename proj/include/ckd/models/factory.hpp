#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ckd/models/classifier.hpp"
#include "ckd/models/params.hpp"
#include "ckd/models/registry.hpp"

namespace ckd {

enum class ClassWeighting { Balanced, None };

struct ModelSpec {
  ClassifierId kind = ClassifierId::LR;
  Params hyperparameters;
  ClassWeighting class_weighting = ClassWeighting::Balanced;
  std::uint64_t seed = 42;

  [[nodiscard]] std::string_view kind_name() const { return classifier_kind(kind).name; }
  [[nodiscard]] nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
  // Digest of the canonical serialization.
  [[nodiscard]] std::string digest() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Validates params against the kind's declared search space and fills the
// remaining parameters with their defaults.
ModelSpec make_classifier(std::string_view kind, const Params& params = {}, std::uint64_t seed = 42,
                          ClassWeighting weighting = ClassWeighting::Balanced,
                          const SearchSpaceCatalog& spaces = SearchSpaceCatalog::builtin());

// n / (2 * n_class) per row under balanced weighting, 1 otherwise.
std::vector<double> class_weights(std::span<const int> y, ClassWeighting weighting);

std::unique_ptr<Classifier> fit_classifier(const ModelSpec& spec, const Matrix& X, std::span<const int> y);
std::unique_ptr<Classifier> fit_classifier(const ModelSpec& spec, const Matrix& X, std::span<const int> y,
                                           std::span<const double> weights);

}  // namespace ckd
