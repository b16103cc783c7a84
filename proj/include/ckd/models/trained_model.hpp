#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckd/cohort/encode.hpp"
#include "ckd/cohort/schema.hpp"
#include "ckd/models/classifier.hpp"
#include "ckd/models/factory.hpp"

namespace ckd {

struct TrainingFingerprint {
  std::string data_digest;
  // ISO-8601; fixed by the caller so artifacts are reproducible.
  std::string timestamp;
};

// Weighted rows standing in for the training distribution.
struct Background {
  Matrix rows;
  std::vector<double> weights;  // sums to 1

  [[nodiscard]] std::size_t size() const { return rows.rows(); }
};

struct RiskAssessment {
  double probability = 0;
  int predicted = 0;
  double threshold = 0.5;

  [[nodiscard]] std::string label() const { return predicted == 1 ? "CKD" : "non-CKD"; }
};

inline constexpr std::size_t kMaxBackgroundRows = 100;

// Collapses identical rows into weights; when more than `max_rows` distinct
// rows remain, a seeded subsample of source rows is collapsed instead.
Background make_background(const Matrix& X, std::size_t max_rows = kMaxBackgroundRows, std::uint64_t seed = 42);

// Digest over column names, values, and labels.
std::string matrix_digest(const EncodedMatrix& data);

class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, std::string feature_set_name, std::vector<std::string> columns,
               std::string schema_hash, std::shared_ptr<const Classifier> model, TrainingFingerprint fingerprint,
               Background background, double threshold = 0.5);

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const std::string& feature_set_name() const { return feature_set_; }
  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
  [[nodiscard]] const std::string& schema_hash() const { return schema_hash_; }
  [[nodiscard]] const Classifier& classifier() const { return *model_; }
  [[nodiscard]] const TrainingFingerprint& fingerprint() const { return fingerprint_; }
  [[nodiscard]] const Background& background() const { return background_; }
  [[nodiscard]] double threshold() const { return threshold_; }
  [[nodiscard]] std::optional<nlohmann::json> trial_log() const { return trial_log_; }
  void set_trial_log(nlohmann::json log) { trial_log_ = std::move(log); }

  // Throws SchemaMismatchError when the hash differs from the training schema.
  void require_schema(const std::string& schema_hash) const;
  [[nodiscard]] double predict_proba(const std::string& schema_hash, std::span<const double> row) const;
  // Selects the model's columns from the matrix, refusing a foreign schema.
  [[nodiscard]] std::vector<double> predict_proba(const EncodedMatrix& data) const;
  [[nodiscard]] RiskAssessment assess(const CohortSchema& schema, const FeatureMap& features) const;
  [[nodiscard]] std::vector<double> encode(const CohortSchema& schema, const FeatureMap& features) const;
  [[nodiscard]] RiskAssessment assess_encoded(std::span<const double> row) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

 private:
  ModelSpec spec_;
  std::string feature_set_;
  std::vector<std::string> columns_;
  std::string schema_hash_;
  std::shared_ptr<const Classifier> model_;
  TrainingFingerprint fingerprint_;
  Background background_;
  double threshold_;
  std::optional<nlohmann::json> trial_log_;
};

// Fits `spec` on the named columns of `data` (all columns when empty).
TrainedModel train(const ModelSpec& spec, const EncodedMatrix& data, const std::string& feature_set_name,
                   std::span<const std::string> columns = {}, const std::string& timestamp = "1970-01-01T00:00:00Z");

}  // namespace ckd
