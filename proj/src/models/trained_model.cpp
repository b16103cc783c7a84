#include "ckd/models/trained_model.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

using nlohmann::json;

namespace {

constexpr int kArtifactVersion = 1;

Background collapse(const Matrix& X, std::span<const std::size_t> idx) {
  std::map<std::vector<double>, double> counts;
  std::vector<std::vector<double>> order;
  for (auto i : idx) {
    std::vector<double> r(X.row(i).begin(), X.row(i).end());
    auto [it, inserted] = counts.try_emplace(r, 0.0);
    if (inserted) order.push_back(r);
    it->second += 1.0;
  }
  Background bg{Matrix(0, X.cols()), {}};
  for (const auto& r : order) {
    bg.rows.append_row(r);
    bg.weights.push_back(counts[r] / static_cast<double>(idx.size()));
  }
  return bg;
}

}  // namespace

Background make_background(const Matrix& X, std::size_t max_rows, std::uint64_t seed) {
  if (X.rows() == 0) throw ValidationError("background needs at least one row");
  std::vector<std::size_t> idx(X.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto bg = collapse(X, idx);
  if (bg.size() <= max_rows) return bg;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  return collapse(X, idx);
}

std::string matrix_digest(const EncodedMatrix& data) {
  json j{{"columns", data.column_names}, {"labels", data.labels}, {"values", data.values.data()}};
  return sha256_hex(j.dump());
}

TrainedModel::TrainedModel(ModelSpec spec, std::string feature_set_name, std::vector<std::string> columns,
                           std::string schema_hash, std::shared_ptr<const Classifier> model,
                           TrainingFingerprint fingerprint, Background background, double threshold)
    : spec_(std::move(spec)),
      feature_set_(std::move(feature_set_name)),
      columns_(std::move(columns)),
      schema_hash_(std::move(schema_hash)),
      model_(std::move(model)),
      fingerprint_(std::move(fingerprint)),
      background_(std::move(background)),
      threshold_(threshold) {
  if (!model_) throw ValidationError("trained model has no fitted state");
  if (model_->n_features() != columns_.size()) throw ValidationError("fitted state does not match column count");
  if (background_.rows.cols() != columns_.size()) throw ValidationError("background does not match column count");
  if (!(threshold_ >= 0 && threshold_ <= 1)) throw ValidationError("threshold must lie in [0,1]");
}

void TrainedModel::require_schema(const std::string& schema_hash) const {
  if (schema_hash != schema_hash_)
    throw SchemaMismatchError("schema hash mismatch: model trained under " + schema_hash_ + ", input uses " +
                              schema_hash);
}

double TrainedModel::predict_proba(const std::string& schema_hash, std::span<const double> row) const {
  require_schema(schema_hash);
  if (row.size() != columns_.size()) throw ValidationError("input row has the wrong number of columns");
  return model_->predict_proba(row);
}

std::vector<double> TrainedModel::predict_proba(const EncodedMatrix& data) const {
  require_schema(data.schema_hash);
  const auto sub = data.select_columns(columns_);
  return model_->predict_proba(sub.values);
}

std::vector<double> TrainedModel::encode(const CohortSchema& schema, const FeatureMap& features) const {
  require_schema(schema.hash());
  return encode_row(schema, columns_, features);
}

RiskAssessment TrainedModel::assess_encoded(std::span<const double> row) const {
  const double p = model_->predict_proba(row);
  return {p, p >= threshold_ ? 1 : 0, threshold_};
}

RiskAssessment TrainedModel::assess(const CohortSchema& schema, const FeatureMap& features) const {
  return assess_encoded(encode(schema, features));
}

json TrainedModel::to_json() const {
  json j{{"format", "ckdscreen-model"},
         {"version", kArtifactVersion},
         {"spec", spec_.to_json()},
         {"feature_set", feature_set_},
         {"columns", columns_},
         {"schema_hash", schema_hash_},
         {"threshold", threshold_},
         {"fingerprint", {{"data_digest", fingerprint_.data_digest}, {"timestamp", fingerprint_.timestamp}}},
         {"background", {{"rows", background_.rows.data()}, {"weights", background_.weights}}},
         {"fitted", model_->to_json()}};
  if (trial_log_) j["trial_log"] = *trial_log_;
  return j;
}

TrainedModel TrainedModel::from_json(const json& j) {
  if (j.value("format", "") != "ckdscreen-model") throw ValidationError("not a model artifact");
  if (j.at("version").get<int>() != kArtifactVersion) throw ValidationError("unsupported model artifact version");
  auto columns = j.at("columns").get<std::vector<std::string>>();
  const auto& bgj = j.at("background");
  auto bg_values = bgj.at("rows").get<std::vector<double>>();
  auto weights = bgj.at("weights").get<std::vector<double>>();
  if (bg_values.size() != weights.size() * columns.size()) throw ValidationError("malformed background");
  Background bg{Matrix(weights.size(), columns.size(), std::move(bg_values)), std::move(weights)};
  const auto& fp = j.at("fingerprint");
  TrainedModel m(ModelSpec::from_json(j.at("spec")), j.at("feature_set").get<std::string>(), std::move(columns),
                 j.at("schema_hash").get<std::string>(), classifier_from_json(j.at("fitted")),
                 {fp.at("data_digest").get<std::string>(), fp.at("timestamp").get<std::string>()}, std::move(bg),
                 j.at("threshold").get<double>());
  if (j.contains("trial_log")) m.set_trial_log(j.at("trial_log"));
  return m;
}

void TrainedModel::save(const std::filesystem::path& path) const { write_text_file(path, to_json().dump(1) + "\n"); }

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw ValidationError("malformed model artifact " + path.string() + ": " + e.what());
  }
}

TrainedModel train(const ModelSpec& spec, const EncodedMatrix& data, const std::string& feature_set_name,
                   std::span<const std::string> columns, const std::string& timestamp) {
  const EncodedMatrix sub = columns.empty() ? data : data.select_columns(columns);
  std::shared_ptr<const Classifier> model = fit_classifier(spec, sub.values, sub.labels);
  return {spec,
          feature_set_name,
          sub.column_names,
          sub.schema_hash,
          std::move(model),
          {matrix_digest(sub), timestamp},
          make_background(sub.values, kMaxBackgroundRows, spec.seed)};
}

}  // namespace ckd
