#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckd/cohort/schema.hpp"
#include "ckd/eval/cross_validate.hpp"
#include "ckd/models/tuner.hpp"

namespace ckd {

// Where the training cohort comes from.
struct CohortSource {
  // "synthetic" draws from the recorded cohort marginals; "file" loads a delimited file.
  std::string kind = "synthetic";
  std::filesystem::path path;
  std::uint64_t seed = 42;
};

struct ServeSettings {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model;
};

struct PipelineConfig {
  CohortSource cohort;
  std::vector<std::string> feature_sets{"All", "BestS1", "BestS2"};
  std::vector<std::string> classifiers;  // empty: every registered kind
  // "recorded" replays the bundled selections; "run" reruns all ten methods.
  std::string selection = "run";
  SearchBudget budget;
  CvProtocol cv;
  bool compare_sota = true;
  std::vector<std::string> external_datasets;  // dataset names, read from the cache only
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir = "results";
  ServeSettings serve;

  [[nodiscard]] std::vector<std::string> classifier_list() const;
  [[nodiscard]] nlohmann::json to_json() const;
  // Unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
  // Digest over the fields that determine the bundle (not output or serve).
  [[nodiscard]] std::string digest() const;
  // Names of classifiers, selection mode, budget and cv settings; feature set
  // names are checked against the catalog by the pipeline.
  void validate() const;
};

// CKD_BIND_ADDRESS ("host" or "host:port"), CKD_CACHE_DIR and
// CKD_PRIVATE_COHORT (a cohort file replacing the synthetic source).
void apply_environment(PipelineConfig& config);

}  // namespace ckd
