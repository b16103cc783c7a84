#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ckd/cohort/cohort.hpp"
#include "ckd/eval/metrics.hpp"
#include "ckd/eval/significance.hpp"
#include "ckd/eval/summary.hpp"

namespace ckd {

enum class ToolId { SCORED, KSHIRSAGAR, SPS, KEARNS, KWON };
inline constexpr std::array<ToolId, 5> kAllTools{ToolId::SCORED, ToolId::KSHIRSAGAR, ToolId::SPS, ToolId::KEARNS,
                                                 ToolId::KWON};
std::string_view tool_name(ToolId id);
ToolId parse_tool(std::string_view name);

enum class ToolModel { Points, Logistic };

struct ToolInput {
  std::string name;
  std::vector<std::string> categories;
};

struct RiskBand {
  std::string label;
  double min_score = 0;
};

struct ClinicalTool {
  ToolId id = ToolId::SCORED;
  std::string name;
  std::string citation;
  std::string notes;
  ToolModel model = ToolModel::Points;
  bool verified = false;
  std::vector<ToolInput> inputs;
  // Points (or log-odds) per input category; unlisted categories score 0.
  std::map<std::string, std::map<std::string, double>> weights;
  double intercept = 0;
  // Positive call at raw_score >= threshold unless bands are declared.
  double threshold = 0;
  std::vector<RiskBand> bands;
  std::vector<std::string> negative_bands;
  std::string checksum;

  [[nodiscard]] std::vector<std::string> required_features() const;
  // Verifies the transcription checksum over the canonical serialization.
  static ClinicalTool from_json(const nlohmann::json& j);
  static ClinicalTool load(const std::filesystem::path& path);
};

// Digest of a data file's canonical form with its "checksum" key removed.
std::string transcription_checksum(nlohmann::json j);

std::filesystem::path scoring_dir();
// Tables bundled under tools/scoring, loaded once.
const ClinicalTool& clinical_tool(ToolId id);

struct ClinicalScoreResult {
  ToolId tool = ToolId::SCORED;
  double raw_score = 0;
  std::optional<std::string> category;
  int binary_call = 0;  // 1 = CKD
};

// patient maps tool input names to categories. Throws FieldError listing every
// missing input, or naming an unknown category.
ClinicalScoreResult score_clinical(const ClinicalTool& tool, const FeatureMap& patient);
ClinicalScoreResult score_clinical(ToolId id, const FeatureMap& patient);

// How one tool input is read from a cohort row: a schema feature with a
// category map, or a fixed value for inputs the cohort does not record.
struct InputBinding {
  std::string feature;
  std::map<std::string, std::string> map;
  std::optional<std::string> absent;
  std::string note;
};

struct ToolBinding {
  ToolId tool = ToolId::SCORED;
  std::map<std::string, InputBinding> inputs;

  [[nodiscard]] FeatureMap bind(const FeatureMap& row) const;
};

ToolBinding primary_binding(ToolId id);
std::vector<ToolBinding> load_bindings(const std::filesystem::path& path);

struct ToolEvaluation {
  ToolId tool = ToolId::SCORED;
  ConfusionCounts counts;
  // Point values indexed like kAllMetrics.
  std::array<double, 5> values{};
  bool zero_division = false;
  std::vector<ClinicalScoreResult> results;

  [[nodiscard]] double get(Metric m) const { return values[static_cast<std::size_t>(m)]; }
};

// Scores every cohort row; errors carry the failing row index. AUC-ROC ranks
// rows by raw score.
ToolEvaluation evaluate_tool(const ClinicalTool& tool, const ToolBinding& binding, const Cohort& cohort);

struct ProposedModel {
  std::string name;
  MetricSummary summary;
};

// Tool rows with point metrics and star codes from one-sample t-tests of each
// proposed model's folds against the tool value, followed by the proposed
// models' mean and CI.
std::string format_sota_table(std::span<const ToolEvaluation> tools, std::span<const ProposedModel> models);
nlohmann::json sota_to_json(std::span<const ToolEvaluation> tools, std::span<const ProposedModel> models);

}  // namespace ckd
