#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckd/cohort/cohort.hpp"
#include "ckd/cohort/impute.hpp"
#include "ckd/cohort/raw_table.hpp"
#include "ckd/cohort/schema.hpp"

namespace ckd {

enum class DatasetId { UCI2015, UCI2023, TH };
inline constexpr std::array<DatasetId, 3> kAllDatasets{DatasetId::UCI2023, DatasetId::UCI2015, DatasetId::TH};
std::string_view dataset_name(DatasetId id);  // "UCI-2015" ...
std::string_view dataset_key(DatasetId id);   // "UCI2015" ...
DatasetId parse_dataset(std::string_view s);  // either form

// One schema feature read from a source column. Numeric bindings are scaled
// by `factor` into `unit` and discretized with the schema rule; categorical
// bindings map trimmed, lower-cased source text onto schema categories.
struct FeatureBinding {
  std::string feature;
  std::string column;
  bool numeric = false;
  std::string unit;
  double factor = 1;
  std::map<std::string, std::string> map;
  std::string note;
};

struct HarmonizationMap {
  DatasetId dataset = DatasetId::UCI2015;
  int version = 1;
  std::string source_uri;
  // File to read inside a downloaded archive; empty for plain files.
  std::string archive_member;
  std::optional<std::string> sha256;
  // Data rows after the header that hold metadata rather than participants.
  std::size_t skip_rows = 0;
  std::string label_column;
  std::vector<std::string> positive_values;
  std::vector<std::string> negative_values;
  // Participants kept: both classes, or positives only.
  bool positives_only = false;
  std::vector<std::string> excluded_columns;
  std::vector<FeatureBinding> features;
  ImputeOptions imputation;
  // Constructed sets by name ("Common", "S1subset", "S2subset").
  std::map<std::string, std::vector<std::string>> sets;
  // Sets that cannot be constructed, with the reason.
  std::map<std::string, std::string> unavailable;

  [[nodiscard]] std::vector<std::string> source_columns() const;
  // Every set non-empty and every set column owned by a bound feature.
  void validate(const CohortSchema& schema) const;
  [[nodiscard]] nlohmann::json to_json() const;
  static HarmonizationMap from_json(const nlohmann::json& j);
  static HarmonizationMap load(const std::filesystem::path& path);
};

std::filesystem::path harmonization_dir();
const HarmonizationMap& builtin_map(DatasetId id);

// Source text to raw table, honouring the map's skip_rows.
RawTable read_source_table(const std::filesystem::path& path, const HarmonizationMap& map);
RawTable parse_source_table(std::string_view text, bool arff, const HarmonizationMap& map);

struct HarmonizeResult {
  Cohort cohort;
  std::size_t dropped_unlabelled = 0;
  std::size_t dropped_negative = 0;
  std::size_t imputed_cells = 0;
};

// Restricts to bound columns and the label, imputes gaps, converts units,
// discretizes, and maps categories onto the schema.
HarmonizeResult harmonize(const RawTable& raw, const HarmonizationMap& map, const CohortSchema& schema);

}  // namespace ckd
