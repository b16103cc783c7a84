#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace ckd {

enum class FeatureGroup { SD, LH, MH, CE, Path };
enum class FeatureKind { Binary, Categorical };

std::string_view to_string(FeatureGroup g);
FeatureGroup parse_feature_group(std::string_view s);

// Maps a continuous measurement onto category labels. Bands are half-open,
// lower-inclusive: with breakpoints b0 < b1 < ..., value v gets
// labels[#{b_i <= v}]. Sex-specific rules replace the breakpoints per sex.
struct DiscretizationRule {
  std::string source_unit;
  std::vector<double> breakpoints;
  std::vector<std::string> labels;
  std::map<std::string, std::vector<double>> sex_specific;
  std::optional<double> valid_min;

  [[nodiscard]] nlohmann::json to_json() const;
  static DiscretizationRule from_json(const nlohmann::json& j);
};

struct FeatureSpec {
  std::string name;
  FeatureGroup group = FeatureGroup::SD;
  FeatureKind kind = FeatureKind::Binary;
  // For binary features categories[1] is the indicated level ("Yes", "Female").
  std::vector<std::string> categories;
  std::optional<DiscretizationRule> discretization;
  std::string description;

  [[nodiscard]] int category_index(std::string_view category) const;
  [[nodiscard]] const std::string& indicator_category() const { return categories.at(1); }
  // One-hot column names: binary -> {name}; categorical -> {name_cat...}.
  [[nodiscard]] std::vector<std::string> column_names() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static FeatureSpec from_json(const nlohmann::json& j);
};

// Identifies the feature and category an encoded column indicates.
struct ColumnOwner {
  std::size_t feature = 0;
  int category = 0;
};

class CohortSchema {
 public:
  static constexpr int kSchemaVersion = 1;

  CohortSchema(std::vector<FeatureSpec> features, std::string label_name, std::string positive_label,
               std::string negative_label, std::string sex_feature = {});

  static CohortSchema from_json(const nlohmann::json& j);
  static CohortSchema load(const std::filesystem::path& path);
  // The schema bundled with the source tree.
  static CohortSchema primary();

  [[nodiscard]] nlohmann::json to_json() const;

  [[nodiscard]] const std::vector<FeatureSpec>& features() const { return features_; }
  [[nodiscard]] const FeatureSpec& feature(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> feature_index(std::string_view name) const;
  [[nodiscard]] const std::string& label_name() const { return label_name_; }
  [[nodiscard]] const std::string& positive_label() const { return positive_label_; }
  [[nodiscard]] const std::string& negative_label() const { return negative_label_; }
  [[nodiscard]] const std::string& sex_feature() const { return sex_feature_; }
  [[nodiscard]] const std::string& hash() const { return hash_; }

  // All encoded columns in schema order.
  [[nodiscard]] std::vector<std::string> columns() const;
  [[nodiscard]] std::vector<std::string> columns_in_groups(std::span<const FeatureGroup> groups) const;
  [[nodiscard]] std::optional<ColumnOwner> column_owner(std::string_view column) const;

  friend bool operator==(const CohortSchema& a, const CohortSchema& b) { return a.hash_ == b.hash_; }

 private:
  void validate() const;

  std::vector<FeatureSpec> features_;
  std::string label_name_;
  std::string positive_label_;
  std::string negative_label_;
  std::string sex_feature_;
  std::string hash_;
  std::unordered_map<std::string, ColumnOwner> owners_;
};

std::filesystem::path source_data_dir();

}  // namespace ckd
