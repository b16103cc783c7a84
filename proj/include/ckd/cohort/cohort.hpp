#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckd/cohort/schema.hpp"

namespace ckd {

using FeatureMap = std::map<std::string, std::string>;

struct Provenance {
  std::string dataset_id;
  std::string source_uri;
};

// Categorical rows with a binary label (1 = positive class). Features that the
// source does not provide are absent for every row and are stored as -1.
class Cohort {
 public:
  Cohort(CohortSchema schema, std::vector<std::size_t> present_features, std::vector<std::vector<int>> rows,
         std::vector<int> labels, Provenance provenance = {});

  static Cohort from_maps(const CohortSchema& schema, std::span<const FeatureMap> rows, std::span<const int> labels,
                          Provenance provenance = {});

  [[nodiscard]] const CohortSchema& schema() const { return schema_; }
  [[nodiscard]] const std::vector<std::size_t>& present_features() const { return present_; }
  [[nodiscard]] bool has_feature(std::string_view name) const;
  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] const std::vector<int>& labels() const { return labels_; }
  [[nodiscard]] const std::vector<std::vector<int>>& rows() const { return rows_; }
  [[nodiscard]] int category(std::size_t row, std::size_t feature) const { return rows_[row][feature]; }
  [[nodiscard]] const Provenance& provenance() const { return provenance_; }
  [[nodiscard]] std::size_t count_positive() const;
  [[nodiscard]] std::size_t count_negative() const { return size() - count_positive(); }

  [[nodiscard]] FeatureMap row_map(std::size_t row) const;
  [[nodiscard]] Cohort select_rows(std::span<const std::size_t> idx) const;
  // Keeps only rows with the given label.
  [[nodiscard]] Cohort filter_label(int label) const;
  // Marks every feature outside `features` as absent.
  [[nodiscard]] Cohort restrict_features(std::span<const std::string> features) const;

 private:
  CohortSchema schema_;
  std::vector<std::size_t> present_;
  std::vector<std::vector<int>> rows_;
  std::vector<int> labels_;
  Provenance provenance_;
};

struct RowDiagnostic {
  std::size_t line = 0;  // 1-based data row number, header excluded
  std::string column;
  std::string message;
};

struct LoadOptions {
  // Schema feature name -> file column name. Unmapped features are looked up
  // under their own name.
  std::map<std::string, std::string> mapping;
  // Throw on the first invalid row instead of rejecting it.
  bool strict = false;
  bool require_all_features = false;
  std::string dataset_id;
};

struct LoadResult {
  Cohort cohort;
  std::vector<RowDiagnostic> rejected;
};

LoadResult load_cohort(const std::filesystem::path& path, const CohortSchema& schema, const LoadOptions& options = {});
LoadResult parse_cohort(std::string_view text, const CohortSchema& schema, const LoadOptions& options = {});

// Writes the delimited file plus `<stem>.schema.json` next to it.
void write_cohort(const Cohort& cohort, const std::filesystem::path& path);
std::string format_cohort(const Cohort& cohort);
std::filesystem::path sidecar_schema_path(const std::filesystem::path& cohort_path);

}  // namespace ckd
