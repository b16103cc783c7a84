#include "ckd/cohort/cohort.hpp"

#include <algorithm>
#include <numeric>

#include "ckd/common/delimited.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

Cohort::Cohort(CohortSchema schema, std::vector<std::size_t> present_features, std::vector<std::vector<int>> rows,
               std::vector<int> labels, Provenance provenance)
    : schema_(std::move(schema)),
      present_(std::move(present_features)),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      provenance_(std::move(provenance)) {
  if (rows_.size() != labels_.size()) throw ValidationError("cohort rows and labels differ in length");
  std::sort(present_.begin(), present_.end());
  present_.erase(std::unique(present_.begin(), present_.end()), present_.end());
  const auto& features = schema_.features();
  std::vector<bool> is_present(features.size(), false);
  for (auto f : present_) {
    if (f >= features.size()) throw ValidationError("cohort references feature index out of range");
    is_present[f] = true;
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != features.size()) throw ValidationError("cohort row width differs from schema");
    if (labels_[r] != 0 && labels_[r] != 1) throw ValidationError("cohort label must be 0 or 1");
    for (std::size_t f = 0; f < features.size(); ++f) {
      const int c = rows_[r][f];
      if (!is_present[f]) {
        if (c != -1) throw ValidationError("value given for absent feature " + features[f].name);
        continue;
      }
      if (c < 0 || c >= static_cast<int>(features[f].categories.size()))
        throw ValidationError("row " + std::to_string(r + 1) + ": invalid category for " + features[f].name);
    }
  }
}

Cohort Cohort::from_maps(const CohortSchema& schema, std::span<const FeatureMap> rows, std::span<const int> labels,
                         Provenance provenance) {
  const auto& features = schema.features();
  std::vector<std::size_t> present;
  for (std::size_t f = 0; f < features.size(); ++f)
    if (!rows.empty() && rows.front().contains(features[f].name)) present.push_back(f);
  std::vector<std::vector<int>> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<int> coded(features.size(), -1);
    for (const auto& [name, value] : rows[r]) {
      const auto f = schema.feature_index(name);
      if (!f) throw FieldError(FieldError::Reason::Invalid, name, "unknown feature: " + name);
      const int c = features[*f].category_index(value);
      if (c < 0)
        throw FieldError(FieldError::Reason::UnknownCategory, name,
                         "row " + std::to_string(r + 1) + ": unknown category '" + value + "' for " + name);
      coded[*f] = c;
    }
    for (auto f : present)
      if (coded[f] < 0)
        throw FieldError(FieldError::Reason::Missing, features[f].name,
                         "row " + std::to_string(r + 1) + ": missing " + features[f].name);
    out.push_back(std::move(coded));
  }
  return Cohort(schema, std::move(present), std::move(out), std::vector<int>(labels.begin(), labels.end()),
                std::move(provenance));
}

bool Cohort::has_feature(std::string_view name) const {
  const auto f = schema_.feature_index(name);
  return f && std::binary_search(present_.begin(), present_.end(), *f);
}

std::size_t Cohort::count_positive() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

FeatureMap Cohort::row_map(std::size_t row) const {
  FeatureMap out;
  for (auto f : present_) out.emplace(schema_.features()[f].name, schema_.features()[f].categories[rows_[row][f]]);
  return out;
}

Cohort Cohort::select_rows(std::span<const std::size_t> idx) const {
  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  rows.reserve(idx.size());
  for (auto i : idx) {
    rows.push_back(rows_.at(i));
    labels.push_back(labels_.at(i));
  }
  return Cohort(schema_, present_, std::move(rows), std::move(labels), provenance_);
}

Cohort Cohort::filter_label(int label) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) idx.push_back(i);
  return select_rows(idx);
}

Cohort Cohort::restrict_features(std::span<const std::string> features) const {
  std::vector<std::size_t> keep;
  for (const auto& name : features) {
    const auto f = schema_.feature_index(name);
    if (!f) throw ValidationError("unknown feature: " + name);
    if (std::binary_search(present_.begin(), present_.end(), *f)) keep.push_back(*f);
  }
  std::sort(keep.begin(), keep.end());
  auto rows = rows_;
  for (auto& row : rows)
    for (std::size_t f = 0; f < row.size(); ++f)
      if (!std::binary_search(keep.begin(), keep.end(), f)) row[f] = -1;
  return Cohort(schema_, keep, std::move(rows), labels_, provenance_);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

LoadResult parse_cohort(std::string_view text, const CohortSchema& schema, const LoadOptions& options) {
  const auto table = parse_delimited(text, sniff_delimiter(text));
  if (table.rows.empty()) throw ValidationError("no rows");
  const int label_col = table.column_index(schema.label_name());
  if (label_col < 0) throw ValidationError("missing label column: " + schema.label_name());

  const auto& features = schema.features();
  std::vector<int> source_col(features.size(), -1);
  std::vector<std::size_t> present;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto it = options.mapping.find(features[f].name);
    const auto& column = it == options.mapping.end() ? features[f].name : it->second;
    source_col[f] = table.column_index(column);
    if (source_col[f] >= 0) {
      present.push_back(f);
    } else if (it != options.mapping.end() || options.require_all_features) {
      throw ValidationError("missing column for feature " + features[f].name + ": " + column);
    }
  }

  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  std::vector<RowDiagnostic> rejected;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    auto reject = [&](std::string column, std::string message) {
      RowDiagnostic d{r + 1, std::move(column), std::move(message)};
      if (options.strict)
        throw ValidationError("row " + std::to_string(d.line) + ", column " + d.column + ": " + d.message);
      rejected.push_back(std::move(d));
    };
    if (cells.size() != table.header.size()) {
      reject("", "expected " + std::to_string(table.header.size()) + " cells, found " + std::to_string(cells.size()));
      continue;
    }
    const auto label = trim(cells[label_col]);
    int y = -1;
    if (label == schema.positive_label()) y = 1;
    if (label == schema.negative_label()) y = 0;
    if (y < 0) {
      reject(schema.label_name(), "unknown label value '" + label + "'");
      continue;
    }
    std::vector<int> coded(features.size(), -1);
    bool ok = true;
    for (auto f : present) {
      const auto value = trim(cells[source_col[f]]);
      const int c = features[f].category_index(value);
      if (c < 0) {
        reject(table.header[source_col[f]], "unknown category '" + value + "' for " + features[f].name);
        ok = false;
        break;
      }
      coded[f] = c;
    }
    if (!ok) continue;
    rows.push_back(std::move(coded));
    labels.push_back(y);
  }
  if (rows.empty()) throw ValidationError("no valid rows");
  Provenance prov{options.dataset_id, ""};
  return {Cohort(schema, std::move(present), std::move(rows), std::move(labels), std::move(prov)), std::move(rejected)};
}

LoadResult load_cohort(const std::filesystem::path& path, const CohortSchema& schema, const LoadOptions& options) {
  auto result = parse_cohort(read_text_file(path), schema, options);
  auto prov = result.cohort.provenance();
  prov.source_uri = path.string();
  if (prov.dataset_id.empty()) prov.dataset_id = path.stem().string();
  result.cohort = Cohort(result.cohort.schema(), result.cohort.present_features(), result.cohort.rows(),
                         result.cohort.labels(), std::move(prov));
  return result;
}

std::string format_cohort(const Cohort& cohort) {
  const auto& schema = cohort.schema();
  DelimitedTable table;
  for (auto f : cohort.present_features()) table.header.push_back(schema.features()[f].name);
  table.header.push_back(schema.label_name());
  for (std::size_t r = 0; r < cohort.size(); ++r) {
    std::vector<std::string> cells;
    for (auto f : cohort.present_features()) cells.push_back(schema.features()[f].categories[cohort.category(r, f)]);
    cells.push_back(cohort.labels()[r] == 1 ? schema.positive_label() : schema.negative_label());
    table.rows.push_back(std::move(cells));
  }
  return format_delimited(table);
}

std::filesystem::path sidecar_schema_path(const std::filesystem::path& cohort_path) {
  auto p = cohort_path;
  p.replace_extension(".schema.json");
  return p;
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& path) {
  write_text_file(path, format_cohort(cohort));
  write_text_file(sidecar_schema_path(path), cohort.schema().to_json().dump(2) + "\n");
}

}  // namespace ckd
