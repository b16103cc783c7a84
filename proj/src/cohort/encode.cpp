#include "ckd/cohort/encode.hpp"

#include <algorithm>
#include <set>

#include "ckd/common/error.hpp"

namespace ckd {

int EncodedMatrix::column_index(std::string_view name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  return it == column_names.end() ? -1 : static_cast<int>(it - column_names.begin());
}

EncodedMatrix EncodedMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    const int c = column_index(n);
    if (c < 0) throw ValidationError("column not available: " + n);
    idx.push_back(static_cast<std::size_t>(c));
  }
  return {std::vector<std::string>(names.begin(), names.end()), values.select_cols(idx), labels, schema_hash};
}

EncodedMatrix EncodedMatrix::select_rows(std::span<const std::size_t> idx) const {
  std::vector<int> y;
  y.reserve(idx.size());
  for (auto i : idx) y.push_back(labels.at(i));
  return {column_names, values.select_rows(idx), std::move(y), schema_hash};
}

EncodedMatrix encode_onehot(const Cohort& cohort) {
  const auto& features = cohort.schema().features();
  EncodedMatrix out;
  out.schema_hash = cohort.schema().hash();
  out.labels = cohort.labels();
  // (feature, category) per column
  std::vector<std::pair<std::size_t, int>> owners;
  for (auto f : cohort.present_features()) {
    const auto names = features[f].column_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
      out.column_names.push_back(names[c]);
      owners.emplace_back(f, features[f].kind == FeatureKind::Binary ? 1 : static_cast<int>(c));
    }
  }
  out.values = Matrix(cohort.size(), owners.size());
  for (std::size_t r = 0; r < cohort.size(); ++r)
    for (std::size_t j = 0; j < owners.size(); ++j)
      out.values(r, j) = cohort.category(r, owners[j].first) == owners[j].second ? 1.0 : 0.0;
  return out;
}

std::vector<std::string> features_for_columns(const CohortSchema& schema, std::span<const std::string> columns) {
  std::set<std::size_t> owners;
  for (const auto& c : columns) {
    const auto owner = schema.column_owner(c);
    if (!owner) throw ValidationError("column not in schema: " + c);
    owners.insert(owner->feature);
  }
  std::vector<std::string> out;
  for (auto f : owners) out.push_back(schema.features()[f].name);
  return out;
}

std::vector<double> encode_row(const CohortSchema& schema, std::span<const std::string> columns, const FeatureMap& row) {
  for (const auto& [name, value] : row)
    if (!schema.feature_index(name)) throw FieldError(FieldError::Reason::Invalid, name, "unknown field: " + name);
  std::vector<double> out;
  out.reserve(columns.size());
  for (const auto& c : columns) {
    const auto owner = schema.column_owner(c);
    if (!owner) throw SchemaMismatchError("column not in schema: " + c);
    const auto& spec = schema.features()[owner->feature];
    const auto it = row.find(spec.name);
    if (it == row.end()) throw FieldError(FieldError::Reason::Missing, spec.name, "missing required field: " + spec.name);
    const int cat = spec.category_index(it->second);
    if (cat < 0)
      throw FieldError(FieldError::Reason::UnknownCategory, spec.name,
                       "unknown category '" + it->second + "' for field " + spec.name);
    out.push_back(cat == owner->category ? 1.0 : 0.0);
  }
  return out;
}

}  // namespace ckd
