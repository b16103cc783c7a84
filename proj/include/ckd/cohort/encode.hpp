#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ckd/cohort/cohort.hpp"
#include "ckd/common/matrix.hpp"

namespace ckd {

// One-hot design matrix. Labels use 1 for the positive class.
struct EncodedMatrix {
  std::vector<std::string> column_names;
  Matrix values;
  std::vector<int> labels;
  std::string schema_hash;

  [[nodiscard]] std::size_t rows() const { return values.rows(); }
  [[nodiscard]] std::size_t cols() const { return values.cols(); }
  [[nodiscard]] int column_index(std::string_view name) const;
  // Throws ValidationError naming the first column not present.
  [[nodiscard]] EncodedMatrix select_columns(std::span<const std::string> names) const;
  [[nodiscard]] EncodedMatrix select_rows(std::span<const std::size_t> idx) const;
};

// Columns follow schema feature order, categories in declared order, for the
// cohort's present features.
EncodedMatrix encode_onehot(const Cohort& cohort);

// Encodes one feature map onto `columns` of `schema`. Every feature owning one
// of the columns must be supplied with a valid category; keys that are not
// schema features are rejected.
std::vector<double> encode_row(const CohortSchema& schema, std::span<const std::string> columns, const FeatureMap& row);

// Features owning any of the columns, in schema order.
std::vector<std::string> features_for_columns(const CohortSchema& schema, std::span<const std::string> columns);

}  // namespace ckd
