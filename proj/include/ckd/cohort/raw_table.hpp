#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ckd {

// A source table before harmonization: each column is numeric or textual and
// any cell may be missing.
struct RawColumn {
  std::string name;
  bool numeric = false;
  std::vector<std::optional<double>> numbers;
  std::vector<std::optional<std::string>> text;

  [[nodiscard]] std::size_t size() const { return numeric ? numbers.size() : text.size(); }
  [[nodiscard]] bool is_missing(std::size_t r) const { return numeric ? !numbers[r] : !text[r]; }
  [[nodiscard]] std::size_t missing_count() const;
};

struct RawTable {
  std::vector<RawColumn> columns;

  [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  [[nodiscard]] const RawColumn& column(std::string_view name) const;
  [[nodiscard]] RawColumn& column(std::string_view name);
  [[nodiscard]] bool has_column(std::string_view name) const;
  [[nodiscard]] std::size_t missing_count() const;
};

inline bool operator==(const RawColumn& a, const RawColumn& b) {
  return a.name == b.name && a.numeric == b.numeric && a.numbers == b.numbers && a.text == b.text;
}
inline bool operator==(const RawTable& a, const RawTable& b) { return a.columns == b.columns; }

const std::set<std::string>& default_missing_tokens();

// A column is numeric when every non-missing cell parses as a number.
RawTable raw_table_from_cells(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                              const std::set<std::string>& missing_tokens = default_missing_tokens());

// Delimited text (comma or tab) with a header row.
RawTable parse_raw_csv(std::string_view text);
// Weka ARFF: @attribute declarations followed by @data rows; '?' is missing.
RawTable parse_raw_arff(std::string_view text);
// Dispatches on extension (.arff) or content.
RawTable read_raw_table(const std::filesystem::path& path);

}  // namespace ckd
