#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ckd {

// A header row plus string cells, as read from CSV/TSV text.
struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  [[nodiscard]] int column_index(std::string_view name) const;
};

// Parses RFC 4180 style text. Quoted fields may contain the delimiter,
// doubled quotes and newlines. A trailing empty line is ignored.
DelimitedTable parse_delimited(std::string_view text, char delimiter = ',');

// Guesses ',' or '\t' from the first line.
char sniff_delimiter(std::string_view text);

std::string format_delimited(const DelimitedTable& table, char delimiter = ',');

}  // namespace ckd
