#include "ckd/cohort/raw_table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "ckd/common/delimited.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

std::size_t RawColumn::missing_count() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < size(); ++r) n += is_missing(r) ? 1 : 0;
  return n;
}

const RawColumn& RawTable::column(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw ValidationError("no column named " + std::string(name));
}

RawColumn& RawTable::column(std::string_view name) {
  return const_cast<RawColumn&>(static_cast<const RawTable&>(*this).column(name));
}

bool RawTable::has_column(std::string_view name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const RawColumn& c) { return c.name == name; });
}

std::size_t RawTable::missing_count() const {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.missing_count();
  return n;
}

const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens{"", "?", "NA", "N/A", "NaN", "nan", "null", "NULL"};
  return tokens;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

RawTable raw_table_from_cells(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                              const std::set<std::string>& missing_tokens) {
  RawTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::vector<std::optional<std::string>> cells;
    cells.reserve(rows.size());
    bool numeric = true;
    bool any = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != header.size())
        throw ValidationError("row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                              " cells, expected " + std::to_string(header.size()));
      auto v = trim(rows[r][c]);
      if (missing_tokens.contains(v)) {
        cells.emplace_back();
        continue;
      }
      any = true;
      numeric = numeric && parse_number(v).has_value();
      cells.emplace_back(std::move(v));
    }
    RawColumn col;
    col.name = trim(header[c]);
    col.numeric = numeric && any;
    if (col.numeric) {
      for (const auto& v : cells) col.numbers.push_back(v ? parse_number(*v) : std::nullopt);
    } else {
      col.text = std::move(cells);
    }
    table.columns.push_back(std::move(col));
  }
  return table;
}

RawTable parse_raw_csv(std::string_view text) {
  const auto t = parse_delimited(text, sniff_delimiter(text));
  return raw_table_from_cells(t.header, t.rows);
}

RawTable parse_raw_arff(std::string_view text) {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool in_data = false;
  std::size_t pos = 0;
  std::string data_block;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty() || line[0] == '%') continue;
    if (in_data) {
      data_block += line;
      data_block += '\n';
      continue;
    }
    std::string lower(line);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (lower.rfind("@attribute", 0) == 0) {
      auto rest = trim(std::string_view(line).substr(10));
      std::string name;
      if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
        const auto close = rest.find(rest[0], 1);
        if (close == std::string::npos) throw ValidationError("unterminated attribute name: " + line);
        name = rest.substr(1, close - 1);
      } else {
        name = rest.substr(0, rest.find_first_of(" \t"));
      }
      header.push_back(name);
    } else if (lower.rfind("@data", 0) == 0) {
      in_data = true;
    }
  }
  if (header.empty()) throw ValidationError("ARFF file declares no attributes");
  const auto t = parse_delimited("x\n" + data_block, ',');
  for (auto row : t.rows) {
    // Some public ARFF files carry stray trailing commas or tabs.
    while (row.size() > header.size() && trim(row.back()).empty()) row.pop_back();
    for (auto& cell : row) {
      cell = trim(cell);
      if (cell.size() >= 2 && cell.front() == '\'' && cell.back() == '\'') cell = cell.substr(1, cell.size() - 2);
    }
    rows.push_back(std::move(row));
  }
  return raw_table_from_cells(header, rows);
}

RawTable read_raw_table(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".arff" || text.find("@data") != std::string::npos || text.find("@DATA") != std::string::npos)
    return parse_raw_arff(text);
  return parse_raw_csv(text);
}

}  // namespace ckd
