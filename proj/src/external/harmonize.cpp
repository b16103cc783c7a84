#include "ckd/external/harmonize.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "ckd/cohort/discretize.hpp"
#include "ckd/common/delimited.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

std::string_view dataset_name(DatasetId id) {
  switch (id) {
    case DatasetId::UCI2015: return "UCI-2015";
    case DatasetId::UCI2023: return "UCI-2023";
    case DatasetId::TH: return "TH";
  }
  return "?";
}

std::string_view dataset_key(DatasetId id) {
  switch (id) {
    case DatasetId::UCI2015: return "UCI2015";
    case DatasetId::UCI2023: return "UCI2023";
    case DatasetId::TH: return "TH";
  }
  return "?";
}

DatasetId parse_dataset(std::string_view s) {
  for (auto d : kAllDatasets)
    if (dataset_name(d) == s || dataset_key(d) == s) return d;
  throw ValidationError("unknown external dataset " + std::string(s));
}

namespace {

std::string normalize(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string number_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string cell_text(const RawColumn& c, std::size_t r) {
  return c.numeric ? number_text(*c.numbers[r]) : normalize(*c.text[r]);
}

std::vector<std::string> lower_all(std::vector<std::string> v) {
  for (auto& s : v) s = normalize(s);
  return v;
}

}  // namespace

std::vector<std::string> HarmonizationMap::source_columns() const {
  std::vector<std::string> out;
  for (const auto& f : features)
    if (std::find(out.begin(), out.end(), f.column) == out.end()) out.push_back(f.column);
  return out;
}

void HarmonizationMap::validate(const CohortSchema& schema) const {
  if (features.empty()) throw ValidationError(std::string(dataset_name(dataset)) + " map shares no features");
  if (sets.empty()) throw ValidationError(std::string(dataset_name(dataset)) + " map has no constructed sets");
  for (const auto& f : features) {
    const auto& spec = schema.feature(f.feature);
    if (std::find(excluded_columns.begin(), excluded_columns.end(), f.column) != excluded_columns.end())
      throw ValidationError("excluded column " + f.column + " is bound to " + f.feature);
    if (f.numeric) {
      if (!spec.discretization) throw ValidationError(f.feature + " has no discretization rule for numeric input");
      if (spec.discretization->source_unit != f.unit)
        throw ValidationError("unit mismatch for " + f.feature + ": map gives " + f.unit + ", schema expects " +
                              spec.discretization->source_unit);
    } else {
      for (const auto& [src, cat] : f.map)
        if (spec.category_index(cat) < 0) throw ValidationError("map target " + f.feature + "=" + cat + " not in schema");
    }
  }
  for (const auto& [name, cols] : sets) {
    if (cols.empty()) throw ValidationError("constructed set " + name + " is empty");
    for (const auto& c : cols) {
      const auto owner = schema.column_owner(c);
      if (!owner) throw ValidationError("set column " + c + " is not a schema column");
      const auto& fname = schema.features()[owner->feature].name;
      if (std::none_of(features.begin(), features.end(), [&](const FeatureBinding& b) { return b.feature == fname; }))
        throw ValidationError("set column " + c + " has no bound source feature");
    }
  }
}

json HarmonizationMap::to_json() const {
  json feats = json::array();
  for (const auto& f : features) {
    json b{{"feature", f.feature}, {"column", f.column}};
    if (f.numeric) {
      b["type"] = "numeric";
      b["unit"] = f.unit;
      if (f.factor != 1) b["factor"] = f.factor;
    } else {
      b["type"] = "categorical";
      b["map"] = f.map;
    }
    if (!f.note.empty()) b["note"] = f.note;
    feats.push_back(b);
  }
  json j{{"dataset_id", std::string(dataset_key(dataset))},
         {"version", version},
         {"source_uri", source_uri},
         {"archive_member", archive_member},
         {"skip_rows", skip_rows},
         {"label", {{"column", label_column}, {"positive", positive_values}, {"negative", negative_values}}},
         {"keep", positives_only ? "positive_only" : "both"},
         {"excluded_columns", excluded_columns},
         {"imputation", {{"numeric", "mice"}, {"categorical", "most_frequent"}, {"iterations", imputation.iterations},
                         {"seed", imputation.seed}}},
         {"features", feats},
         {"sets", sets},
         {"unavailable_sets", unavailable}};
  if (sha256) j["sha256"] = *sha256;
  return j;
}

HarmonizationMap HarmonizationMap::from_json(const json& j) {
  HarmonizationMap m;
  m.dataset = parse_dataset(j.at("dataset_id").get<std::string>());
  m.version = j.at("version").get<int>();
  m.source_uri = j.at("source_uri").get<std::string>();
  m.archive_member = j.value("archive_member", "");
  if (j.contains("sha256") && !j.at("sha256").is_null()) m.sha256 = j.at("sha256").get<std::string>();
  m.skip_rows = j.value("skip_rows", std::size_t{0});
  const auto& l = j.at("label");
  m.label_column = l.at("column").get<std::string>();
  m.positive_values = lower_all(l.at("positive").get<std::vector<std::string>>());
  m.negative_values = lower_all(l.value("negative", std::vector<std::string>{}));
  const auto keep = j.value("keep", "both");
  if (keep != "both" && keep != "positive_only") throw ValidationError("unknown keep policy " + keep);
  m.positives_only = keep == "positive_only";
  m.excluded_columns = j.value("excluded_columns", std::vector<std::string>{});
  for (const auto& b : j.at("features")) {
    FeatureBinding f;
    f.feature = b.at("feature").get<std::string>();
    f.column = b.at("column").get<std::string>();
    const auto type = b.at("type").get<std::string>();
    if (type == "numeric") {
      f.numeric = true;
      f.unit = b.at("unit").get<std::string>();
      f.factor = b.value("factor", 1.0);
    } else if (type == "categorical") {
      for (const auto& [k, v] : b.at("map").items()) f.map[normalize(k)] = v.get<std::string>();
    } else {
      throw ValidationError("unknown binding type " + type);
    }
    f.note = b.value("note", "");
    m.features.push_back(std::move(f));
  }
  if (j.contains("imputation")) {
    const auto& im = j.at("imputation");
    m.imputation.iterations = im.value("iterations", 10);
    m.imputation.seed = im.value("seed", std::uint64_t{42});
  }
  m.sets = j.at("sets").get<std::map<std::string, std::vector<std::string>>>();
  m.unavailable = j.value("unavailable_sets", std::map<std::string, std::string>{});
  return m;
}

HarmonizationMap HarmonizationMap::load(const std::filesystem::path& path) {
  return from_json(json::parse(read_text_file(path)));
}

std::filesystem::path harmonization_dir() {
  if (const char* env = std::getenv("CKD_HARMONIZATION_DIR")) return env;
  return std::filesystem::path(CKD_SOURCE_DIR) / "harmonization";
}

const HarmonizationMap& builtin_map(DatasetId id) {
  static const std::array<HarmonizationMap, 3> maps = [] {
    std::array<HarmonizationMap, 3> m;
    for (auto d : {DatasetId::UCI2015, DatasetId::UCI2023, DatasetId::TH}) {
      std::string stem(dataset_key(d));
      std::transform(stem.begin(), stem.end(), stem.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      m[static_cast<std::size_t>(d)] = HarmonizationMap::load(harmonization_dir() / (stem + ".json"));
    }
    return m;
  }();
  return maps[static_cast<std::size_t>(id)];
}

RawTable parse_source_table(std::string_view text, bool arff, const HarmonizationMap& map) {
  if (arff) return parse_raw_arff(text);
  auto t = parse_delimited(text, sniff_delimiter(text));
  if (map.skip_rows > t.rows.size()) throw ValidationError("source has fewer rows than its metadata preamble");
  t.rows.erase(t.rows.begin(), t.rows.begin() + static_cast<std::ptrdiff_t>(map.skip_rows));
  return raw_table_from_cells(t.header, t.rows);
}

RawTable read_source_table(const std::filesystem::path& path, const HarmonizationMap& map) {
  const auto text = read_text_file(path);
  const bool arff = path.extension() == ".arff" || text.find("@data") != std::string::npos ||
                    text.find("@DATA") != std::string::npos;
  return parse_source_table(text, arff, map);
}

HarmonizeResult harmonize(const RawTable& raw, const HarmonizationMap& map, const CohortSchema& schema) {
  map.validate(schema);
  if (!raw.has_column(map.label_column)) throw ValidationError("missing label column: " + map.label_column);
  std::vector<std::string> keep_cols = map.source_columns();
  for (const auto& c : keep_cols)
    if (!raw.has_column(c)) throw ValidationError(std::string(dataset_name(map.dataset)) + " source lacks column " + c);

  // Label first: unlabelled rows are dropped, not imputed.
  const auto& label = raw.column(map.label_column);
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  HarmonizeResult res{Cohort(schema, {}, {}, {}), 0, 0, 0};
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    if (label.is_missing(r)) {
      ++res.dropped_unlabelled;
      continue;
    }
    const auto v = cell_text(label, r);
    int y = -1;
    if (std::find(map.positive_values.begin(), map.positive_values.end(), v) != map.positive_values.end()) y = 1;
    if (std::find(map.negative_values.begin(), map.negative_values.end(), v) != map.negative_values.end()) y = 0;
    if (y < 0) throw ValidationError("row " + std::to_string(r + 1) + ": unknown label value " + v);
    if (y == 0 && map.positives_only) {
      ++res.dropped_negative;
      continue;
    }
    rows.push_back(r);
    labels.push_back(y);
  }
  if (rows.empty()) throw ValidationError("no rows");

  // Coded categoricals (0/1) are kept as text so imputation takes the mode.
  auto categorical_use = [&](const std::string& c) {
    return std::any_of(map.features.begin(), map.features.end(),
                       [&](const FeatureBinding& b) { return b.column == c && !b.numeric; });
  };
  RawTable sub;
  for (const auto& c : keep_cols) {
    const auto& src = raw.column(c);
    const bool as_text = src.numeric && categorical_use(c);
    RawColumn col{src.name, src.numeric && !as_text, {}, {}};
    for (auto r : rows) {
      if (as_text) {
        col.text.push_back(src.numbers[r] ? std::optional<std::string>(number_text(*src.numbers[r])) : std::nullopt);
      } else if (src.numeric) {
        col.numbers.push_back(src.numbers[r]);
      } else {
        col.text.push_back(src.text[r] ? std::optional<std::string>(normalize(*src.text[r])) : std::nullopt);
      }
    }
    sub.columns.push_back(std::move(col));
  }
  res.imputed_cells = sub.missing_count();
  const RawTable full = res.imputed_cells > 0 ? impute(sub, map.imputation) : sub;

  std::vector<FeatureMap> maps(rows.size());
  // Categorical bindings first so sex is known before sex-specific rules.
  auto bindings = map.features;
  std::stable_partition(bindings.begin(), bindings.end(), [](const FeatureBinding& b) { return !b.numeric; });
  for (const auto& b : bindings) {
    const auto& col = full.column(b.column);
    const auto& spec = schema.feature(b.feature);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::string cat;
      if (b.numeric) {
        if (!col.numeric) throw ValidationError("column " + b.column + " is not numeric");
        const double v = *col.numbers[i] * b.factor;
        std::optional<std::string_view> sex;
        if (!spec.discretization->sex_specific.empty()) {
          const auto it = maps[i].find(schema.sex_feature());
          if (it == maps[i].end())
            throw ValidationError(b.feature + " needs " + schema.sex_feature() + " bound in the map");
          sex = it->second;
        }
        try {
          cat = discretize(v, b.unit, *spec.discretization, sex);
        } catch (const ValidationError& e) {
          throw ValidationError("row " + std::to_string(rows[i] + 1) + ", " + b.column + ": " + e.what());
        }
      } else {
        const auto key = cell_text(col, i);
        const auto it = b.map.find(key);
        if (it == b.map.end())
          throw FieldError(FieldError::Reason::UnknownCategory, b.feature,
                           "row " + std::to_string(rows[i] + 1) + ": unknown category " + b.column + "=" + key);
        cat = it->second;
      }
      maps[i][b.feature] = cat;
    }
  }
  res.cohort = Cohort::from_maps(schema, maps, labels,
                                 {std::string(dataset_key(map.dataset)), map.source_uri});
  return res;
}

}  // namespace ckd
