#include "ckd/cohort/schema.hpp"

#include <algorithm>
#include <set>

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::SD: return "SD";
    case FeatureGroup::LH: return "LH";
    case FeatureGroup::MH: return "MH";
    case FeatureGroup::CE: return "CE";
    case FeatureGroup::Path: return "Path";
  }
  return "?";
}

FeatureGroup parse_feature_group(std::string_view s) {
  if (s == "SD") return FeatureGroup::SD;
  if (s == "LH") return FeatureGroup::LH;
  if (s == "MH") return FeatureGroup::MH;
  if (s == "CE") return FeatureGroup::CE;
  if (s == "Path") return FeatureGroup::Path;
  throw ValidationError("unknown feature group: " + std::string(s));
}

json DiscretizationRule::to_json() const {
  json j{{"source_unit", source_unit}, {"breakpoints", breakpoints}, {"labels", labels}};
  if (!sex_specific.empty()) j["sex_specific"] = sex_specific;
  if (valid_min) j["valid_min"] = *valid_min;
  return j;
}

DiscretizationRule DiscretizationRule::from_json(const json& j) {
  DiscretizationRule r;
  r.source_unit = j.at("source_unit").get<std::string>();
  r.breakpoints = j.value("breakpoints", std::vector<double>{});
  r.labels = j.at("labels").get<std::vector<std::string>>();
  if (j.contains("sex_specific")) r.sex_specific = j.at("sex_specific").get<std::map<std::string, std::vector<double>>>();
  if (j.contains("valid_min")) r.valid_min = j.at("valid_min").get<double>();
  return r;
}

int FeatureSpec::category_index(std::string_view category) const {
  const auto it = std::find(categories.begin(), categories.end(), category);
  return it == categories.end() ? -1 : static_cast<int>(it - categories.begin());
}

std::vector<std::string> FeatureSpec::column_names() const {
  if (kind == FeatureKind::Binary) return {name};
  std::vector<std::string> out;
  out.reserve(categories.size());
  for (const auto& c : categories) out.push_back(name + "_" + c);
  return out;
}

json FeatureSpec::to_json() const {
  json j{{"name", name},
         {"group", std::string(to_string(group))},
         {"kind", kind == FeatureKind::Binary ? "binary" : "categorical"},
         {"categories", categories},
         {"description", description}};
  if (discretization) j["discretization"] = discretization->to_json();
  return j;
}

FeatureSpec FeatureSpec::from_json(const json& j) {
  FeatureSpec f;
  f.name = j.at("name").get<std::string>();
  f.group = parse_feature_group(j.at("group").get<std::string>());
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "binary") {
    f.kind = FeatureKind::Binary;
  } else if (kind == "categorical") {
    f.kind = FeatureKind::Categorical;
  } else {
    throw ValidationError("feature " + f.name + ": unknown kind " + kind);
  }
  f.categories = j.at("categories").get<std::vector<std::string>>();
  f.description = j.value("description", "");
  if (j.contains("discretization")) f.discretization = DiscretizationRule::from_json(j.at("discretization"));
  return f;
}

CohortSchema::CohortSchema(std::vector<FeatureSpec> features, std::string label_name, std::string positive_label,
                           std::string negative_label, std::string sex_feature)
    : features_(std::move(features)),
      label_name_(std::move(label_name)),
      positive_label_(std::move(positive_label)),
      negative_label_(std::move(negative_label)),
      sex_feature_(std::move(sex_feature)) {
  validate();
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& spec = features_[f];
    if (spec.kind == FeatureKind::Binary) {
      owners_.emplace(spec.name, ColumnOwner{f, 1});
    } else {
      for (std::size_t c = 0; c < spec.categories.size(); ++c)
        owners_.emplace(spec.name + "_" + spec.categories[c], ColumnOwner{f, static_cast<int>(c)});
    }
  }
  hash_ = sha256_hex(to_json().dump());
}

void CohortSchema::validate() const {
  if (features_.empty()) throw ValidationError("schema declares no features");
  if (label_name_.empty()) throw ValidationError("schema label name is empty");
  if (positive_label_ == negative_label_) throw ValidationError("schema label values must differ");
  std::set<std::string> names;
  std::set<std::string> columns;
  for (const auto& f : features_) {
    if (f.name.empty()) throw ValidationError("feature with empty name");
    if (!names.insert(f.name).second) throw ValidationError("duplicate feature name: " + f.name);
    if (f.name == label_name_) throw ValidationError("feature name collides with label: " + f.name);
    if (f.categories.empty()) throw ValidationError("feature " + f.name + " has no categories");
    std::set<std::string> cats(f.categories.begin(), f.categories.end());
    if (cats.size() != f.categories.size()) throw ValidationError("feature " + f.name + " has duplicate categories");
    if (f.kind == FeatureKind::Binary && f.categories.size() != 2)
      throw ValidationError("binary feature " + f.name + " must have exactly 2 categories");
    for (const auto& col : f.column_names())
      if (!columns.insert(col).second) throw ValidationError("duplicate encoded column: " + col);
    if (!f.discretization) continue;
    const auto& r = *f.discretization;
    for (const auto& l : r.labels)
      if (!cats.contains(l)) throw ValidationError("feature " + f.name + ": band label not a category: " + l);
    auto check_breaks = [&](const std::vector<double>& b) {
      if (b.size() + 1 != r.labels.size())
        throw ValidationError("feature " + f.name + ": labels must number breakpoints + 1");
      if (!std::is_sorted(b.begin(), b.end()) || std::adjacent_find(b.begin(), b.end()) != b.end())
        throw ValidationError("feature " + f.name + ": breakpoints must be strictly increasing");
    };
    if (r.sex_specific.empty()) {
      check_breaks(r.breakpoints);
      continue;
    }
    if (!r.breakpoints.empty()) check_breaks(r.breakpoints);
    for (const auto& [sex, b] : r.sex_specific) check_breaks(b);
    if (sex_feature_.empty()) throw ValidationError("feature " + f.name + " is sex specific but no sex feature is set");
    const auto sex_it = std::find_if(features_.begin(), features_.end(),
                                     [&](const FeatureSpec& s) { return s.name == sex_feature_; });
    if (sex_it == features_.end()) throw ValidationError("sex feature not declared: " + sex_feature_);
    for (const auto& c : sex_it->categories)
      if (!r.sex_specific.contains(c))
        throw ValidationError("feature " + f.name + ": sex-specific bands do not cover " + c);
  }
}

json CohortSchema::to_json() const {
  json features = json::array();
  for (const auto& f : features_) features.push_back(f.to_json());
  json j{{"schema_version", kSchemaVersion},
         {"label", {{"name", label_name_}, {"positive", positive_label_}, {"negative", negative_label_}}},
         {"features", features}};
  if (!sex_feature_.empty()) j["sex_feature"] = sex_feature_;
  return j;
}

CohortSchema CohortSchema::from_json(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion)
    throw ValidationError("unsupported schema_version " + std::to_string(version));
  std::vector<FeatureSpec> features;
  for (const auto& f : j.at("features")) features.push_back(FeatureSpec::from_json(f));
  const auto& label = j.at("label");
  return CohortSchema(std::move(features), label.at("name").get<std::string>(), label.at("positive").get<std::string>(),
                      label.at("negative").get<std::string>(), j.value("sex_feature", ""));
}

CohortSchema CohortSchema::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw ValidationError("schema " + path.string() + ": " + e.what());
  }
}

std::filesystem::path source_data_dir() {
  if (const char* env = std::getenv("CKD_DATA_DIR")) return env;
  return std::filesystem::path(CKD_SOURCE_DIR) / "data";
}

CohortSchema CohortSchema::primary() { return load(source_data_dir() / "schema" / "primary_schema.json"); }

const FeatureSpec& CohortSchema::feature(std::string_view name) const {
  const auto idx = feature_index(name);
  if (!idx) throw ValidationError("unknown feature: " + std::string(name));
  return features_[*idx];
}

std::optional<std::size_t> CohortSchema::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> CohortSchema::columns() const {
  std::vector<std::string> out;
  for (const auto& f : features_)
    for (auto& c : f.column_names()) out.push_back(std::move(c));
  return out;
}

std::vector<std::string> CohortSchema::columns_in_groups(std::span<const FeatureGroup> groups) const {
  std::vector<std::string> out;
  for (const auto& f : features_) {
    if (std::find(groups.begin(), groups.end(), f.group) == groups.end()) continue;
    for (auto& c : f.column_names()) out.push_back(std::move(c));
  }
  return out;
}

std::optional<ColumnOwner> CohortSchema::column_owner(std::string_view column) const {
  const auto it = owners_.find(std::string(column));
  if (it == owners_.end()) return std::nullopt;
  return it->second;
}

}  // namespace ckd
