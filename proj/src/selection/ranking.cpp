#include "ckd/selection/ranking.hpp"

#include <algorithm>

#include "ckd/common/delimited.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

std::string_view method_name(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::MWU: return "MWU";
    case SelectionMethod::LASSO: return "LASSO";
    case SelectionMethod::RFECV_LR: return "RFECV+LR";
    case SelectionMethod::RFECV_DT: return "RFECV+DT";
    case SelectionMethod::RFECV_RF: return "RFECV+RF";
    case SelectionMethod::RFECV_GB: return "RFECV+GB";
    case SelectionMethod::RFECV_AB: return "RFECV+AB";
    case SelectionMethod::RFECV_ET: return "RFECV+ET";
    case SelectionMethod::RFECV_XGB: return "RFECV+XGB";
    case SelectionMethod::RFECV_CB: return "RFECV+CB";
  }
  return "?";
}

SelectionMethod parse_method(std::string_view name) {
  for (auto m : kAllSelectionMethods)
    if (method_name(m) == name) return m;
  throw ValidationError("unknown selection method " + std::string(name));
}

std::optional<std::string_view> rfecv_estimator(SelectionMethod m) {
  const auto n = method_name(m);
  if (!n.starts_with("RFECV+")) return std::nullopt;
  return n.substr(6);
}

std::string_view scope_name(Scope s) { return s == Scope::S1 ? "S1" : "S2"; }

Scope parse_scope(std::string_view name) {
  if (name == "S1") return Scope::S1;
  if (name == "S2") return Scope::S2;
  throw ValidationError("unknown scope " + std::string(name));
}

void FeatureRanking::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].rank < 1) throw ValidationError("ranks start at 1");
    if (i > 0 && entries[i].rank <= entries[i - 1].rank) throw ValidationError("ranks must increase in list order");
  }
  for (const auto& s : selected)
    if (!rank_of(s)) throw ValidationError("selected feature " + s + " has no ranking entry");
}

std::optional<std::size_t> FeatureRanking::rank_of(std::string_view feature) const {
  for (const auto& e : entries)
    if (e.feature == feature) return e.rank;
  return std::nullopt;
}

bool FeatureRanking::is_selected(std::string_view feature) const {
  return std::find(selected.begin(), selected.end(), feature) != selected.end();
}

std::vector<std::string> FeatureRanking::top(std::size_t n) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, entries.size()); ++i) out.push_back(entries[i].feature);
  return out;
}

json FeatureRanking::to_json() const {
  json e = json::array();
  for (const auto& x : entries) e.push_back({{"feature", x.feature}, {"rank", x.rank}, {"score", x.score}});
  return {{"method", std::string(method_name(method))},
          {"scope", std::string(scope_name(scope))},
          {"entries", e},
          {"selected", selected}};
}

FeatureRanking FeatureRanking::from_json(const json& j) {
  FeatureRanking r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.scope = parse_scope(j.at("scope").get<std::string>());
  for (const auto& e : j.at("entries"))
    r.entries.push_back({e.at("feature").get<std::string>(), e.at("rank").get<std::size_t>(), e.value("score", 0.0)});
  // Recorded rankings list selected features only.
  if (j.contains("selected")) {
    r.selected = j.at("selected").get<std::vector<std::string>>();
  } else {
    for (const auto& e : r.entries) r.selected.push_back(e.feature);
  }
  r.validate();
  return r;
}

json rankings_to_json(std::span<const FeatureRanking> rankings) {
  json arr = json::array();
  for (const auto& r : rankings) arr.push_back(r.to_json());
  return {{"format", "ckdscreen-rankings"}, {"version", 1}, {"rankings", arr}};
}

std::vector<FeatureRanking> rankings_from_json(const json& j) {
  if (j.value("format", "") != "ckdscreen-rankings") throw ValidationError("not a rankings file");
  std::vector<FeatureRanking> out;
  for (const auto& r : j.at("rankings")) out.push_back(FeatureRanking::from_json(r));
  return out;
}

std::vector<FeatureRanking> load_rankings(const std::filesystem::path& path) {
  return rankings_from_json(json::parse(read_text_file(path)));
}

std::string format_ranking_table(std::span<const FeatureRanking> rankings, Scope scope,
                                 std::span<const std::string> feature_order) {
  std::vector<const FeatureRanking*> cols;
  for (const auto& r : rankings)
    if (r.scope == scope) cols.push_back(&r);
  DelimitedTable t;
  t.header = {"Feature"};
  for (const auto* r : cols) t.header.emplace_back(method_name(r->method));
  for (const auto& f : feature_order) {
    std::vector<std::string> cells{f};
    bool any = false;
    for (const auto* r : cols) {
      const auto rank = r->rank_of(f);
      if (rank && r->is_selected(f)) {
        cells.push_back(std::to_string(*rank));
        any = true;
      } else {
        cells.emplace_back();
      }
    }
    if (any) t.rows.push_back(std::move(cells));
  }
  return format_delimited(t);
}

}  // namespace ckd
