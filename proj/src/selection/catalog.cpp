#include "ckd/selection/catalog.hpp"

#include <algorithm>

#include "ckd/common/error.hpp"
#include "ckd/selection/lasso.hpp"
#include "ckd/selection/mwu.hpp"
#include "ckd/selection/rfecv.hpp"

namespace ckd {

using nlohmann::json;

SetAggregate aggregate_sets(std::span<const FeatureRanking> rankings) {
  if (rankings.empty()) throw ValidationError("aggregation needs at least one ranking");
  for (const auto& r : rankings)
    if (r.scope != rankings.front().scope) throw ValidationError("rankings span more than one scope");
  SetAggregate out;
  for (const auto& r : rankings)
    for (const auto& f : r.selected)
      if (std::find(out.union_set.begin(), out.union_set.end(), f) == out.union_set.end()) out.union_set.push_back(f);
  for (const auto& f : out.union_set) {
    const bool everywhere =
        std::all_of(rankings.begin(), rankings.end(), [&](const FeatureRanking& r) { return r.is_selected(f); });
    if (everywhere) out.common.push_back(f);
  }
  return out;
}

std::string scoped_name(std::string_view base, Scope scope) {
  return std::string(base) + "(" + std::string(scope_name(scope)) + ")";
}

std::vector<std::string> scope_columns(const CohortSchema& schema, Scope scope) {
  if (scope == Scope::S1) return schema.columns();
  const FeatureGroup g[]{FeatureGroup::SD, FeatureGroup::LH, FeatureGroup::MH, FeatureGroup::CE};
  return schema.columns_in_groups(g);
}

FeatureSetCatalog::FeatureSetCatalog(const CohortSchema& schema) {
  using G = FeatureGroup;
  for (auto g : {G::SD, G::LH, G::MH, G::CE, G::Path}) {
    const G one[]{g};
    add(std::string(to_string(g)), schema.columns_in_groups(one));
  }
  const G c2[]{G::SD, G::LH};
  const G c3[]{G::SD, G::LH, G::MH};
  const G c4[]{G::SD, G::LH, G::MH, G::CE};
  add("SD-LH", schema.columns_in_groups(c2));
  add("SD-LH-MH", schema.columns_in_groups(c3));
  add("SD-LH-MH-CE", schema.columns_in_groups(c4));
  add("All", schema.columns());
  add("S1", scope_columns(schema, Scope::S1));
  add("S2", scope_columns(schema, Scope::S2));
  const auto cols = schema.columns();
  for (const auto* preset : {&kBestS1, &kBestS2})
    for (const auto& c : *preset)
      if (std::find(cols.begin(), cols.end(), c) == cols.end())
        throw ValidationError("preset column " + c + " is not in the schema");
  add("BestS1", kBestS1);
  add("BestS2", kBestS2);
}

void FeatureSetCatalog::add(std::string name, std::vector<std::string> columns) {
  sets_.insert_or_assign(std::move(name), std::move(columns));
}

void FeatureSetCatalog::add_rankings(std::span<const FeatureRanking> rankings) {
  for (auto scope : {Scope::S1, Scope::S2}) {
    std::vector<FeatureRanking> in_scope;
    for (const auto& r : rankings)
      if (r.scope == scope) in_scope.push_back(r);
    if (in_scope.empty()) continue;
    for (const auto& r : in_scope) add(scoped_name(method_name(r.method), scope), r.selected);
    auto agg = aggregate_sets(in_scope);
    add(scoped_name("Union", scope), std::move(agg.union_set));
    add(scoped_name("Common", scope), std::move(agg.common));
  }
}

bool FeatureSetCatalog::contains(std::string_view name) const { return sets_.find(name) != sets_.end(); }

const std::vector<std::string>& FeatureSetCatalog::at(std::string_view name) const {
  const auto it = sets_.find(name);
  if (it == sets_.end()) throw ValidationError("unknown feature set " + std::string(name));
  return it->second;
}

json FeatureSetCatalog::to_json() const {
  json sets = json::object();
  for (const auto& [k, v] : sets_) sets[k] = v;
  return {{"format", "ckdscreen-feature-sets"}, {"version", 1}, {"sets", sets}};
}

FeatureRanking run_selection(SelectionMethod method, const EncodedMatrix& data, const CohortSchema& schema,
                             Scope scope, std::uint64_t seed) {
  const auto cols = scope_columns(schema, scope);
  std::vector<std::string> present;
  for (const auto& c : cols)
    if (data.column_index(c) >= 0) present.push_back(c);
  const auto sub = data.select_columns(present);
  switch (method) {
    case SelectionMethod::MWU: return mwu_rank(sub, scope);
    case SelectionMethod::LASSO: {
      LassoOptions o;
      o.seed = seed;
      return lasso_rank(sub, scope, o);
    }
    default: {
      RfecvOptions o;
      o.seed = seed;
      return rfecv_rank(sub, method, scope, o);
    }
  }
}

std::vector<FeatureRanking> recorded_rankings() {
  return load_rankings(source_data_dir() / "golden" / "recorded_selections.json");
}

}  // namespace ckd
