#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ckd/cohort/encode.hpp"
#include "ckd/cohort/schema.hpp"
#include "ckd/selection/ranking.hpp"

namespace ckd {

inline const std::vector<std::string> kBestS1{"Hypertension", "Age_60+y", "Diabetes", "Anemia", "BMI_Obese",
                                              "RBC", "Daily sleep<7h", "Gender", "Family hypertension"};
inline const std::vector<std::string> kBestS2{"Hypertension", "Age_60+y", "Anemia",
                                              "Diabetes",     "Daily sleep<7h", "Age_18-30y"};

struct SetAggregate {
  std::vector<std::string> union_set;
  std::vector<std::string> common;
};

// Exact set algebra over the selections of rankings that share one scope.
// Members keep the order of first appearance across the rankings.
SetAggregate aggregate_sets(std::span<const FeatureRanking> rankings);

// Names such as "RFECV+CB(S1)" or "Union(S2)".
std::string scoped_name(std::string_view base, Scope scope);

class FeatureSetCatalog {
 public:
  // Group sets, group combinations, All, the S1/S2 scopes and both presets.
  explicit FeatureSetCatalog(const CohortSchema& schema);

  // Adds per-method selections and the union/common sets of every scope
  // present in the rankings.
  void add_rankings(std::span<const FeatureRanking> rankings);
  void add(std::string name, std::vector<std::string> columns);

  [[nodiscard]] bool contains(std::string_view name) const;
  // Throws ValidationError for an unknown name.
  [[nodiscard]] const std::vector<std::string>& at(std::string_view name) const;
  [[nodiscard]] const std::map<std::string, std::vector<std::string>, std::less<>>& sets() const { return sets_; }
  [[nodiscard]] nlohmann::json to_json() const;

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> sets_;
};

// Columns eligible under a scope.
std::vector<std::string> scope_columns(const CohortSchema& schema, Scope scope);

// Runs one selection method on the scope's columns of `data`.
FeatureRanking run_selection(SelectionMethod method, const EncodedMatrix& data, const CohortSchema& schema,
                             Scope scope, std::uint64_t seed = 42);

// The recorded selections bundled with the source tree.
std::vector<FeatureRanking> recorded_rankings();

}  // namespace ckd
