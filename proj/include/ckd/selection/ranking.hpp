#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ckd {

enum class SelectionMethod { MWU, LASSO, RFECV_LR, RFECV_DT, RFECV_RF, RFECV_GB, RFECV_AB, RFECV_ET, RFECV_XGB, RFECV_CB };
inline constexpr std::array<SelectionMethod, 10> kAllSelectionMethods{
    SelectionMethod::MWU,      SelectionMethod::LASSO,    SelectionMethod::RFECV_LR, SelectionMethod::RFECV_DT,
    SelectionMethod::RFECV_RF, SelectionMethod::RFECV_GB, SelectionMethod::RFECV_AB, SelectionMethod::RFECV_ET,
    SelectionMethod::RFECV_XGB, SelectionMethod::RFECV_CB};

std::string_view method_name(SelectionMethod m);
SelectionMethod parse_method(std::string_view name);
// Classifier kind driving an RFECV method, empty for MWU and LASSO.
std::optional<std::string_view> rfecv_estimator(SelectionMethod m);

// S1 covers every column, S2 every column outside the pathology group.
enum class Scope { S1, S2 };
std::string_view scope_name(Scope s);
Scope parse_scope(std::string_view name);

struct RankEntry {
  std::string feature;
  std::size_t rank = 0;
  double score = 0;
  friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

struct FeatureRanking {
  SelectionMethod method = SelectionMethod::MWU;
  Scope scope = Scope::S1;
  std::vector<RankEntry> entries;
  std::vector<std::string> selected;

  // Ranks start at 1 and increase along the list; selected entries exist.
  void validate() const;
  [[nodiscard]] std::optional<std::size_t> rank_of(std::string_view feature) const;
  [[nodiscard]] bool is_selected(std::string_view feature) const;
  [[nodiscard]] std::vector<std::string> top(std::size_t n) const;
  [[nodiscard]] nlohmann::json to_json() const;
  static FeatureRanking from_json(const nlohmann::json& j);
  friend bool operator==(const FeatureRanking&, const FeatureRanking&) = default;
};

nlohmann::json rankings_to_json(std::span<const FeatureRanking> rankings);
std::vector<FeatureRanking> rankings_from_json(const nlohmann::json& j);
std::vector<FeatureRanking> load_rankings(const std::filesystem::path& path);

// Feature x method matrix of ranks for one scope; unselected cells are blank.
// Rows follow `feature_order` restricted to features selected somewhere.
std::string format_ranking_table(std::span<const FeatureRanking> rankings, Scope scope,
                                 std::span<const std::string> feature_order);

}  // namespace ckd
