#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "ckd/clinical/tools.hpp"
#include "ckd/cohort/schema.hpp"
#include "ckd/cohort/synthetic.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"
#include "ckd/eval/metrics.hpp"

using namespace ckd;

namespace {

// Every input at its first (reference) category, then the overrides.
FeatureMap patient(ToolId id, const FeatureMap& overrides) {
  FeatureMap p;
  for (const auto& in : clinical_tool(id).inputs) p[in.name] = in.categories.front();
  for (const auto& [k, v] : overrides) p[k] = v;
  return p;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(ClinicalTools, RequiredInputs) {
  using V = std::vector<std::string>;
  EXPECT_EQ(clinical_tool(ToolId::SCORED).required_features(), (V{"Age", "Gen", "HT", "DM", "PVD", "CVD", "HF", "Ane", "Ptn"}));
  EXPECT_EQ(clinical_tool(ToolId::KSHIRSAGAR).required_features(), (V{"Age", "Gen", "HT", "DM", "PVD", "CVD", "HF", "Ane"}));
  EXPECT_EQ(clinical_tool(ToolId::SPS).required_features(), (V{"Age", "DM", "KS", "Ane"}));
  EXPECT_EQ(clinical_tool(ToolId::KEARNS).required_features().size(), 13u);
  EXPECT_EQ(clinical_tool(ToolId::KWON).required_features(), (V{"Age", "Gen", "HT", "DM", "CVD", "Ane", "Ptn"}));
}

TEST(ClinicalTools, SpsCategoryMapping) {
  // Raw scores 0, 3, 5, 7 land at the four band floors.
  const std::vector<std::pair<FeatureMap, std::string>> cases{
      {{}, "low"},
      {{{"Age", "50-59"}}, "intermediate-low"},
      {{{"Age", "50-59"}, {"DM", "Yes"}}, "intermediate-high"},
      {{{"Age", "50-59"}, {"DM", "Yes"}, {"Ane", "Yes"}}, "high"}};
  for (const auto& [over, band] : cases) {
    const auto r = score_clinical(ToolId::SPS, patient(ToolId::SPS, over));
    ASSERT_TRUE(r.category);
    EXPECT_EQ(*r.category, band);
    EXPECT_EQ(r.binary_call, band == "low" ? 0 : 1);
  }
  const auto just_below = score_clinical(ToolId::SPS, patient(ToolId::SPS, {{"DM", "Yes"}}));
  EXPECT_DOUBLE_EQ(just_below.raw_score, 2);
  EXPECT_EQ(*just_below.category, "low");
  const auto r = score_clinical(ToolId::SPS, patient(ToolId::SPS, {{"Age", "60+"}, {"DM", "Yes"}, {"Ane", "Yes"}, {"KS", "Yes"}}));
  EXPECT_DOUBLE_EQ(r.raw_score, 9);
  EXPECT_EQ(*r.category, "high");
}

TEST(ClinicalTools, ScoredVignettes) {
  auto s = [](const FeatureMap& o) { return score_clinical(ToolId::SCORED, patient(ToolId::SCORED, o)); };
  EXPECT_DOUBLE_EQ(s({{"Age", "60-69"}, {"Gen", "Female"}, {"HT", "Yes"}}).raw_score, 5);
  EXPECT_EQ(s({{"Age", "60-69"}, {"Gen", "Female"}, {"HT", "Yes"}}).binary_call, 1);
  EXPECT_DOUBLE_EQ(s({{"DM", "Yes"}}).raw_score, 1);
  EXPECT_EQ(s({{"DM", "Yes"}}).binary_call, 0);
  EXPECT_EQ(s({{"Age", "50-59"}, {"HT", "Yes"}, {"DM", "Yes"}}).binary_call, 1);
  EXPECT_EQ(s({{"Age", "50-59"}, {"HT", "Yes"}}).binary_call, 0);
  EXPECT_DOUBLE_EQ(s({{"Age", "70+"}, {"PVD", "Yes"}, {"CVD", "Yes"}, {"HF", "Yes"}, {"Ptn", "Yes"}}).raw_score, 8);
}

TEST(ClinicalTools, KshirsagarVignettes) {
  auto s = [](const FeatureMap& o) { return score_clinical(ToolId::KSHIRSAGAR, patient(ToolId::KSHIRSAGAR, o)); };
  EXPECT_DOUBLE_EQ(s({}).raw_score, 0);
  EXPECT_EQ(s({}).binary_call, 0);
  EXPECT_EQ(s({{"Age", "70+"}}).binary_call, 1);
  EXPECT_DOUBLE_EQ(s({{"Age", "50-59"}, {"Gen", "Female"}}).raw_score, 2);
  EXPECT_EQ(s({{"Age", "50-59"}, {"Gen", "Female"}}).binary_call, 0);
  EXPECT_EQ(s({{"HT", "Yes"}, {"DM", "Yes"}, {"Ane", "Yes"}}).binary_call, 1);
}

TEST(ClinicalTools, KearnsVignettes) {
  auto s = [](const FeatureMap& o) { return score_clinical(ToolId::KEARNS, patient(ToolId::KEARNS, o)); };
  EXPECT_NEAR(s({}).raw_score, sigmoid(-3.0), 1e-12);
  EXPECT_EQ(s({}).binary_call, 0);
  const FeatureMap high{{"Age", "70+"}, {"Gen", "Female"}, {"HT", "Yes"}, {"DM", "Yes"}};
  EXPECT_NEAR(s(high).raw_score, sigmoid(-3.0 + 3.3 + 0.4 + 0.8 + 0.7), 1e-12);
  EXPECT_EQ(s(high).binary_call, 1);
  EXPECT_NEAR(s({{"Age", "60-69"}}).raw_score, sigmoid(-0.6), 1e-12);
  EXPECT_EQ(s({{"Age", "60-69"}}).binary_call, 0);
}

TEST(ClinicalTools, KwonVignettes) {
  auto s = [](const FeatureMap& o) { return score_clinical(ToolId::KWON, patient(ToolId::KWON, o)); };
  EXPECT_NEAR(s({}).raw_score, sigmoid(-2.5), 1e-12);
  const FeatureMap high{{"Age", "70+"}, {"HT", "Yes"}, {"Ptn", "Yes"}};
  EXPECT_NEAR(s(high).raw_score, sigmoid(1.9), 1e-12);
  EXPECT_EQ(s(high).binary_call, 1);
  EXPECT_NEAR(s({{"Age", "50-59"}, {"Gen", "Female"}}).raw_score, sigmoid(-1.3), 1e-12);
  EXPECT_EQ(s({{"Age", "50-59"}, {"Gen", "Female"}}).binary_call, 0);
}

TEST(ClinicalTools, MonotoneInEveryRiskFactor) {
  Rng rng(8);
  for (auto id : kAllTools) {
    const auto& tool = clinical_tool(id);
    for (int t = 0; t < 200; ++t) {
      FeatureMap p;
      for (const auto& in : tool.inputs) p[in.name] = in.categories[rng.below(in.categories.size())];
      const auto base = score_clinical(tool, p);
      for (const auto& in : tool.inputs) {
        if (in.categories.size() != 2) continue;
        auto q = p;
        q[in.name] = in.categories[1];
        const auto r = score_clinical(tool, q);
        EXPECT_GE(r.raw_score, base.raw_score);
        if (p[in.name] == in.categories[0]) EXPECT_GE(r.binary_call, base.binary_call);
      }
    }
  }
}

TEST(ClinicalTools, InputErrors) {
  try {
    score_clinical(ToolId::SPS, FeatureMap{{"Age", "<40"}});
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.reason(), FieldError::Reason::Missing);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("DM"), std::string::npos);
    EXPECT_NE(msg.find("KS"), std::string::npos);
    EXPECT_NE(msg.find("Ane"), std::string::npos);
  }
  try {
    score_clinical(ToolId::SPS, patient(ToolId::SPS, {{"Age", "elderly"}}));
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.reason(), FieldError::Reason::UnknownCategory);
    EXPECT_EQ(e.field(), "Age");
  }
}

TEST(ClinicalTools, ChecksumGuardsTranscription) {
  auto j = nlohmann::json::parse(read_text_file(scoring_dir() / "scored.json"));
  EXPECT_NO_THROW(ClinicalTool::from_json(j));
  j["weights"]["HT"]["Yes"] = 2;
  EXPECT_THROW(ClinicalTool::from_json(j), ValidationError);
  j["checksum"] = transcription_checksum(j);
  EXPECT_DOUBLE_EQ(ClinicalTool::from_json(j).weights.at("HT").at("Yes"), 2.0);
}

TEST(ClinicalTools, FourPatientSpsToy) {
  const std::vector<FeatureMap> rows{patient(ToolId::SPS, {}), patient(ToolId::SPS, {{"Age", "50-59"}}),
                                     patient(ToolId::SPS, {{"Age", "60+"}}), patient(ToolId::SPS, {{"DM", "Yes"}})};
  const std::vector<int> y{0, 1, 1, 1};
  std::vector<int> pred;
  for (const auto& r : rows) pred.push_back(score_clinical(ToolId::SPS, r).binary_call);
  EXPECT_EQ(pred, (std::vector<int>{0, 1, 1, 0}));
  const auto c = confusion(y, pred);
  EXPECT_EQ(c, (ConfusionCounts{2, 0, 1, 1}));
  EXPECT_NEAR(sensitivity_ckd(c), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(balanced_accuracy(c), 0.5 * (2.0 / 3.0 + 1.0), 1e-12);
}

TEST(ClinicalTools, ConstantDecisionScoresHalf) {
  const auto schema = CohortSchema::primary();
  std::vector<FeatureMap> rows;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({{"Age", "18-30y"}, {"Diabetes", "No"}, {"Anemia", "No"}});
    y.push_back(i < 4 ? 1 : 0);
  }
  const auto cohort = Cohort::from_maps(schema, rows, y);
  const auto ev = evaluate_tool(clinical_tool(ToolId::SPS), primary_binding(ToolId::SPS), cohort);
  EXPECT_DOUBLE_EQ(ev.get(Metric::BalancedAccuracy), 0.5);
  EXPECT_DOUBLE_EQ(ev.get(Metric::Sensitivity), 0.0);
  EXPECT_TRUE(ev.zero_division);
}

TEST(ClinicalTools, PrimaryBindingOnSyntheticCohort) {
  const auto schema = CohortSchema::primary();
  const auto cohort = synthesize_cohort(schema, marginals_spec(schema, 42));
  for (auto id : kAllTools) {
    const auto binding = primary_binding(id);
    const auto ev = evaluate_tool(clinical_tool(id), binding, cohort);
    EXPECT_EQ(ev.counts.total(), cohort.size());
    ASSERT_EQ(ev.results.size(), cohort.size());
    for (std::size_t i = 0; i < cohort.size(); i += 37)
      EXPECT_EQ(ev.results[i].binary_call, score_clinical(id, binding.bind(cohort.row_map(i))).binary_call);
  }
  const auto b = primary_binding(ToolId::SPS);
  const auto bound = b.bind({{"Age", "60+y"}, {"Diabetes", "Yes"}, {"Anemia", "No"}});
  EXPECT_EQ(bound.at("Age"), "60+");
  EXPECT_EQ(bound.at("KS"), "No");
}
