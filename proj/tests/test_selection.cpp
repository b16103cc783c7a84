#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ckd/cohort/encode.hpp"
#include "ckd/cohort/schema.hpp"
#include "ckd/cohort/synthetic.hpp"
#include "ckd/common/error.hpp"
#include "ckd/models/factory.hpp"
#include "ckd/selection/catalog.hpp"
#include "ckd/selection/lasso.hpp"
#include "ckd/selection/mwu.hpp"
#include "ckd/selection/rfecv.hpp"
#include "test_util.hpp"

using namespace ckd;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

const CohortSchema& schema() {
  static const CohortSchema s = CohortSchema::primary();
  return s;
}

}  // namespace

TEST(Mwu, EightSampleMatchesEnumeration) {
  const std::vector<double> a{1.1, 2.3, 3.0, 4.8};
  const std::vector<double> b{0.5, 1.9, 2.2, 0.7};
  double u = 0;
  const double p = test::brute_mwu_p(a, b, &u);
  const auto r = mann_whitney(a, b);
  EXPECT_TRUE(r.exact);
  EXPECT_DOUBLE_EQ(r.u, u);
  EXPECT_NEAR(r.p_value, p, 1e-12);
  EXPECT_NEAR(r.effect, 2 * u / 16 - 1, 1e-12);
}

TEST(Mwu, RandomSmallInputsMatchEnumeration) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n1 = 1 + rng.below(6);
    const std::size_t n2 = 1 + rng.below(12 - n1);
    std::vector<double> a(n1), b(n2);
    // Coarse values force ties, including binary columns.
    const auto levels = 2 + rng.below(6);
    for (auto& v : a) v = static_cast<double>(rng.below(levels));
    for (auto& v : b) v = static_cast<double>(rng.below(levels));
    double u = 0;
    const double p = test::brute_mwu_p(a, b, &u);
    const auto r = mann_whitney_exact(a, b);
    EXPECT_DOUBLE_EQ(r.u, u);
    EXPECT_NEAR(r.p_value, p, 1e-12);
  }
}

TEST(Mwu, ConstantColumnAndNormalApproximation) {
  const std::vector<double> ones(7, 1.0), ones2(5, 1.0);
  EXPECT_DOUBLE_EQ(mann_whitney(ones, ones2).p_value, 1.0);
  std::vector<double> a(40), b(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = static_cast<double>(i) + 10;
    b[i] = static_cast<double>(i);
  }
  const auto r = mann_whitney(a, b);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LT(r.p_value, 0.05);
  EXPECT_THROW(mann_whitney(std::vector<double>{}, b), ValidationError);
}

TEST(Lasso, StrongPenaltySelectsNothing) {
  const auto toy = test::or_toy();
  LassoOptions o;
  const auto w = class_weights(toy.labels, ClassWeighting::Balanced);
  const double lmax = lambda_max(toy.values, toy.labels, w);
  o.lambda = lmax * 1.01;
  const auto r = lasso_rank(toy, Scope::S1, o);
  EXPECT_TRUE(r.selected.empty());
  const auto fit = fit_l1_logistic(toy.values, toy.labels, w, lmax * 0.5);
  EXPECT_NE(fit.coef[0], 0.0);
  EXPECT_NE(fit.coef[1], 0.0);
}

TEST(Lasso, PathIsDecreasingAndChosenWithinIt) {
  LassoPath path;
  const auto r = lasso_rank(test::or_toy(), Scope::S1, LassoOptions{}, &path);
  ASSERT_EQ(path.lambdas.size(), path.cv_scores.size());
  for (std::size_t i = 1; i < path.lambdas.size(); ++i) EXPECT_LT(path.lambdas[i], path.lambdas[i - 1]);
  EXPECT_LT(path.chosen, path.lambdas.size());
  r.validate();
}

TEST(Rfecv, SingleColumnAndElimination) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({static_cast<double>(i % 2)});
    labels.push_back(i % 2 == 1 || i == 4 ? 1 : 0);
  }
  const auto one = test::make_matrix({"x"}, rows, labels);
  const auto r = rfecv_rank(one, SelectionMethod::RFECV_DT);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.selected, std::vector<std::string>{"x"});
  RfecvTrace trace;
  const auto toy = test::or_toy();
  const auto t = rfecv_rank(toy, SelectionMethod::RFECV_LR, Scope::S1, {}, &trace);
  EXPECT_EQ(trace.scores.size(), 6u);
  EXPECT_EQ(t.selected.size(), trace.chosen_size);
  EXPECT_THROW(rfecv_rank(toy, SelectionMethod::MWU), ValidationError);
}

TEST(SelectionOracle, AllTenMethodsRankInformativeFirst) {
  const auto toy = test::or_toy(200, 0.05, 7);
  const std::set<std::string> informative{"A", "B"};
  for (auto m : kAllSelectionMethods) {
    FeatureRanking r;
    if (m == SelectionMethod::MWU) {
      r = mwu_rank(toy);
    } else if (m == SelectionMethod::LASSO) {
      r = lasso_rank(toy);
    } else {
      r = rfecv_rank(toy, m);
    }
    r.validate();
    // LASSO ranks only the columns it keeps.
    if (m != SelectionMethod::LASSO) EXPECT_EQ(r.entries.size(), 6u) << method_name(m);
    EXPECT_EQ(as_set(r.top(2)), informative) << method_name(m);
  }
}

TEST(Ranking, JsonRoundTripAndValidation) {
  FeatureRanking r{SelectionMethod::RFECV_CB, Scope::S2, {{"A", 1, 0.5}, {"B", 2, 0.2}}, {"A"}};
  EXPECT_EQ(FeatureRanking::from_json(r.to_json()), r);
  EXPECT_EQ(r.rank_of("B"), 2u);
  EXPECT_FALSE(r.rank_of("C"));
  EXPECT_TRUE(r.is_selected("A"));
  auto bad = r;
  bad.selected.push_back("Z");
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_EQ(parse_method("RFECV+CB"), SelectionMethod::RFECV_CB);
  EXPECT_EQ(scoped_name("Union", Scope::S2), "Union(S2)");
}

TEST(SetAlgebra, RecordedSelectionsGolden) {
  const auto all = recorded_rankings();
  ASSERT_EQ(all.size(), 20u);
  std::vector<FeatureRanking> s1, s2;
  for (const auto& r : all) (r.scope == Scope::S1 ? s1 : s2).push_back(r);
  ASSERT_EQ(s1.size(), 10u);
  ASSERT_EQ(s2.size(), 10u);
  const auto a1 = aggregate_sets(s1);
  const auto a2 = aggregate_sets(s2);
  EXPECT_EQ(as_set(a2.common), (std::set<std::string>{"Hypertension", "Age_60+y"}));
  auto expected = as_set(a2.common);
  expected.insert("RBC");
  EXPECT_EQ(as_set(a1.common), expected);
}

TEST(SetAlgebra, UnionCommonInvariants) {
  Rng rng(4);
  const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f", "g"};
  for (int t = 0; t < 100; ++t) {
    std::vector<FeatureRanking> rs;
    const auto k = 1 + rng.below(5);
    for (std::size_t i = 0; i < k; ++i) {
      FeatureRanking r;
      std::size_t rank = 1;
      for (const auto& f : pool) {
        r.entries.push_back({f, rank++, 0});
        if (rng.bernoulli(0.5)) r.selected.push_back(f);
      }
      rs.push_back(r);
    }
    const auto agg = aggregate_sets(rs);
    for (const auto& f : pool) {
      const bool any = std::any_of(rs.begin(), rs.end(), [&](const auto& r) { return r.is_selected(f); });
      const bool every = std::all_of(rs.begin(), rs.end(), [&](const auto& r) { return r.is_selected(f); });
      EXPECT_EQ(as_set(agg.union_set).count(f) == 1, any);
      EXPECT_EQ(as_set(agg.common).count(f) == 1, every);
    }
    EXPECT_EQ(as_set(agg.union_set).size(), agg.union_set.size());
  }
}

TEST(Catalog, PresetsAndScopes) {
  FeatureSetCatalog cat(schema());
  EXPECT_EQ(cat.at("BestS1"), kBestS1);
  EXPECT_EQ(cat.at("BestS2"), kBestS2);
  EXPECT_EQ(cat.at("All").size(), 35u);
  EXPECT_THROW((void)cat.at("NoSuchSet"), ValidationError);
  const auto s1 = scope_columns(schema(), Scope::S1);
  const auto s2 = scope_columns(schema(), Scope::S2);
  EXPECT_EQ(s1.size(), 35u);
  EXPECT_TRUE(std::find(s2.begin(), s2.end(), "RBC") == s2.end());
  EXPECT_TRUE(std::find(s2.begin(), s2.end(), "Hypertension") != s2.end());
  cat.add_rankings(recorded_rankings());
  EXPECT_TRUE(cat.contains("Common(S2)"));
  EXPECT_TRUE(cat.contains("Union(S1)"));
  EXPECT_TRUE(cat.contains("RFECV+CB(S1)"));
}

TEST(Catalog, RunSelectionRespectsScope) {
  const auto cohort = synthesize_cohort(schema(), marginals_spec(schema(), 42));
  const auto data = encode_onehot(cohort);
  const auto r = run_selection(SelectionMethod::MWU, data, schema(), Scope::S2);
  const auto s2 = as_set(scope_columns(schema(), Scope::S2));
  for (const auto& e : r.entries) EXPECT_TRUE(s2.count(e.feature)) << e.feature;
  EXPECT_EQ(r.rank_of("Hypertension"), 1u);
}
