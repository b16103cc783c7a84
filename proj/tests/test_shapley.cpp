#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

#include "ckd/common/error.hpp"
#include "ckd/explain/shapley.hpp"
#include "ckd/models/factory.hpp"
#include "ckd/models/registry.hpp"
#include "ckd/models/trained_model.hpp"
#include "test_util.hpp"

using namespace ckd;

namespace {

const std::vector<std::string> kKinds{"LR", "DT", "KNN", "SVM", "RF", "ET", "AB", "GB", "XGB", "LGB", "CB", "MLP"};

int grow(Tree& t, Rng& rng, std::size_t d, int depth, int max_depth) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (depth == max_depth || (depth > 0 && rng.bernoulli(0.25))) {
    t.nodes[id].value = rng.uniform(-1, 1);
    return id;
  }
  t.nodes[id].feature = static_cast<int>(rng.below(d));
  t.nodes[id].threshold = rng.uniform();
  const int l = grow(t, rng, d, depth + 1, max_depth);
  const int r = grow(t, rng, d, depth + 1, max_depth);
  t.nodes[id].left = l;
  t.nodes[id].right = r;
  return id;
}

std::vector<double> random_point(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.uniform();
  return v;
}

// Smooth non-additive test function over three inputs.
class Interaction final : public Classifier {
 public:
  double predict_proba(std::span<const double> x) const override { return 0.5 * x[0] * x[1] + 0.1 * x[2]; }
  std::size_t n_features() const override { return 3; }
  nlohmann::json to_json() const override { return {}; }
};

std::vector<std::string> names(std::size_t d) {
  std::vector<std::string> n;
  for (std::size_t j = 0; j < d; ++j) n.push_back("f" + std::to_string(j));
  return n;
}

}  // namespace

TEST(TreeShap, MatchesBruteForceOnRandomShallowTrees) {
  Rng rng(21);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.below(4);
    Tree tree;
    grow(tree, rng, d, 0, 1 + static_cast<int>(rng.below(3)));
    ASSERT_LE(tree.depth(), 3);
    const auto x = random_point(rng, d);
    const auto z = random_point(rng, d);
    Matrix bg(1, d, z);
    const std::vector<double> w{1.0};
    const auto brute = test::brute_shapley([&](std::span<const double> v) { return tree.predict(v); }, x, bg, w);
    const auto phi = tree_shap(tree, x, z);
    ASSERT_EQ(phi.size(), d);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(phi[j], brute[j], 1e-9);
  }
}

TEST(TreeShap, EnsembleWithWeightedBackgroundMatchesBruteForce) {
  Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 4;
    TreeEnsemble ens;
    for (int k = 0; k < 3; ++k) {
      Tree tree;
      grow(tree, rng, d, 0, 3);
      ens.trees.push_back(tree);
    }
    ens.base = 0.5;
    ens.scale = 0.1;
    TreeModel model(ens, std::vector<double>(d, 0.0), d);
    Background bg{Matrix(5, d), {}};
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t j = 0; j < d; ++j) bg.rows(r, j) = rng.uniform();
    bg.weights = {0.1, 0.2, 0.3, 0.15, 0.25};
    const auto x = random_point(rng, d);
    const auto e = explain_local(model, x, bg, names(d));
    EXPECT_EQ(e.method, ShapMethod::TreeExact);
    const auto brute = test::brute_shapley([&](std::span<const double> v) { return model.predict_proba(v); }, x,
                                           bg.rows, bg.weights);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(e.contributions[j], brute[j], 1e-9);
  }
}

class ShapEveryKind : public ::testing::TestWithParam<std::string> {};

TEST_P(ShapEveryKind, ExactOnFourFeaturesAndLocallyAccurate) {
  const auto toy = test::or_toy(160, 0.05, 9);
  const std::vector<std::string> four{"A", "B", "C", "D"};
  const auto sub = toy.select_columns(four);
  const auto model = fit_classifier(make_classifier(GetParam()), sub.values, sub.labels);
  const auto bg = make_background(sub.values);
  for (std::size_t i = 0; i < 16; ++i) {
    const auto x = sub.values.row(i);
    const auto e = explain_local(*model, x, bg, four);
    const auto brute = test::brute_shapley([&](std::span<const double> v) { return model->predict_proba(v); }, x,
                                           bg.rows, bg.weights);
    double sum = e.base_value;
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(e.contributions[j], brute[j], 1e-9);
      sum += e.contributions[j];
    }
    EXPECT_NEAR(e.output_value, model->predict_proba(x), 1e-12);
    EXPECT_NEAR(sum, e.output_value, 1e-6);
  }
  // Full six-column toy and the local-accuracy identity on every row.
  const auto full = fit_classifier(make_classifier(GetParam()), toy.values, toy.labels);
  const auto bgf = make_background(toy.values);
  for (std::size_t i = 0; i < toy.rows(); i += 7) {
    const auto e = explain_local(*full, toy.values.row(i), bgf, toy.column_names);
    double sum = e.base_value;
    for (double c : e.contributions) sum += c;
    EXPECT_NEAR(sum, full->predict_proba(toy.values.row(i)), 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(Zoo, ShapEveryKind, ::testing::ValuesIn(kKinds));

TEST(Shapley, SampledPathKeepsLocalAccuracyAboveExactLimit) {
  Rng rng(30);
  const std::size_t d = 12;
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 150; ++i) {
    std::vector<double> r(d);
    for (auto& v : r) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
    rows.push_back(r);
    y.push_back((r[0] > 0 || r[3] > 0) != rng.bernoulli(0.05) ? 1 : 0);
  }
  const auto m = test::make_matrix(names(d), rows, y);
  for (const auto& kind : {"LR", "MLP", "KNN", "SVM"}) {
    const auto model = fit_classifier(make_classifier(kind), m.values, m.labels);
    const auto bg = make_background(m.values, 40);
    const auto e = explain_local(*model, m.values.row(0), bg, m.column_names);
    EXPECT_EQ(e.method, ShapMethod::Permutation) << kind;
    double sum = e.base_value;
    for (double c : e.contributions) sum += c;
    EXPECT_NEAR(sum, model->predict_proba(m.values.row(0)), 1e-6) << kind;
  }
}

TEST(Shapley, SymmetryNullPlayerAndSampler) {
  const Interaction f;
  Background bg{Matrix(1, 3, 0.0), {1.0}};
  const std::vector<double> x{1.0, 1.0, 0.0};
  const auto e = explain_local(f, x, bg, names(3));
  EXPECT_EQ(e.method, ShapMethod::Enumeration);
  EXPECT_NEAR(e.contributions[0], 0.25, 1e-12);
  EXPECT_NEAR(e.contributions[1], 0.25, 1e-12);
  EXPECT_NEAR(e.contributions[2], 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.base_value, 0.0);

  Background wide{Matrix(4, 3), {0.25, 0.25, 0.25, 0.25}};
  Rng rng(2);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t j = 0; j < 3; ++j) wide.rows(r, j) = rng.uniform();
  const std::vector<double> x2{0.9, 0.3, 0.6};
  const auto exact = explain_local(f, x2, wide, names(3));
  ExplainOptions o;
  o.force_sampling = true;
  o.permutations = 512;
  const auto s = explain_local(f, x2, wide, names(3), o);
  EXPECT_EQ(s.method, ShapMethod::Permutation);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LT(s.std_errors[j], 0.01);
    EXPECT_NEAR(s.contributions[j], exact.contributions[j], 4 * s.std_errors[j] + 1e-9);
    EXPECT_DOUBLE_EQ(exact.std_errors[j], 0.0);
  }
  const auto again = explain_local(f, x2, wide, names(3), o);
  EXPECT_EQ(again.contributions, s.contributions);
}

TEST(Shapley, GlobalImportanceIsMeanAbsolute) {
  const auto toy = test::or_toy(120, 0.05, 3);
  const auto model = fit_classifier(make_classifier("LR"), toy.values, toy.labels);
  const auto bg = make_background(toy.values);
  const auto X = toy.values.select_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
  const auto g = explain_global(*model, X, bg, toy.column_names);
  ASSERT_EQ(g.ranking.size(), 6u);
  for (std::size_t k = 1; k < g.ranking.size(); ++k) EXPECT_GE(g.ranking[k - 1].second, g.ranking[k].second);
  std::vector<double> mean(6, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto e = explain_local(*model, X.row(i), bg, toy.column_names);
    for (std::size_t j = 0; j < 6; ++j) mean[j] += std::abs(e.contributions[j]) / static_cast<double>(X.rows());
  }
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(g.value(toy.column_names[j]), mean[j], 1e-12);
  const std::set<std::string> top{g.ranking[0].first, g.ranking[1].first};
  EXPECT_EQ(top, (std::set<std::string>{"A", "B"}));
}

TEST(Shapley, SingleDriverRanksFirst) {
  Rng rng(12);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    const double h = rng.bernoulli(0.5) ? 1 : 0;
    rows.push_back({rng.bernoulli(0.5) ? 1.0 : 0.0, h, rng.bernoulli(0.5) ? 1.0 : 0.0});
    y.push_back(static_cast<int>(h));
  }
  const auto m = test::make_matrix({"Other", "Hypertension", "Noise"}, rows, y);
  const auto tm = train(make_classifier("DT"), m, "toy");
  const auto g = explain_global(tm, m.values);
  EXPECT_EQ(g.ranking[0].first, "Hypertension");
  EXPECT_NEAR(g.value("Other"), 0.0, 1e-12);
  EXPECT_NEAR(g.value("Noise"), 0.0, 1e-12);
  const std::vector<double> x{0, 1, 0};
  const auto e = explain_local(tm, x);
  EXPECT_GT(e.contribution("Hypertension"), 0.0);
  const auto w = e.waterfall(x);
  EXPECT_EQ(std::get<0>(w[0]), "Hypertension");
  const auto j = e.to_json(x);
  EXPECT_TRUE(j.contains("base_value"));
  EXPECT_THROW(explain_local(tm, "other-schema", x), SchemaMismatchError);
}
