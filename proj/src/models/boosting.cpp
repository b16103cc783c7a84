#include "ckd/models/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

namespace {

struct BoostSettings {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  double subsample = 1.0;
  double colsample = 1.0;
  TreeConfig tree;
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Logistic-loss boosting shared by the four variants.
std::unique_ptr<TreeModel> boost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                 const BoostSettings& s, std::uint64_t seed) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n == 0) throw ValidationError("cannot fit on zero rows");
  if (y.size() != n || w.size() != n) throw ValidationError("dimension mismatch");
  const BinnedData data(X);
  double wpos = 0;
  double wall = 0;
  for (std::size_t i = 0; i < n; ++i) {
    wall += w[i];
    if (y[i] == 1) wpos += w[i];
  }
  const double prior = std::clamp(wpos / wall, 1e-6, 1.0 - 1e-6);
  TreeEnsemble ens;
  ens.link = Link::Logistic;
  ens.base = std::log(prior / (1.0 - prior));
  std::vector<double> F(n, ens.base);
  std::vector<double> g(n);
  std::vector<double> h(n);
  std::vector<double> gain_total(d, 0.0);
  std::vector<double> gain;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);
  for (std::size_t t = 0; t < s.rounds; ++t) {
    Rng rng(derive_seed(seed, t));
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(F[i]);
      g[i] = w[i] * (p - y[i]);
      h[i] = w[i] * p * (1.0 - p);
    }
    std::vector<std::size_t> rows = all;
    if (s.subsample < 1.0) {
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.subsample * static_cast<double>(n))));
      rng.shuffle(std::span<std::size_t>(rows));
      rows.resize(k);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<std::size_t> features;
    if (s.colsample < 1.0) {
      features = all_features;
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.colsample * static_cast<double>(d))));
      rng.shuffle(std::span<std::size_t>(features));
      features.resize(k);
      std::sort(features.begin(), features.end());
    }
    gain.assign(d, 0.0);
    Tree tree = build_tree(data, rows, RowStats{g, h, w}, s.tree, rng, features, &gain);
    tree.scale_leaves(s.learning_rate);
    if (tree.nodes.size() == 1 && std::abs(tree.nodes[0].value) < 1e-15) break;
    for (std::size_t i = 0; i < n; ++i) F[i] += tree.predict(X.row(i));
    for (std::size_t j = 0; j < d; ++j) gain_total[j] += gain[j];
    ens.trees.push_back(std::move(tree));
  }
  return std::make_unique<TreeModel>(std::move(ens), std::move(gain_total), d);
}

}  // namespace

std::unique_ptr<TreeModel> fit_gradient_boosting(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                                 const Params& p, std::uint64_t seed) {
  BoostSettings s;
  s.rounds = static_cast<std::size_t>(get_int(p, "n_estimators"));
  s.learning_rate = get_double(p, "learning_rate");
  s.subsample = get_double(p, "subsample");
  s.tree.criterion = Criterion::Gradient;
  s.tree.max_depth = static_cast<int>(get_int(p, "max_depth"));
  s.tree.min_samples_leaf = static_cast<std::size_t>(get_int(p, "min_samples_leaf"));
  return boost(X, y, w, s, seed);
}

std::unique_ptr<TreeModel> fit_xgboost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                       const Params& p, std::uint64_t seed) {
  BoostSettings s;
  s.rounds = static_cast<std::size_t>(get_int(p, "n_estimators"));
  s.learning_rate = get_double(p, "learning_rate");
  s.subsample = get_double(p, "subsample");
  s.colsample = get_double(p, "colsample_bytree");
  s.tree.criterion = Criterion::Newton;
  s.tree.max_depth = static_cast<int>(get_int(p, "max_depth"));
  s.tree.min_child_weight = get_double(p, "min_child_weight");
  s.tree.lambda = get_double(p, "reg_lambda");
  s.tree.gamma = get_double(p, "gamma");
  return boost(X, y, w, s, seed);
}

std::unique_ptr<TreeModel> fit_lightgbm(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                        const Params& p, std::uint64_t seed) {
  BoostSettings s;
  s.rounds = static_cast<std::size_t>(get_int(p, "n_estimators"));
  s.learning_rate = get_double(p, "learning_rate");
  s.colsample = get_double(p, "feature_fraction");
  s.tree.criterion = Criterion::Newton;
  s.tree.growth = Growth::LeafWise;
  s.tree.max_leaves = static_cast<std::size_t>(get_int(p, "num_leaves"));
  s.tree.min_samples_leaf = static_cast<std::size_t>(get_int(p, "min_child_samples"));
  s.tree.min_child_weight = 1e-3;
  s.tree.lambda = get_double(p, "reg_lambda");
  return boost(X, y, w, s, seed);
}

std::unique_ptr<TreeModel> fit_catboost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                        const Params& p, std::uint64_t seed) {
  BoostSettings s;
  s.rounds = static_cast<std::size_t>(get_int(p, "iterations"));
  s.learning_rate = get_double(p, "learning_rate");
  s.tree.criterion = Criterion::Newton;
  s.tree.growth = Growth::Oblivious;
  s.tree.max_depth = static_cast<int>(get_int(p, "depth"));
  s.tree.lambda = get_double(p, "l2_leaf_reg");
  return boost(X, y, w, s, seed);
}

}  // namespace ckd
