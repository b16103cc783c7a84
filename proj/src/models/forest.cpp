#include "ckd/models/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

std::size_t resolve_max_features(const std::string& rule, std::size_t d) {
  std::size_t k = d;
  if (rule == "sqrt") {
    k = static_cast<std::size_t>(std::sqrt(static_cast<double>(d)));
  } else if (rule == "log2") {
    k = static_cast<std::size_t>(std::log2(static_cast<double>(std::max<std::size_t>(d, 1))));
  } else if (rule == "half") {
    k = d / 2;
  } else if (rule != "all") {
    throw ValidationError("unknown max_features rule " + rule);
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(d, 1));
}

namespace {

void check_inputs(const Matrix& X, std::span<const int> y, std::span<const double> w) {
  if (X.rows() == 0) throw ValidationError("cannot fit on zero rows");
  if (y.size() != X.rows() || w.size() != X.rows()) throw ValidationError("dimension mismatch");
}

std::vector<double> gini_targets(std::span<const int> y, std::span<const double> w) {
  std::vector<double> g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] == 1 ? w[i] : 0.0;
  return g;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

TreeConfig cart_config(const Params& p) {
  TreeConfig c;
  c.criterion = Criterion::Gini;
  c.max_depth = static_cast<int>(get_int(p, "max_depth"));
  c.min_samples_leaf = static_cast<std::size_t>(get_int(p, "min_samples_leaf"));
  return c;
}

// Shared by RF and ET; they differ only in bootstrap and threshold choice.
std::unique_ptr<TreeModel> fit_bagged(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                      const Params& p, std::uint64_t seed, bool bootstrap) {
  check_inputs(X, y, w);
  const BinnedData data(X);
  const auto n = X.rows();
  TreeConfig cfg = cart_config(p);
  cfg.max_features = resolve_max_features(get_string(p, "max_features"), X.cols());
  cfg.random_thresholds = !bootstrap;
  const auto n_trees = static_cast<std::size_t>(get_int(p, "n_estimators"));
  TreeEnsemble ens;
  ens.link = Link::Identity;
  ens.scale = 1.0 / static_cast<double>(n_trees);
  std::vector<double> gain_total(X.cols(), 0.0);
  std::vector<double> gain;
  std::vector<double> wb(n);
  std::vector<double> gb(n);
  std::vector<std::size_t> counts(n);
  for (std::size_t t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> rows;
    if (bootstrap) {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
      for (std::size_t i = 0; i < n; ++i) {
        wb[i] = w[i] * static_cast<double>(counts[i]);
        gb[i] = y[i] == 1 ? wb[i] : 0.0;
        if (counts[i] > 0) rows.push_back(i);
      }
    } else {
      rows = all_rows(n);
      for (std::size_t i = 0; i < n; ++i) {
        wb[i] = w[i];
        gb[i] = y[i] == 1 ? w[i] : 0.0;
      }
    }
    gain.assign(X.cols(), 0.0);
    const RowStats stats{gb, {}, wb};
    ens.trees.push_back(build_tree(data, rows, stats, cfg, rng, {}, &gain));
    const auto norm = normalize_importances(gain);
    for (std::size_t j = 0; j < gain.size(); ++j) gain_total[j] += norm[j];
  }
  return std::make_unique<TreeModel>(std::move(ens), std::move(gain_total), X.cols());
}

}  // namespace

std::unique_ptr<TreeModel> fit_decision_tree(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                             const Params& p, std::uint64_t seed) {
  check_inputs(X, y, w);
  const BinnedData data(X);
  TreeConfig cfg = cart_config(p);
  cfg.min_samples_split = static_cast<std::size_t>(get_int(p, "min_samples_split"));
  const auto g = gini_targets(y, w);
  const auto rows = all_rows(X.rows());
  Rng rng(seed);
  std::vector<double> gain(X.cols(), 0.0);
  TreeEnsemble ens;
  ens.trees.push_back(build_tree(data, rows, RowStats{g, {}, w}, cfg, rng, {}, &gain));
  return std::make_unique<TreeModel>(std::move(ens), std::move(gain), X.cols());
}

std::unique_ptr<TreeModel> fit_random_forest(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                             const Params& p, std::uint64_t seed) {
  return fit_bagged(X, y, w, p, seed, true);
}

std::unique_ptr<TreeModel> fit_extra_trees(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                           const Params& p, std::uint64_t seed) {
  return fit_bagged(X, y, w, p, seed, false);
}

std::unique_ptr<TreeModel> fit_adaboost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                        const Params& p, std::uint64_t seed) {
  check_inputs(X, y, w);
  const auto n = X.rows();
  const BinnedData data(X);
  TreeConfig cfg;
  cfg.criterion = Criterion::Gini;
  cfg.max_depth = static_cast<int>(get_int(p, "max_depth"));
  const auto n_rounds = static_cast<std::size_t>(get_int(p, "n_estimators"));
  const double lr = get_double(p, "learning_rate");
  const auto rows = all_rows(n);
  std::vector<double> sw(w.begin(), w.end());
  double total = std::accumulate(sw.begin(), sw.end(), 0.0);
  for (auto& v : sw) v /= total;
  std::vector<double> g(n);
  std::vector<double> gain_total(X.cols(), 0.0);
  std::vector<double> gain;
  std::vector<char> miss(n);
  TreeEnsemble ens;
  ens.link = Link::Logistic;
  double alpha_sum = 0;
  for (std::size_t t = 0; t < n_rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) g[i] = y[i] == 1 ? sw[i] : 0.0;
    Rng rng(derive_seed(seed, t));
    gain.assign(X.cols(), 0.0);
    Tree tree = build_tree(data, rows, RowStats{g, {}, sw}, cfg, rng, {}, &gain);
    // Leaves vote +1 for the positive class, -1 otherwise.
    for (auto& node : tree.nodes)
      if (node.is_leaf()) node.value = node.value > 0.5 ? 1.0 : -1.0;
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int pred = tree.predict(X.row(i)) > 0 ? 1 : 0;
      miss[i] = pred != y[i];
      if (miss[i]) err += sw[i];
    }
    err /= std::accumulate(sw.begin(), sw.end(), 0.0);
    double alpha = 0;
    bool stop = false;
    if (err <= 1e-12) {
      alpha = 1.0;
      stop = true;
    } else if (err >= 0.5) {
      if (!ens.trees.empty()) break;
      alpha = 1.0;
      stop = true;
    } else {
      alpha = lr * std::log((1.0 - err) / err);
    }
    tree.scale_leaves(alpha);
    ens.trees.push_back(std::move(tree));
    alpha_sum += alpha;
    const auto norm = normalize_importances(gain);
    for (std::size_t j = 0; j < gain.size(); ++j) gain_total[j] += alpha * norm[j];
    if (stop) break;
    for (std::size_t i = 0; i < n; ++i)
      if (miss[i]) sw[i] *= std::exp(alpha);
    total = std::accumulate(sw.begin(), sw.end(), 0.0);
    for (auto& v : sw) v /= total;
  }
  ens.scale = 1.0 / alpha_sum;
  return std::make_unique<TreeModel>(std::move(ens), std::move(gain_total), X.cols());
}

}  // namespace ckd
