#include "ckd/explain/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "ckd/common/delimited.hpp"
#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

using nlohmann::json;

std::string_view shap_method_name(ShapMethod m) {
  switch (m) {
    case ShapMethod::TreeExact: return "tree-exact";
    case ShapMethod::Enumeration: return "enumeration";
    case ShapMethod::Permutation: return "permutation";
  }
  return "?";
}

double Explanation::contribution(std::string_view feature) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i] == feature) return contributions[i];
  throw ValidationError("feature not explained: " + std::string(feature));
}

std::vector<std::tuple<std::string, double, double>> Explanation::waterfall(std::span<const double> x) const {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return std::abs(contributions[a]) > std::abs(contributions[b]); });
  std::vector<std::tuple<std::string, double, double>> out;
  for (auto i : order) out.emplace_back(features[i], i < x.size() ? x[i] : 0.0, contributions[i]);
  return out;
}

json Explanation::to_json(std::span<const double> x) const {
  json items = json::array();
  for (const auto& [f, v, c] : waterfall(x)) {
    json item{{"feature", f}, {"value", v}, {"contribution", c}};
    const auto idx = static_cast<std::size_t>(std::find(features.begin(), features.end(), f) - features.begin());
    if (!std_errors.empty() && std_errors[idx] > 0) item["std_error"] = std_errors[idx];
    items.push_back(item);
  }
  return {{"base_value", base_value},
          {"output_value", output_value},
          {"output_space", output_space == OutputSpace::Probability ? "probability" : "margin"},
          {"method", std::string(shap_method_name(method))},
          {"contributions", items}};
}

namespace {

std::vector<double> factorials(std::size_t n) {
  std::vector<double> f(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) f[i] = f[i - 1] * static_cast<double>(i);
  return f;
}

struct TreeShapWalk {
  const Tree& tree;
  std::span<const double> x;
  std::span<const double> z;
  std::vector<double>& phi;
  const std::vector<double>& fact;
  // 1 = feature taken from x on this path, 2 = from z, 0 = undecided.
  std::vector<char> side;
  std::vector<int> a_list;
  std::vector<int> b_list;

  void go(int node) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
      const std::size_t a = a_list.size();
      const std::size_t b = b_list.size();
      if (a > 0) {
        const double wa = n.value * fact[a - 1] * fact[b] / fact[a + b];
        for (int f : a_list) phi[static_cast<std::size_t>(f)] += wa;
      }
      if (b > 0) {
        const double wb = n.value * fact[a] * fact[b - 1] / fact[a + b];
        for (int f : b_list) phi[static_cast<std::size_t>(f)] -= wb;
      }
      return;
    }
    const auto f = static_cast<std::size_t>(n.feature);
    const int xs = x[f] < n.threshold ? n.left : n.right;
    const int zs = z[f] < n.threshold ? n.left : n.right;
    if (xs == zs) return go(xs);
    if (side[f] == 1) return go(xs);
    if (side[f] == 2) return go(zs);
    side[f] = 1;
    a_list.push_back(n.feature);
    go(xs);
    a_list.pop_back();
    side[f] = 2;
    b_list.push_back(n.feature);
    go(zs);
    b_list.pop_back();
    side[f] = 0;
  }
};

// True when every hybrid input keeps the identity output inside [0,1], so the
// clamp never binds and the ensemble is a plain sum of leaves.
bool additive_ensemble(const TreeEnsemble& e) {
  if (e.link != Link::Identity) return false;
  double lo = e.base;
  double hi = e.base;
  for (const auto& t : e.trees) {
    double tmin = INFINITY;
    double tmax = -INFINITY;
    for (const auto& n : t.nodes)
      if (n.is_leaf()) {
        tmin = std::min(tmin, n.value);
        tmax = std::max(tmax, n.value);
      }
    lo += e.scale * (e.scale >= 0 ? tmin : tmax);
    hi += e.scale * (e.scale >= 0 ? tmax : tmin);
  }
  return lo >= 0 && hi <= 1;
}

void check_inputs(const Classifier& model, std::span<const double> x, const Background& bg,
                  std::span<const std::string> names) {
  if (bg.size() == 0) throw ValidationError("explanation needs a non-empty background");
  if (x.size() != model.n_features() || bg.rows.cols() != x.size() || names.size() != x.size())
    throw ValidationError("explanation input has the wrong number of columns");
}

double background_value(const Classifier& model, const Background& bg) {
  double s = 0;
  for (std::size_t k = 0; k < bg.size(); ++k) s += bg.weights[k] * model.predict_proba(bg.rows.row(k));
  return s;
}

}  // namespace

std::vector<double> tree_shap(const Tree& tree, std::span<const double> x, std::span<const double> z) {
  std::vector<double> phi(x.size(), 0.0);
  const auto fact = factorials(static_cast<std::size_t>(std::max(tree.depth(), 0)) + 1);
  TreeShapWalk w{tree, x, z, phi, fact, std::vector<char>(x.size(), 0), {}, {}};
  if (!tree.nodes.empty()) w.go(0);
  return phi;
}

Explanation explain_local(const Classifier& model, std::span<const double> x, const Background& bg,
                          std::span<const std::string> names, const ExplainOptions& options) {
  check_inputs(model, x, bg, names);
  const std::size_t d = x.size();
  Explanation ex;
  ex.features.assign(names.begin(), names.end());
  ex.contributions.assign(d, 0.0);
  ex.std_errors.assign(d, 0.0);
  ex.output_value = model.predict_proba(x);
  ex.base_value = background_value(model, bg);

  if (!options.force_sampling) {
    if (const auto* ens = model.tree_ensemble(); ens && additive_ensemble(*ens)) {
      ex.method = ShapMethod::TreeExact;
      for (std::size_t k = 0; k < bg.size(); ++k) {
        const auto z = bg.rows.row(k);
        for (const auto& t : ens->trees) {
          const auto phi = tree_shap(t, x, z);
          for (std::size_t j = 0; j < d; ++j) ex.contributions[j] += bg.weights[k] * ens->scale * phi[j];
        }
      }
      return ex;
    }
    if (d <= options.exact_limit) {
      ex.method = ShapMethod::Enumeration;
      const std::size_t n_sets = std::size_t{1} << d;
      std::vector<double> v(n_sets, 0.0);
      std::vector<double> hybrid(d);
      for (std::size_t s = 0; s < n_sets; ++s) {
        double acc = 0;
        for (std::size_t k = 0; k < bg.size(); ++k) {
          const auto z = bg.rows.row(k);
          for (std::size_t j = 0; j < d; ++j) hybrid[j] = (s >> j & 1) ? x[j] : z[j];
          acc += bg.weights[k] * model.predict_proba(hybrid);
        }
        v[s] = acc;
      }
      const auto fact = factorials(d);
      for (std::size_t s = 0; s < n_sets; ++s) {
        const auto size = static_cast<std::size_t>(std::popcount(s));
        if (size == d) continue;
        const double w = fact[size] * fact[d - size - 1] / fact[d];
        for (std::size_t j = 0; j < d; ++j)
          if (!(s >> j & 1)) ex.contributions[j] += w * (v[s | (std::size_t{1} << j)] - v[s]);
      }
      // Both v(full) and v(empty) are exact, so additivity holds to rounding.
      return ex;
    }
  }

  ex.method = ShapMethod::Permutation;
  const std::size_t pairs = std::max<std::size_t>(1, options.permutations / 2);
  Rng rng(options.seed);
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> sum(d, 0.0);
  std::vector<double> sum_sq(d, 0.0);
  std::vector<double> est(d);
  std::vector<double> hybrid(d);
  for (std::size_t p = 0; p < pairs; ++p) {
    rng.shuffle(std::span<std::size_t>(perm));
    std::fill(est.begin(), est.end(), 0.0);
    for (int dir = 0; dir < 2; ++dir) {
      for (std::size_t k = 0; k < bg.size(); ++k) {
        const auto z = bg.rows.row(k);
        std::copy(z.begin(), z.end(), hybrid.begin());
        double prev = model.predict_proba(hybrid);
        for (std::size_t step = 0; step < d; ++step) {
          const auto j = dir == 0 ? perm[step] : perm[d - 1 - step];
          hybrid[j] = x[j];
          const double cur = model.predict_proba(hybrid);
          est[j] += 0.5 * bg.weights[k] * (cur - prev);
          prev = cur;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += est[j];
      sum_sq[j] += est[j] * est[j];
    }
  }
  const double n = static_cast<double>(pairs);
  for (std::size_t j = 0; j < d; ++j) {
    ex.contributions[j] = sum[j] / n;
    if (pairs > 1) {
      const double var = std::max(0.0, (sum_sq[j] - sum[j] * sum[j] / n) / (n - 1));
      ex.std_errors[j] = std::sqrt(var / n);
    }
  }
  return ex;
}

Explanation explain_local(const TrainedModel& model, std::span<const double> x, const ExplainOptions& options) {
  return explain_local(model.classifier(), x, model.background(), model.columns(), options);
}

Explanation explain_local(const TrainedModel& model, const std::string& schema_hash, std::span<const double> x,
                          const ExplainOptions& options) {
  model.require_schema(schema_hash);
  return explain_local(model, x, options);
}

double GlobalImportance::value(std::string_view feature) const {
  for (const auto& [f, v] : ranking)
    if (f == feature) return v;
  throw ValidationError("feature not ranked: " + std::string(feature));
}

json GlobalImportance::to_json() const {
  json arr = json::array();
  for (const auto& [f, v] : ranking) arr.push_back({{"feature", f}, {"mean_abs_contribution", v}});
  return {{"ranking", arr}};
}

std::string GlobalImportance::to_delimited() const {
  DelimitedTable t;
  t.header = {"Rank", "Feature", "Mean |SHAP|"};
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", ranking[i].second);
    t.rows.push_back({std::to_string(i + 1), ranking[i].first, buf});
  }
  return format_delimited(t);
}

GlobalImportance explain_global(const Classifier& model, const Matrix& X, const Background& bg,
                                std::span<const std::string> names, const ExplainOptions& options) {
  if (X.rows() == 0) throw ValidationError("global explanation needs at least one row");
  std::vector<double> acc(names.size(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    ExplainOptions o = options;
    o.seed = derive_seed(options.seed, i);
    const auto ex = explain_local(model, X.row(i), bg, names, o);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += std::abs(ex.contributions[j]);
  }
  std::vector<std::size_t> order(acc.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return acc[a] > acc[b]; });
  GlobalImportance g;
  for (auto j : order) g.ranking.emplace_back(names[j], acc[j] / static_cast<double>(X.rows()));
  return g;
}

GlobalImportance explain_global(const TrainedModel& model, const Matrix& X, const ExplainOptions& options) {
  return explain_global(model.classifier(), X, model.background(), model.columns(), options);
}

}  // namespace ckd
