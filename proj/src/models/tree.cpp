#include "ckd/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

double Tree::predict(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return best;
}

std::vector<int> Tree::used_features() const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (!n.is_leaf()) out.push_back(n.feature);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void Tree::scale_leaves(double factor) {
  for (auto& n : nodes)
    if (n.is_leaf()) n.value *= factor;
}

json Tree::to_json() const {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value, cover;
  for (const auto& n : nodes) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
    value.push_back(n.value);
    cover.push_back(n.cover);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value},         {"cover", cover}};
}

Tree Tree::from_json(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto cover = j.at("cover").get<std::vector<double>>();
  const auto n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || cover.size() != n || n == 0)
    throw ValidationError("malformed tree");
  Tree t;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                            left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n)))
      throw ValidationError("malformed tree: bad child index");
    t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], cover[i]});
  }
  return t;
}

double TreeEnsemble::raw(std::span<const double> x) const {
  double s = 0;
  for (const auto& t : trees) s += t.predict(x);
  return base + scale * s;
}

double TreeEnsemble::predict(std::span<const double> x) const {
  const double r = raw(x);
  if (link == Link::Logistic) return 1.0 / (1.0 + std::exp(-r));
  return std::clamp(r, 0.0, 1.0);
}

json TreeEnsemble::to_json() const {
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(t.to_json());
  return {{"base", base},
          {"scale", scale},
          {"link", link == Link::Logistic ? "logistic" : "identity"},
          {"trees", trees_json}};
}

TreeEnsemble TreeEnsemble::from_json(const json& j) {
  TreeEnsemble e;
  e.base = j.at("base").get<double>();
  e.scale = j.at("scale").get<double>();
  e.link = j.at("link").get<std::string>() == "logistic" ? Link::Logistic : Link::Identity;
  for (const auto& t : j.at("trees")) e.trees.push_back(Tree::from_json(t));
  return e;
}

BinnedData::BinnedData(const Matrix& X, std::size_t max_bins) : n_(X.rows()) {
  const auto d = X.cols();
  thresholds_.resize(d);
  bins_.resize(d * n_);
  std::vector<double> col(n_);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t r = 0; r < n_; ++r) {
      col[r] = X(r, f);
      if (std::isnan(col[r])) throw ValidationError("NaN in training matrix");
    }
    std::vector<double> uniq = col;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto& th = thresholds_[f];
    if (uniq.size() > 1) {
      if (uniq.size() <= max_bins) {
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i) th.push_back(0.5 * (uniq[i] + uniq[i + 1]));
      } else {
        const auto m = max_bins - 1;
        for (std::size_t q = 1; q <= m; ++q) {
          const auto i = q * (uniq.size() - 1) / (m + 1);
          const double t = 0.5 * (uniq[i] + uniq[i + 1]);
          if (th.empty() || t > th.back()) th.push_back(t);
        }
      }
    }
    for (std::size_t r = 0; r < n_; ++r)
      bins_[f * n_ + r] = static_cast<std::uint16_t>(std::upper_bound(th.begin(), th.end(), col[r]) - th.begin());
  }
}

namespace {

struct Stats {
  double g = 0;
  double h = 0;
  double w = 0;
  std::size_t n = 0;

  void add(const Stats& o) {
    g += o.g;
    h += o.h;
    w += o.w;
    n += o.n;
  }
  [[nodiscard]] Stats minus(const Stats& o) const { return {g - o.g, h - o.h, w - o.w, n - o.n}; }
};

struct Split {
  bool valid = false;
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  int bin = -1;
};

class Builder {
 public:
  Builder(const BinnedData& data, const RowStats& stats, const TreeConfig& cfg, Rng& rng,
          std::span<const std::size_t> features, std::vector<double>* gain)
      : data_(data), st_(stats), cfg_(cfg), rng_(rng), gain_(gain) {
    if (features.empty()) {
      features_.resize(data.cols());
      std::iota(features_.begin(), features_.end(), 0);
    } else {
      features_.assign(features.begin(), features.end());
    }
  }

  Tree build(std::span<const std::size_t> rows) {
    idx_.assign(rows.begin(), rows.end());
    switch (cfg_.growth) {
      case Growth::DepthWise: grow_depthwise(); break;
      case Growth::LeafWise: grow_leafwise(); break;
      case Growth::Oblivious: grow_oblivious(); break;
    }
    return std::move(tree_);
  }

 private:
  Stats total(std::size_t begin, std::size_t end) const {
    Stats s;
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = idx_[i];
      s.g += st_.g[r];
      s.h += st_.h.empty() ? 0.0 : st_.h[r];
      s.w += st_.w[r];
      ++s.n;
    }
    return s;
  }

  double score(const Stats& s) const {
    switch (cfg_.criterion) {
      case Criterion::Gini:
        return s.w > 0 ? (s.g * s.g + (s.w - s.g) * (s.w - s.g)) / s.w : 0.0;
      case Criterion::Gradient:
        return s.w > 0 ? s.g * s.g / s.w : 0.0;
      case Criterion::Newton: {
        const double den = s.h + cfg_.lambda;
        return den > 0 ? s.g * s.g / den : 0.0;
      }
    }
    return 0.0;
  }

  double leaf_value(const Stats& s) const {
    switch (cfg_.criterion) {
      case Criterion::Gini:
        return s.w > 0 ? s.g / s.w : 0.0;
      case Criterion::Gradient:
        return s.h > 0 ? -s.g / s.h : 0.0;
      case Criterion::Newton: {
        const double den = s.h + cfg_.lambda;
        return den > 0 ? -s.g / den : 0.0;
      }
    }
    return 0.0;
  }

  double split_gain(const Stats& l, const Stats& r, const Stats& p) const {
    const double raw = score(l) + score(r) - score(p);
    return cfg_.criterion == Criterion::Newton ? 0.5 * raw - cfg_.gamma : raw;
  }

  bool child_ok(const Stats& s) const {
    if (s.n == 0 || s.n < cfg_.min_samples_leaf) return false;
    return cfg_.criterion != Criterion::Newton || s.h >= cfg_.min_child_weight;
  }

  bool acceptable(const Split& s, const Stats& parent) const {
    if (!s.valid) return false;
    if (cfg_.criterion == Criterion::Gini) {
      // Zero-gain splits of impure nodes are allowed, as in CART.
      const double eps = 1e-12 * std::max(1.0, parent.w);
      return parent.g > eps && parent.g < parent.w - eps && s.gain >= -eps;
    }
    return s.gain > 1e-12;
  }

  std::vector<std::size_t> candidate_features() {
    if (cfg_.max_features == 0 || cfg_.max_features >= features_.size()) return features_;
    auto pool = features_;
    for (std::size_t i = 0; i < cfg_.max_features; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(cfg_.max_features);
    return pool;
  }

  void histogram(std::size_t f, std::size_t begin, std::size_t end, std::vector<Stats>& hist) const {
    const auto nb = data_.thresholds(f).size() + 1;
    hist.assign(nb, Stats{});
    const auto* col = data_.column(f);
    const bool has_h = !st_.h.empty();
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = idx_[i];
      auto& s = hist[col[r]];
      s.g += st_.g[r];
      if (has_h) s.h += st_.h[r];
      s.w += st_.w[r];
      ++s.n;
    }
  }

  Split best_split(std::size_t begin, std::size_t end, const Stats& parent) {
    Split best;
    if (parent.n < cfg_.min_samples_split || parent.n < 2 * cfg_.min_samples_leaf) return best;
    std::vector<Stats> hist;
    for (auto f : candidate_features()) {
      const auto nt = data_.thresholds(f).size();
      if (nt == 0) continue;
      histogram(f, begin, end, hist);
      if (cfg_.random_thresholds) {
        std::size_t lo = 0;
        while (lo < hist.size() && hist[lo].n == 0) ++lo;
        std::size_t hi = hist.size() - 1;
        while (hi > 0 && hist[hi].n == 0) --hi;
        if (lo >= hi) continue;
        const auto t = lo + static_cast<std::size_t>(rng_.below(hi - lo));
        Stats left;
        for (std::size_t b = 0; b <= t; ++b) left.add(hist[b]);
        const Stats right = parent.minus(left);
        if (!child_ok(left) || !child_ok(right)) continue;
        const double g = split_gain(left, right, parent);
        if (g > best.gain) best = {true, g, static_cast<int>(f), static_cast<int>(t)};
        continue;
      }
      Stats left;
      for (std::size_t t = 0; t < nt; ++t) {
        left.add(hist[t]);
        if (hist[t].n == 0 && t > 0) continue;
        const Stats right = parent.minus(left);
        if (right.n == 0) break;
        if (!child_ok(left) || !child_ok(right)) continue;
        const double g = split_gain(left, right, parent);
        if (g > best.gain) best = {true, g, static_cast<int>(f), static_cast<int>(t)};
      }
    }
    return best;
  }

  // Reorders idx_[begin, end) so rows going left come first; returns the boundary.
  std::size_t partition(std::size_t begin, std::size_t end, int feature, int bin) {
    const auto* col = data_.column(static_cast<std::size_t>(feature));
    const auto mid = std::stable_partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           idx_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::size_t r) { return col[r] <= bin; });
    return static_cast<std::size_t>(mid - idx_.begin());
  }

  int add_leaf(const Stats& s) {
    tree_.nodes.push_back({-1, 0.0, -1, -1, leaf_value(s), s.w});
    return static_cast<int>(tree_.nodes.size() - 1);
  }

  void make_internal(int node, const Split& s, int left, int right) {
    auto& n = tree_.nodes[node];
    n.feature = s.feature;
    n.threshold = data_.thresholds(static_cast<std::size_t>(s.feature))[s.bin];
    n.left = left;
    n.right = right;
    n.value = 0;
    if (gain_) (*gain_)[s.feature] += std::max(0.0, s.gain);
  }

  bool depth_allows(int depth) const { return cfg_.max_depth < 0 || depth < cfg_.max_depth; }

  void grow_depthwise() {
    struct Item {
      int node;
      std::size_t begin, end;
      int depth;
      Stats stats;
    };
    Stats root = total(0, idx_.size());
    std::vector<Item> stack{{add_leaf(root), 0, idx_.size(), 0, root}};
    std::size_t leaves = 1;
    while (!stack.empty()) {
      auto it = stack.back();
      stack.pop_back();
      if (!depth_allows(it.depth)) continue;
      if (cfg_.max_leaves > 0 && leaves >= cfg_.max_leaves) continue;
      const auto split = best_split(it.begin, it.end, it.stats);
      if (!acceptable(split, it.stats)) continue;
      const auto mid = partition(it.begin, it.end, split.feature, split.bin);
      const Stats ls = total(it.begin, mid);
      const Stats rs = it.stats.minus(ls);
      const int l = add_leaf(ls);
      const int r = add_leaf(rs);
      make_internal(it.node, split, l, r);
      ++leaves;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({r, mid, it.end, it.depth + 1, rs});
      stack.push_back({l, it.begin, mid, it.depth + 1, ls});
    }
  }

  void grow_leafwise() {
    struct Leaf {
      int node;
      std::size_t begin, end;
      int depth;
      Stats stats;
      Split split;
    };
    const std::size_t limit = cfg_.max_leaves == 0 ? std::numeric_limits<std::size_t>::max() : cfg_.max_leaves;
    std::vector<Leaf> open;
    auto push = [&](int node, std::size_t b, std::size_t e, int depth, const Stats& s) {
      Split sp;
      if (depth_allows(depth)) sp = best_split(b, e, s);
      if (acceptable(sp, s)) open.push_back({node, b, e, depth, s, sp});
    };
    const Stats root = total(0, idx_.size());
    push(add_leaf(root), 0, idx_.size(), 0, root);
    std::size_t leaves = 1;
    while (!open.empty() && leaves < limit) {
      std::size_t pick = 0;
      for (std::size_t i = 1; i < open.size(); ++i)
        if (open[i].split.gain > open[pick].split.gain) pick = i;
      const Leaf lf = open[pick];
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      const auto mid = partition(lf.begin, lf.end, lf.split.feature, lf.split.bin);
      const Stats ls = total(lf.begin, mid);
      const Stats rs = lf.stats.minus(ls);
      const int l = add_leaf(ls);
      const int r = add_leaf(rs);
      make_internal(lf.node, lf.split, l, r);
      ++leaves;
      push(l, lf.begin, mid, lf.depth + 1, ls);
      push(r, mid, lf.end, lf.depth + 1, rs);
    }
  }

  void grow_oblivious() {
    struct Leaf {
      int node;
      std::size_t begin, end;
      Stats stats;
    };
    const Stats root = total(0, idx_.size());
    std::vector<Leaf> level{{add_leaf(root), 0, idx_.size(), root}};
    const int max_depth = cfg_.max_depth < 0 ? 6 : cfg_.max_depth;
    std::vector<std::vector<Stats>> hists(1);
    for (int depth = 0; depth < max_depth; ++depth) {
      Split best;
      for (auto f : candidate_features()) {
        const auto nt = data_.thresholds(f).size();
        if (nt == 0) continue;
        hists.resize(level.size());
        for (std::size_t k = 0; k < level.size(); ++k) histogram(f, level[k].begin, level[k].end, hists[k]);
        std::vector<Stats> left(level.size());
        for (std::size_t t = 0; t < nt; ++t) {
          double g = 0;
          bool any = false;
          for (std::size_t k = 0; k < level.size(); ++k) {
            left[k].add(hists[k][t]);
            const Stats right = level[k].stats.minus(left[k]);
            if (left[k].n == 0 || right.n == 0) continue;
            any = true;
            g += split_gain(left[k], right, level[k].stats) + (cfg_.criterion == Criterion::Newton ? cfg_.gamma : 0.0);
          }
          if (cfg_.criterion == Criterion::Newton) g -= cfg_.gamma;
          if (any && g > best.gain) best = {true, g, static_cast<int>(f), static_cast<int>(t)};
        }
      }
      if (!best.valid || best.gain <= 1e-12) break;
      std::vector<Leaf> next;
      next.reserve(level.size() * 2);
      for (const auto& lf : level) {
        const auto mid = partition(lf.begin, lf.end, best.feature, best.bin);
        const Stats ls = total(lf.begin, mid);
        const Stats rs = lf.stats.minus(ls);
        const int l = add_leaf(ls);
        const int r = add_leaf(rs);
        Split s = best;
        s.gain = 0;
        make_internal(lf.node, s, l, r);
        next.push_back({l, lf.begin, mid, ls});
        next.push_back({r, mid, lf.end, rs});
      }
      if (gain_) (*gain_)[best.feature] += best.gain;
      level = std::move(next);
    }
  }

  const BinnedData& data_;
  const RowStats& st_;
  const TreeConfig& cfg_;
  Rng& rng_;
  std::vector<double>* gain_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> idx_;
  Tree tree_;
};

}  // namespace

Tree build_tree(const BinnedData& data, std::span<const std::size_t> rows, const RowStats& stats,
                const TreeConfig& config, Rng& rng, std::span<const std::size_t> features, std::vector<double>* gain) {
  if (rows.empty()) throw ValidationError("cannot grow a tree on zero rows");
  if (gain && gain->size() != data.cols()) gain->assign(data.cols(), 0.0);
  Builder b(data, stats, config, rng, features, gain);
  return b.build(rows);
}

}  // namespace ckd
