#include "ckd/selection/mwu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "ckd/common/error.hpp"

namespace ckd {

namespace {

struct Pooled {
  // Doubled midranks, so every value is an integer.
  std::vector<long> rank2;
  double tie_term = 0;  // sum of t^3 - t over tie groups
};

Pooled pool(std::span<const double> a, std::span<const double> b) {
  std::vector<double> v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  Pooled p;
  p.rank2.assign(v.size(), 0);
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    // Ranks i+1..j average to (i+1+j)/2.
    const long r2 = static_cast<long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) p.rank2[idx[k]] = r2;
    const double t = static_cast<double>(j - i);
    p.tie_term += t * t * t - t;
    i = j;
  }
  return p;
}

void check_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney test needs both classes");
}

double rank_sum2(const Pooled& p, std::size_t n1) {
  long s = 0;
  for (std::size_t i = 0; i < n1; ++i) s += p.rank2[i];
  return static_cast<double>(s);
}

MwuResult finish(double u, double n1, double n2) {
  MwuResult r;
  r.u = u;
  r.effect = 2.0 * u / (n1 * n2) - 1.0;
  return r;
}

}  // namespace

MwuResult mann_whitney_exact(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const auto p = pool(a, b);
  const std::size_t n1 = a.size();
  const std::size_t n = p.rank2.size();
  const long max_sum = std::accumulate(p.rank2.begin(), p.rank2.end(), 0L);
  // ways[k][s]: subsets of size k with doubled rank sum s.
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(p.rank2[i]);
    for (std::size_t k = std::min(i + 1, n1); k >= 1; --k)
      for (std::size_t s = max_sum; s >= r; --s) {
        ways[k][s] += ways[k - 1][s - r];
        if (s == r) break;
      }
  }
  const double obs = rank_sum2(p, n1);
  // Doubled expected rank sum n1 (n + 1).
  const double centre = static_cast<double>(n1 * (n + 1));
  const double dev = std::abs(obs - centre);
  double hit = 0;
  double total = 0;
  for (std::size_t s = 0; s <= static_cast<std::size_t>(max_sum); ++s) {
    const double w = ways[n1][s];
    if (w == 0) continue;
    total += w;
    if (std::abs(static_cast<double>(s) - centre) >= dev) hit += w;
  }
  const double n1d = static_cast<double>(n1);
  auto r = finish(obs / 2.0 - n1d * (n1d + 1) / 2.0, n1d, static_cast<double>(b.size()));
  r.p_value = std::min(1.0, hit / total);
  r.exact = true;
  return r;
}

MwuResult mann_whitney_normal(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const auto p = pool(a, b);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  auto r = finish(rank_sum2(p, a.size()) / 2.0 - n1 * (n1 + 1) / 2.0, n1, n2);
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1) - p.tie_term / (n * (n - 1)));
  if (var <= 0) {
    r.p_value = 1;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.u - mu) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), z)));
  return r;
}

MwuResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.size() + b.size() <= kMwuExactLimit) return mann_whitney_exact(a, b);
  return mann_whitney_normal(a, b);
}

FeatureRanking mwu_rank(const EncodedMatrix& data, Scope scope, double alpha) {
  std::size_t pos = 0;
  for (int v : data.labels) pos += v == 1 ? 1 : 0;
  if (pos == 0 || pos == data.labels.size()) throw ValidationError("Mann-Whitney ranking needs both classes");
  std::vector<MwuResult> res;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < data.rows(); ++i) (data.labels[i] == 1 ? a : b).push_back(data.values(i, j));
    res.push_back(mann_whitney(a, b));
  }
  std::vector<std::size_t> order(data.cols());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
    if (res[x].p_value != res[y].p_value) return res[x].p_value < res[y].p_value;
    return std::abs(res[x].effect) > std::abs(res[y].effect);
  });
  FeatureRanking r{SelectionMethod::MWU, scope, {}, {}};
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto j = order[k];
    r.entries.push_back({data.column_names[j], k + 1, res[j].p_value});
    if (res[j].p_value < alpha) r.selected.push_back(data.column_names[j]);
  }
  return r;
}

}  // namespace ckd
