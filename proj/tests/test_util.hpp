#pragma once

#include <bit>
#include <cstdlib>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ckd/cohort/encode.hpp"
#include "ckd/common/matrix.hpp"
#include "ckd/common/rng.hpp"

namespace ckd::test {

inline EncodedMatrix make_matrix(std::vector<std::string> names, const std::vector<std::vector<double>>& rows,
                                 std::vector<int> labels, std::string schema_hash = "toy") {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  EncodedMatrix m{std::move(names), Matrix(rows.size(), rows.empty() ? 0 : rows[0].size(), std::move(flat)),
                  std::move(labels), std::move(schema_hash)};
  return m;
}

// label = A OR B with `noise` label flips; C..F are independent noise.
inline EncodedMatrix or_toy(std::size_t n = 200, double noise = 0.05, std::uint64_t seed = 7) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(6);
    for (auto& v : r) v = rng.bernoulli(0.35) ? 1.0 : 0.0;
    int label = (r[0] > 0 || r[1] > 0) ? 1 : 0;
    if (rng.bernoulli(noise)) label = 1 - label;
    rows.push_back(r);
    y.push_back(label);
  }
  return make_matrix({"A", "B", "C", "D", "E", "F"}, rows, y);
}

// Interventional Shapley values by explicit coalition enumeration.
inline std::vector<double> brute_shapley(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, const Matrix& background,
                                         std::span<const double> weights) {
  const std::size_t d = x.size();
  const std::size_t full = std::size_t{1} << d;
  std::vector<double> value(full, 0.0);
  std::vector<double> z(d);
  for (std::size_t s = 0; s < full; ++s) {
    for (std::size_t b = 0; b < background.rows(); ++b) {
      for (std::size_t j = 0; j < d; ++j) z[j] = (s >> j & 1) ? x[j] : background(b, j);
      value[s] += weights[b] * f(z);
    }
  }
  std::vector<double> fact(d + 1, 1.0);
  for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> phi(d, 0.0);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t s = 0; s < full; ++s) {
      if (s >> j & 1) continue;
      const auto k = static_cast<std::size_t>(std::popcount(s));
      phi[j] += fact[k] * fact[d - k - 1] / fact[d] * (value[s | (std::size_t{1} << j)] - value[s]);
    }
  return phi;
}

// Two-sided permutation p-value of U by enumerating every relabelling.
inline double brute_mwu_p(const std::vector<double>& a, const std::vector<double>& b, double* u_obs) {
  std::vector<double> v(a);
  v.insert(v.end(), b.begin(), b.end());
  const std::size_t n = v.size(), n1 = a.size();
  auto u2 = [&](std::uint32_t mask) {
    long s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if ((mask >> i & 1) && !(mask >> j & 1)) s += v[i] > v[j] ? 2 : v[i] == v[j] ? 1 : 0;
    return s;
  };
  const long centre = static_cast<long>(n1 * (n - n1));
  const std::uint32_t obs_mask = (1u << n1) - 1;
  const long obs = u2(obs_mask);
  *u_obs = static_cast<double>(obs) / 2.0;
  const long dev = std::abs(obs - centre);
  double hit = 0, total = 0;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) != n1) continue;
    total += 1;
    if (std::abs(u2(m) - centre) >= dev) hit += 1;
  }
  return hit / total;
}

}  // namespace ckd::test
