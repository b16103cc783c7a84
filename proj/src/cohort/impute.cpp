#include "ckd/cohort/impute.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

namespace {

void fill_mode(RawColumn& col) {
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t r = 0; r < col.text.size(); ++r) {
    if (!col.text[r]) continue;
    ++counts[*col.text[r]];
    first_seen.emplace(*col.text[r], r);
  }
  const std::string* best = nullptr;
  for (const auto& [value, n] : counts)
    if (!best || n > counts[*best] || (n == counts[*best] && first_seen[value] < first_seen[*best])) best = &value;
  const std::string mode = *best;
  for (auto& cell : col.text)
    if (!cell) cell = mode;
}

}  // namespace

RawTable impute(const RawTable& raw, const ImputeOptions& options) {
  RawTable out = raw;
  const std::size_t n = raw.rows();
  for (const auto& col : raw.columns)
    if (n > 0 && col.missing_count() == n) throw ValidationError("column has no observed values: " + col.name);

  std::vector<std::size_t> numeric;
  for (std::size_t c = 0; c < out.columns.size(); ++c) {
    if (out.columns[c].numeric) {
      numeric.push_back(c);
    } else if (out.columns[c].missing_count() > 0) {
      fill_mode(out.columns[c]);
    }
  }
  if (numeric.empty() || n == 0) return out;

  const auto p = numeric.size();
  Eigen::MatrixXd data(n, p);
  std::vector<std::vector<bool>> missing(p, std::vector<bool>(n, false));
  std::vector<double> lo(p);
  std::vector<double> hi(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& col = out.columns[numeric[j]];
    double sum = 0;
    std::size_t k = 0;
    lo[j] = INFINITY;
    hi[j] = -INFINITY;
    for (std::size_t r = 0; r < n; ++r) {
      if (!col.numbers[r]) {
        missing[j][r] = true;
        continue;
      }
      const double v = *col.numbers[r];
      sum += v;
      ++k;
      lo[j] = std::min(lo[j], v);
      hi[j] = std::max(hi[j], v);
    }
    const double mean = sum / static_cast<double>(k);
    for (std::size_t r = 0; r < n; ++r) data(r, j) = missing[j][r] ? mean : *col.numbers[r];
  }

  std::vector<std::size_t> incomplete;
  for (std::size_t j = 0; j < p; ++j)
    if (std::find(missing[j].begin(), missing[j].end(), true) != missing[j].end()) incomplete.push_back(j);

  Rng rng(options.seed);
  if (p > 1) {
    for (int it = 0; it < options.iterations; ++it) {
      for (auto j : incomplete) {
        std::vector<std::size_t> obs;
        for (std::size_t r = 0; r < n; ++r)
          if (!missing[j][r]) obs.push_back(r);
        // Design: intercept plus every other numeric column.
        Eigen::MatrixXd X(obs.size(), p);
        Eigen::VectorXd y(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) {
          X(i, 0) = 1.0;
          std::size_t col = 1;
          for (std::size_t k = 0; k < p; ++k)
            if (k != j) X(i, col++) = data(obs[i], k);
          y(i) = data(obs[i], j);
        }
        Eigen::MatrixXd gram = X.transpose() * X;
        for (Eigen::Index d = 1; d < gram.rows(); ++d) gram(d, d) += options.ridge * std::max(1.0, gram(d, d));
        const Eigen::VectorXd beta = gram.ldlt().solve(X.transpose() * y);
        const Eigen::VectorXd resid = y - X * beta;
        const double dof = std::max<double>(1.0, static_cast<double>(obs.size()) - static_cast<double>(p));
        const double sigma = std::sqrt(resid.squaredNorm() / dof);
        for (std::size_t r = 0; r < n; ++r) {
          if (!missing[j][r]) continue;
          double pred = beta(0);
          std::size_t col = 1;
          for (std::size_t k = 0; k < p; ++k)
            if (k != j) pred += beta(static_cast<Eigen::Index>(col++)) * data(r, k);
          if (options.stochastic) pred += sigma * rng.normal();
          data(r, j) = std::clamp(pred, lo[j], hi[j]);
        }
      }
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    auto& col = out.columns[numeric[j]];
    for (std::size_t r = 0; r < n; ++r)
      if (missing[j][r]) col.numbers[r] = data(r, j);
  }
  return out;
}

}  // namespace ckd
