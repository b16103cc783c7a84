#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ckd/cohort/encode.hpp"
#include "ckd/selection/ranking.hpp"

namespace ckd {

struct LassoOptions {
  std::size_t n_lambdas = 20;
  // Smallest penalty on the path as a fraction of the smallest all-zero one.
  double lambda_min_ratio = 1e-3;
  std::size_t cv_folds = 5;
  std::uint64_t seed = 42;
  // Skips the internal CV when set.
  std::optional<double> lambda;
  std::size_t max_outer = 100;
  std::size_t max_inner = 1000;
  double tol = 1e-8;
};

struct LassoFit {
  std::vector<double> coef;
  double intercept = 0;
  double lambda = 0;
};

// Minimizes weighted mean log-loss + lambda * ||coef||_1 with an unpenalized
// intercept. Throws ConvergenceError when the iteration limits are hit.
LassoFit fit_l1_logistic(const Matrix& X, std::span<const int> y, std::span<const double> w, double lambda,
                         const LassoOptions& options = {}, const LassoFit* warm = nullptr);

// Smallest penalty at which every coefficient is zero.
double lambda_max(const Matrix& X, std::span<const int> y, std::span<const double> w);

struct LassoPath {
  std::vector<double> lambdas;
  std::vector<double> cv_scores;
  std::size_t chosen = 0;
};

// Balanced class weights. Selected columns have nonzero coefficients, ranked
// by descending |coefficient| then column order.
FeatureRanking lasso_rank(const EncodedMatrix& data, Scope scope = Scope::S1, const LassoOptions& options = {},
                          LassoPath* path = nullptr);

}  // namespace ckd
