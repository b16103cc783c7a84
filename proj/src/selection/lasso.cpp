#include "ckd/selection/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckd/common/error.hpp"
#include "ckd/eval/folds.hpp"
#include "ckd/eval/metrics.hpp"
#include "ckd/models/factory.hpp"

namespace ckd {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

}  // namespace

double lambda_max(const Matrix& X, std::span<const int> y, std::span<const double> w) {
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  double ybar = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ybar += w[i] * y[i];
  ybar /= sw;
  double best = 0;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double g = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) g += w[i] * (ybar - y[i]) * X(i, j);
    best = std::max(best, std::abs(g / sw));
  }
  return best;
}

LassoFit fit_l1_logistic(const Matrix& X, std::span<const int> y, std::span<const double> w, double lambda,
                         const LassoOptions& options, const LassoFit* warm) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (n == 0 || y.size() != n || w.size() != n) throw ValidationError("lasso input dimension mismatch");
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  LassoFit fit;
  fit.lambda = lambda;
  if (warm) {
    fit.coef = warm->coef;
    fit.intercept = warm->intercept;
  } else {
    fit.coef.assign(d, 0.0);
    double ybar = 0;
    for (std::size_t i = 0; i < n; ++i) ybar += w[i] * y[i];
    ybar = std::clamp(ybar / sw, 1e-6, 1 - 1e-6);
    fit.intercept = std::log(ybar / (1 - ybar));
  }
  std::vector<double> eta(n);
  std::vector<double> v(n);
  std::vector<double> resid(n);
  for (std::size_t outer = 0; outer < options.max_outer; ++outer) {
    for (std::size_t i = 0; i < n; ++i) {
      double e = fit.intercept;
      for (std::size_t j = 0; j < d; ++j) e += X(i, j) * fit.coef[j];
      eta[i] = e;
      const double p = std::clamp(sigmoid(e), 1e-5, 1 - 1e-5);
      v[i] = w[i] * p * (1 - p) / sw;
      // Working residual z - eta of the quadratic approximation.
      resid[i] = (y[i] - p) / (p * (1 - p));
    }
    const auto old_coef = fit.coef;
    const double old_b = fit.intercept;
    bool inner_done = false;
    for (std::size_t inner = 0; inner < options.max_inner; ++inner) {
      double max_step = 0;
      double vs = 0;
      double vr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        vs += v[i];
        vr += v[i] * resid[i];
      }
      const double db = vr / vs;
      fit.intercept += db;
      for (std::size_t i = 0; i < n; ++i) resid[i] -= db;
      max_step = std::max(max_step, std::abs(db));
      for (std::size_t j = 0; j < d; ++j) {
        double num = 0;
        double den = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = X(i, j);
          if (x == 0) continue;
          num += v[i] * x * (resid[i] + x * fit.coef[j]);
          den += v[i] * x * x;
        }
        if (den <= 0) continue;
        const double nb = soft_threshold(num, lambda) / den;
        const double step = nb - fit.coef[j];
        if (step != 0) {
          for (std::size_t i = 0; i < n; ++i) resid[i] -= X(i, j) * step;
          fit.coef[j] = nb;
          max_step = std::max(max_step, std::abs(step));
        }
      }
      if (max_step < options.tol) {
        inner_done = true;
        break;
      }
    }
    if (!inner_done) throw ConvergenceError("lasso coordinate descent did not converge at lambda " + std::to_string(lambda));
    double change = std::abs(fit.intercept - old_b);
    for (std::size_t j = 0; j < d; ++j) change = std::max(change, std::abs(fit.coef[j] - old_coef[j]));
    if (change < 1e-7) return fit;
  }
  throw ConvergenceError("lasso IRLS did not converge at lambda " + std::to_string(lambda));
}

FeatureRanking lasso_rank(const EncodedMatrix& data, Scope scope, const LassoOptions& options, LassoPath* path) {
  const auto& y = data.labels;
  std::size_t pos = 0;
  for (int v : y) pos += v == 1 ? 1 : 0;
  if (pos == 0 || pos == y.size()) throw ValidationError("lasso ranking needs both classes");
  const auto w = class_weights(y, ClassWeighting::Balanced);

  double chosen = 0;
  if (options.lambda) {
    chosen = *options.lambda;
  } else {
    const double lmax = lambda_max(data.values, y, w);
    LassoPath p;
    for (std::size_t k = 0; k < options.n_lambdas; ++k) {
      const double t = options.n_lambdas == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(options.n_lambdas - 1);
      p.lambdas.push_back(lmax * std::pow(options.lambda_min_ratio, t));
    }
    p.cv_scores.assign(p.lambdas.size(), 0.0);
    const auto folds = stratified_folds(y, options.cv_folds, options.seed);
    for (const auto& f : folds) {
      const Matrix Xtr = data.values.select_rows(f.train);
      std::vector<int> ytr;
      for (auto i : f.train) ytr.push_back(y[i]);
      const auto wtr = class_weights(ytr, ClassWeighting::Balanced);
      std::optional<LassoFit> prev;
      for (std::size_t k = 0; k < p.lambdas.size(); ++k) {
        const auto fit = fit_l1_logistic(Xtr, ytr, wtr, p.lambdas[k], options, prev ? &*prev : nullptr);
        std::vector<int> yte;
        std::vector<int> pred;
        for (auto i : f.test) {
          double e = fit.intercept;
          for (std::size_t j = 0; j < data.cols(); ++j) e += data.values(i, j) * fit.coef[j];
          yte.push_back(y[i]);
          pred.push_back(sigmoid(e) >= 0.5 ? 1 : 0);
        }
        p.cv_scores[k] += balanced_accuracy(confusion(yte, pred)) / static_cast<double>(folds.size());
        prev = fit;
      }
    }
    // Path runs from large to small penalties, so the first maximum is the
    // sparsest.
    p.chosen = static_cast<std::size_t>(std::max_element(p.cv_scores.begin(), p.cv_scores.end()) - p.cv_scores.begin());
    chosen = p.lambdas[p.chosen];
    if (path) *path = p;
  }

  const auto fit = fit_l1_logistic(data.values, y, w, chosen, options);
  std::vector<std::size_t> nz;
  for (std::size_t j = 0; j < fit.coef.size(); ++j)
    if (fit.coef[j] != 0) nz.push_back(j);
  std::stable_sort(nz.begin(), nz.end(),
                   [&](auto a, auto b) { return std::abs(fit.coef[a]) > std::abs(fit.coef[b]); });
  FeatureRanking r{SelectionMethod::LASSO, scope, {}, {}};
  for (std::size_t k = 0; k < nz.size(); ++k) {
    r.entries.push_back({data.column_names[nz[k]], k + 1, fit.coef[nz[k]]});
    r.selected.push_back(data.column_names[nz[k]]);
  }
  return r;
}

}  // namespace ckd
