#include "ckd/models/linear.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ckd/common/error.hpp"

namespace ckd {

double LogisticModel::decision(std::span<const double> x) const {
  double z = intercept_;
  for (std::size_t j = 0; j < coef_.size(); ++j) z += coef_[j] * x[j];
  return z;
}

double LogisticModel::predict_proba(std::span<const double> x) const { return 1.0 / (1.0 + std::exp(-decision(x))); }

std::vector<double> LogisticModel::importances() const {
  std::vector<double> v;
  for (double c : coef_) v.push_back(std::abs(c));
  return normalize_importances(std::move(v));
}

nlohmann::json LogisticModel::to_json() const {
  return {{"type", "logistic"}, {"coef", coef_}, {"intercept", intercept_}};
}

std::unique_ptr<LogisticModel> LogisticModel::from_json(const nlohmann::json& j) {
  return std::make_unique<LogisticModel>(j.at("coef").get<std::vector<double>>(), j.at("intercept").get<double>());
}

namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

std::unique_ptr<LogisticModel> fit_logistic(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                            double C) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n == 0 || y.size() != n || w.size() != n) throw ValidationError("logistic: dimension mismatch");
  if (!(C > 0)) throw ValidationError("logistic: C must be positive");
  double wsum = 0;
  for (double v : w) wsum += v;
  const double lambda = 1.0 / C;
  // Parameter vector: [intercept, coef...]
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
  Eigen::MatrixXd A(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    for (std::size_t j = 0; j < d; ++j) A(i, j + 1) = X(i, j);
  }
  Eigen::VectorXd yv(n);
  Eigen::VectorXd wv(n);
  for (std::size_t i = 0; i < n; ++i) {
    yv(i) = y[i];
    wv(i) = w[i] / wsum;
  }
  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd z = A * b;
    double f = 0;
    for (std::size_t i = 0; i < n; ++i) f += wv(i) * (log1pexp(z(i)) - yv(i) * z(i));
    return f + 0.5 * lambda * b.tail(d).squaredNorm();
  };
  double f = objective(beta);
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd z = A * beta;
    Eigen::VectorXd p(n);
    Eigen::VectorXd s(n);
    for (std::size_t i = 0; i < n; ++i) {
      p(i) = 1.0 / (1.0 + std::exp(-z(i)));
      s(i) = wv(i) * p(i) * (1.0 - p(i));
    }
    Eigen::VectorXd grad = A.transpose() * (wv.cwiseProduct(p - yv));
    grad.tail(d) += lambda * beta.tail(d);
    Eigen::MatrixXd H = A.transpose() * s.asDiagonal() * A;
    H.diagonal().tail(d).array() += lambda;
    // Tiny ridge on the intercept keeps H invertible when y is constant.
    H(0, 0) += 1e-12;
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    double t = 1.0;
    Eigen::VectorXd next = beta - step;
    double fn = objective(next);
    while (fn > f + 1e-14 * std::abs(f) && t > 1e-10) {
      t *= 0.5;
      next = beta - t * step;
      fn = objective(next);
    }
    const double change = (next - beta).lpNorm<Eigen::Infinity>();
    beta = next;
    f = fn;
    if (change < 1e-10 || grad.lpNorm<Eigen::Infinity>() < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) throw ConvergenceError("logistic regression did not converge in 200 Newton steps");
  std::vector<double> coef(d);
  for (std::size_t j = 0; j < d; ++j) coef[j] = beta(static_cast<Eigen::Index>(j + 1));
  return std::make_unique<LogisticModel>(std::move(coef), beta(0));
}

}  // namespace ckd
