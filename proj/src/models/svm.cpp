#include "ckd/models/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ckd/common/error.hpp"

namespace ckd {

namespace {

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::exp(-gamma * s);
}

double platt_prob(double f, double A, double B) {
  const double z = f * A + B;
  return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

void fit_sigmoid(const std::vector<double>& dec, std::span<const int> y, double& A, double& B) {
  double prior1 = 0;
  for (int v : y) prior1 += v == 1 ? 1 : 0;
  const double prior0 = static_cast<double>(y.size()) - prior1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] == 1 ? hi : lo;
  A = 0.0;
  B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const double z = dec[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };
  double fval = objective(A, B);
  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12;
    double h22 = 1e-12;
    double h21 = 0;
    double g1 = 0;
    double g2 = 0;
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const double z = dec[i] * A + B;
      double p = 0;
      double q = 0;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      const double d1 = t[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = A + step * dA;
      const double nb = B + step * dB;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        A = na;
        B = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
}

}  // namespace

SvmModel::SvmModel(Matrix support, std::vector<double> dual_coef, double rho, double gamma, double sig_a, double sig_b)
    : sv_(std::move(support)), coef_(std::move(dual_coef)), rho_(rho), gamma_(gamma), a_(sig_a), b_(sig_b) {}

double SvmModel::decision(std::span<const double> x) const {
  double f = -rho_;
  for (std::size_t i = 0; i < sv_.rows(); ++i) f += coef_[i] * rbf(sv_.row(i), x, gamma_);
  return f;
}

double SvmModel::predict_proba(std::span<const double> x) const { return platt_prob(decision(x), a_, b_); }

nlohmann::json SvmModel::to_json() const {
  return {{"type", "svm"}, {"rows", sv_.rows()}, {"cols", sv_.cols()}, {"support", sv_.data()}, {"coef", coef_},
          {"rho", rho_},   {"gamma", gamma_},    {"sigmoid_a", a_},    {"sigmoid_b", b_}};
}

std::unique_ptr<SvmModel> SvmModel::from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("support").get<std::vector<double>>();
  if (data.size() != rows * cols) throw ValidationError("svm: malformed support vectors");
  Matrix sv(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) sv(r, c) = data[r * cols + c];
  return std::make_unique<SvmModel>(std::move(sv), j.at("coef").get<std::vector<double>>(), j.at("rho").get<double>(),
                                    j.at("gamma").get<double>(), j.at("sigmoid_a").get<double>(),
                                    j.at("sigmoid_b").get<double>());
}

std::unique_ptr<SvmModel> fit_svm(const Matrix& X, std::span<const int> y01, std::span<const double> w, double C,
                                  double gamma) {
  const auto n = X.rows();
  if (n == 0 || y01.size() != n || w.size() != n) throw ValidationError("svm: dimension mismatch");
  std::vector<double> y(n);
  std::vector<double> Cb(n);
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y01[i] == 1 ? 1.0 : -1.0;
    (y01[i] == 1 ? has_pos : has_neg) = true;
    Cb[i] = C * w[i];
  }
  if (!has_pos || !has_neg) throw ValidationError("svm needs both classes");
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) K[i * n + j] = K[j * n + i] = rbf(X.row(i), X.row(j), gamma);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> G(n, -1.0);
  auto upper = [&](std::size_t t) { return alpha[t] >= Cb[t]; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && !upper(t)) || (y[t] < 0 && !lower(t)); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && !lower(t)) || (y[t] < 0 && !upper(t)); };
  constexpr double kEps = 1e-3;
  constexpr double kTau = 1e-12;
  const std::size_t max_iter = std::max<std::size_t>(10000000 / std::max<std::size_t>(n, 1), 100 * n);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * G[t] > gmax) {
        gmax = -y[t] * G[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    if (i < 0) break;
    double gmin = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    double best = std::numeric_limits<double>::infinity();
    const auto ii = static_cast<std::size_t>(i);
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * G[t];
      gmin = std::min(gmin, v);
      const double b = gmax - v;
      if (b > 0) {
        double a = K[ii * n + ii] + K[t * n + t] - 2.0 * K[ii * n + t];
        if (a <= 0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (j < 0 || gmax - gmin < kEps) break;
    const auto jj = static_cast<std::size_t>(j);
    const double Ci = Cb[ii];
    const double Cj = Cb[jj];
    const double old_ai = alpha[ii];
    const double old_aj = alpha[jj];
    const double Kii = K[ii * n + ii];
    const double Kjj = K[jj * n + jj];
    const double Kij = K[ii * n + jj];
    double quad = Kii + Kjj - 2.0 * Kij;
    if (quad <= 0) quad = kTau;
    double& ai = alpha[ii];
    double& aj = alpha[jj];
    if (y[ii] != y[jj]) {
      const double delta = (-G[ii] - G[jj]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > Ci - Cj) {
        if (ai > Ci) {
          ai = Ci;
          aj = Ci - diff;
        }
      } else if (aj > Cj) {
        aj = Cj;
        ai = Cj + diff;
      }
    } else {
      const double delta = (G[ii] - G[jj]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > Ci) {
        if (ai > Ci) {
          ai = Ci;
          aj = sum - Ci;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > Cj) {
        if (aj > Cj) {
          aj = Cj;
          ai = sum - Cj;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    for (std::size_t t = 0; t < n; ++t)
      G[t] += y[t] * (y[ii] * K[t * n + ii] * dai + y[jj] * K[t * n + jj] * daj);
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (upper(t)) {
      if (y[t] < 0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (lower(t)) {
      if (y[t] > 0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  std::vector<std::size_t> sv_idx;
  for (std::size_t t = 0; t < n; ++t)
    if (alpha[t] > 0) sv_idx.push_back(t);
  Matrix sv = X.select_rows(sv_idx);
  std::vector<double> coef;
  for (auto t : sv_idx) coef.push_back(alpha[t] * y[t]);
  std::vector<double> dec(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = -rho;
    for (std::size_t k = 0; k < sv_idx.size(); ++k) f += coef[k] * K[i * n + sv_idx[k]];
    dec[i] = f;
  }
  double A = 0;
  double B = 0;
  fit_sigmoid(dec, y01, A, B);
  return std::make_unique<SvmModel>(std::move(sv), std::move(coef), rho, gamma, A, B);
}

}  // namespace ckd
