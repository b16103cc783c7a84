#include "ckd/models/mlp.hpp"

#include <cmath>
#include <numeric>

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

MlpModel::MlpModel(std::size_t inputs, std::size_t hidden, bool tanh, std::vector<double> w1, std::vector<double> b1,
                   std::vector<double> w2, double b2)
    : d_(inputs), h_(hidden), tanh_(tanh), w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)), b2_(b2) {
  if (w1_.size() != d_ * h_ || b1_.size() != h_ || w2_.size() != h_) throw ValidationError("mlp: malformed weights");
}

double MlpModel::predict_proba(std::span<const double> x) const {
  double z = b2_;
  for (std::size_t k = 0; k < h_; ++k) {
    double a = b1_[k];
    const double* wk = w1_.data() + k * d_;
    for (std::size_t j = 0; j < d_; ++j) a += wk[j] * x[j];
    a = tanh_ ? std::tanh(a) : (a > 0 ? a : 0.0);
    z += w2_[k] * a;
  }
  return 1.0 / (1.0 + std::exp(-z));
}

nlohmann::json MlpModel::to_json() const {
  return {{"type", "mlp"}, {"inputs", d_}, {"hidden", h_}, {"activation", tanh_ ? "tanh" : "relu"},
          {"w1", w1_},     {"b1", b1_},    {"w2", w2_},    {"b2", b2_}};
}

std::unique_ptr<MlpModel> MlpModel::from_json(const nlohmann::json& j) {
  return std::make_unique<MlpModel>(j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
                                    j.at("activation").get<std::string>() == "tanh",
                                    j.at("w1").get<std::vector<double>>(), j.at("b1").get<std::vector<double>>(),
                                    j.at("w2").get<std::vector<double>>(), j.at("b2").get<double>());
}

namespace {

struct Adam {
  std::vector<double> m;
  std::vector<double> v;
  double b1t = 1;
  double b2t = 1;

  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    constexpr double kB1 = 0.9;
    constexpr double kB2 = 0.999;
    constexpr double kEps = 1e-8;
    b1t *= kB1;
    b2t *= kB2;
    const double a = lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = kB1 * m[i] + (1 - kB1) * grad[i];
      v[i] = kB2 * v[i] + (1 - kB2) * grad[i] * grad[i];
      params[i] -= a * m[i] / (std::sqrt(v[i]) + kEps);
    }
  }
};

}  // namespace

std::unique_ptr<MlpModel> fit_mlp(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                  const MlpOptions& o, std::uint64_t seed) {
  const auto n = X.rows();
  const auto d = X.cols();
  const auto H = o.hidden;
  if (n == 0 || y.size() != n || w.size() != n) throw ValidationError("mlp: dimension mismatch");
  if (H == 0 || o.batch_size == 0) throw ValidationError("mlp: hidden units and batch size must be positive");
  Rng rng(seed);
  // Packed parameters: w1 (H*d), b1 (H), w2 (H), b2 (1).
  const std::size_t n_params = H * d + 2 * H + 1;
  std::vector<double> theta(n_params, 0.0);
  const double bound1 = std::sqrt(6.0 / static_cast<double>(d + H));
  const double bound2 = std::sqrt(2.0) * std::sqrt(6.0 / static_cast<double>(H + 1));
  for (std::size_t i = 0; i < H * d; ++i) theta[i] = rng.uniform(-bound1, bound1);
  for (std::size_t k = 0; k < H; ++k) theta[H * d + k] = rng.uniform(-bound1, bound1);
  for (std::size_t k = 0; k < H; ++k) theta[H * d + H + k] = rng.uniform(-bound2, bound2);
  theta[n_params - 1] = rng.uniform(-bound2, bound2);

  Adam adam(n_params);
  std::vector<double> grad(n_params);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> act(H);
  std::vector<double> pre(H);
  const std::size_t bs = std::min(o.batch_size, n);
  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      const double m = static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double* gw1 = grad.data();
      double* gb1 = gw1 + H * d;
      double* gw2 = gb1 + H;
      double& gb2 = grad[n_params - 1];
      const double* w1 = theta.data();
      const double* b1 = w1 + H * d;
      const double* w2 = b1 + H;
      const double b2 = theta[n_params - 1];
      for (std::size_t s = start; s < end; ++s) {
        const auto r = order[s];
        const auto x = X.row(r);
        double z = b2;
        for (std::size_t k = 0; k < H; ++k) {
          double a = b1[k];
          const double* wk = w1 + k * d;
          for (std::size_t j = 0; j < d; ++j) a += wk[j] * x[j];
          pre[k] = a;
          act[k] = o.tanh ? std::tanh(a) : (a > 0 ? a : 0.0);
          z += w2[k] * act[k];
        }
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double dz = w[r] * (p - y[r]) / m;
        gb2 += dz;
        for (std::size_t k = 0; k < H; ++k) {
          gw2[k] += dz * act[k];
          const double da = dz * w2[k] * (o.tanh ? 1.0 - act[k] * act[k] : (pre[k] > 0 ? 1.0 : 0.0));
          if (da == 0.0) continue;
          gb1[k] += da;
          double* gk = gw1 + k * d;
          for (std::size_t j = 0; j < d; ++j) gk[j] += da * x[j];
        }
      }
      const double reg = o.alpha / m;
      for (std::size_t i = 0; i < H * d; ++i) gw1[i] += reg * theta[i];
      for (std::size_t k = 0; k < H; ++k) gw2[k] += reg * theta[H * d + H + k];
      adam.step(theta, grad, o.learning_rate);
    }
  }
  std::vector<double> w1(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(H * d));
  std::vector<double> b1(theta.begin() + static_cast<std::ptrdiff_t>(H * d),
                         theta.begin() + static_cast<std::ptrdiff_t>(H * d + H));
  std::vector<double> w2(theta.begin() + static_cast<std::ptrdiff_t>(H * d + H),
                         theta.begin() + static_cast<std::ptrdiff_t>(H * d + 2 * H));
  return std::make_unique<MlpModel>(d, H, o.tanh, std::move(w1), std::move(b1), std::move(w2), theta[n_params - 1]);
}

}  // namespace ckd
