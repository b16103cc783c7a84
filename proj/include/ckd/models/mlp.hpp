#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ckd/models/classifier.hpp"

namespace ckd {

struct MlpOptions {
  std::size_t hidden = 16;
  double learning_rate = 1e-2;
  double alpha = 1e-4;  // L2 penalty
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  bool tanh = false;
};

class MlpModel final : public Classifier {
 public:
  MlpModel(std::size_t inputs, std::size_t hidden, bool tanh, std::vector<double> w1, std::vector<double> b1,
           std::vector<double> w2, double b2);

  [[nodiscard]] double predict_proba(std::span<const double> x) const override;
  [[nodiscard]] std::size_t n_features() const override { return d_; }
  [[nodiscard]] nlohmann::json to_json() const override;
  static std::unique_ptr<MlpModel> from_json(const nlohmann::json& j);

 private:
  std::size_t d_;
  std::size_t h_;
  bool tanh_;
  std::vector<double> w1_;  // h x d, row-major
  std::vector<double> b1_;
  std::vector<double> w2_;
  double b2_;
};

std::unique_ptr<MlpModel> fit_mlp(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                  const MlpOptions& options, std::uint64_t seed);

}  // namespace ckd
