#include "ckd/models/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckd/common/error.hpp"

namespace ckd {

KnnModel::KnnModel(Matrix X, std::vector<int> y, std::vector<double> w, std::size_t k, bool distance_weighted)
    : X_(std::move(X)), y_(std::move(y)), w_(std::move(w)), k_(k), distance_weighted_(distance_weighted) {
  if (X_.rows() == 0) throw ValidationError("knn: no training rows");
  if (y_.size() != X_.rows() || w_.size() != X_.rows()) throw ValidationError("knn: dimension mismatch");
  if (k_ == 0) throw ValidationError("knn: k must be positive");
  k_ = std::min(k_, X_.rows());
}

double KnnModel::predict_proba(std::span<const double> x) const {
  const auto n = X_.rows();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = X_.row(i);
    double s = 0;
    for (std::size_t j = 0; j < r.size(); ++j) s += (r[j] - x[j]) * (r[j] - x[j]);
    dist[i] = {s, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
  double num = 0;
  double den = 0;
  const bool exact = distance_weighted_ && dist[0].first == 0.0;
  for (std::size_t m = 0; m < k_; ++m) {
    const auto [d2, i] = dist[m];
    double vote = w_[i];
    if (distance_weighted_) {
      if (exact) {
        if (d2 != 0.0) continue;
      } else {
        vote /= std::sqrt(d2);
      }
    }
    den += vote;
    if (y_[i] == 1) num += vote;
  }
  return den > 0 ? num / den : 0.5;
}

nlohmann::json KnnModel::to_json() const {
  return {{"type", "knn"},     {"rows", X_.rows()}, {"cols", X_.cols()}, {"x", X_.data()},
          {"y", y_},           {"w", w_},           {"k", k_},           {"distance_weighted", distance_weighted_}};
}

std::unique_ptr<KnnModel> KnnModel::from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("x").get<std::vector<double>>();
  if (data.size() != rows * cols) throw ValidationError("knn: malformed training matrix");
  Matrix X(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) X(r, c) = data[r * cols + c];
  return std::make_unique<KnnModel>(std::move(X), j.at("y").get<std::vector<int>>(),
                                    j.at("w").get<std::vector<double>>(), j.at("k").get<std::size_t>(),
                                    j.at("distance_weighted").get<bool>());
}

}  // namespace ckd
