#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "ckd/cohort/encode.hpp"
#include "ckd/models/factory.hpp"
#include "ckd/selection/ranking.hpp"

namespace ckd {

struct RfecvOptions {
  std::size_t cv_folds = 5;
  std::uint64_t seed = 42;
};

struct RfecvTrace {
  // Mean CV balanced accuracy for subset sizes 1..d (index size-1).
  std::vector<double> scores;
  std::size_t chosen_size = 0;
};

// Columns in elimination order: the first eliminated is last. Ties in
// importance eliminate the later column.
std::vector<std::size_t> rfe_order(const ModelSpec& spec, const Matrix& X, std::span<const int> y,
                                   std::vector<double>* final_importance = nullptr, std::size_t stop_at = 1);

// Step-1 recursive elimination with a stratified CV choosing the subset size
// (ties to the smaller size). Selected columns are ranked by the final
// model's importance; eliminated columns follow in reverse elimination order.
FeatureRanking rfecv_rank(const EncodedMatrix& data, const ModelSpec& spec, SelectionMethod method,
                          Scope scope = Scope::S1, const RfecvOptions& options = {}, RfecvTrace* trace = nullptr);
// Estimator with catalog defaults for an RFECV method.
FeatureRanking rfecv_rank(const EncodedMatrix& data, SelectionMethod method, Scope scope = Scope::S1,
                          const RfecvOptions& options = {}, RfecvTrace* trace = nullptr);

}  // namespace ckd
