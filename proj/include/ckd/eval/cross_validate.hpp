#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ckd/common/matrix.hpp"
#include "ckd/eval/folds.hpp"
#include "ckd/eval/summary.hpp"
#include "ckd/models/factory.hpp"

namespace ckd {

struct CvProtocol {
  std::size_t k = 10;
  std::uint64_t seed = 42;
  CiMethod ci = CiMethod::StudentT;
  double threshold = 0.5;
};

struct CvResult {
  MetricSummary summary;
  // Out-of-fold probability for every row.
  std::vector<double> oof_scores;
};

// Fits one model per fold; the fold model's seed is derived from the model spec
// seed and the fold index.
CvResult cross_validate(const ModelSpec& spec, const Matrix& X, std::span<const int> y, const CvProtocol& protocol);
CvResult cross_validate(const ModelSpec& spec, const Matrix& X, std::span<const int> y, std::span<const Fold> folds,
                        const CvProtocol& protocol);

std::vector<int> threshold_predictions(std::span<const double> scores, double threshold);

}  // namespace ckd
