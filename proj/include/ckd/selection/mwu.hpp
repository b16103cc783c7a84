#pragma once

#include <span>

#include "ckd/cohort/encode.hpp"
#include "ckd/selection/ranking.hpp"

namespace ckd {

inline constexpr std::size_t kMwuExactLimit = 20;

struct MwuResult {
  // U statistic of the positive sample.
  double u = 0;
  double p_value = 1;
  // Rank-biserial correlation 2U/(n1 n2) - 1.
  double effect = 0;
  bool exact = false;
};

// Two-sided test. Exact permutation distribution of the midrank sum when the
// pooled size is at most kMwuExactLimit, otherwise a normal approximation
// with tie and continuity corrections.
MwuResult mann_whitney(std::span<const double> positive, std::span<const double> negative);
MwuResult mann_whitney_exact(std::span<const double> positive, std::span<const double> negative);
MwuResult mann_whitney_normal(std::span<const double> positive, std::span<const double> negative);

// Ranks every column by ascending p-value, then descending |effect|, then
// column order; selects p < alpha.
FeatureRanking mwu_rank(const EncodedMatrix& data, Scope scope = Scope::S1, double alpha = 0.05);

}  // namespace ckd
