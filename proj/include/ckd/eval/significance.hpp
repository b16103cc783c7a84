#pragma once

#include <span>
#include <string>

namespace ckd {

struct SignificanceResult {
  double t_statistic = 0;
  double p_value = 1;
  // "***" p<0.001, "**" p<0.01, "*" p<0.05, "" otherwise
  std::string stars;
};

std::string star_code(double p);

// Two-sided one-sample t-test of fold values against a fixed baseline.
SignificanceResult compare_significance(std::span<const double> fold_values, double baseline);

}  // namespace ckd
