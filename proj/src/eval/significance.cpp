#include "ckd/eval/significance.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "ckd/common/error.hpp"

namespace ckd {

std::string star_code(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

SignificanceResult compare_significance(std::span<const double> values, double baseline) {
  const auto n = values.size();
  if (n < 2) throw ValidationError("significance test needs at least 2 folds");
  // Shifted by the first value so that constant input has exactly zero spread.
  const double origin = values[0];
  double shift = 0;
  for (double v : values) shift += v - origin;
  const double mean = origin + shift / static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  SignificanceResult r;
  const double diff = mean - baseline;
  if (sd == 0.0) {
    if (diff == 0.0) return r;
    r.t_statistic = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.stars = star_code(0.0);
    return r;
  }
  r.t_statistic = diff / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic)));
  r.stars = star_code(r.p_value);
  return r;
}

}  // namespace ckd
