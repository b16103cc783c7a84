#include "ckd/cohort/discretize.hpp"

#include <algorithm>
#include <cmath>

#include "ckd/common/error.hpp"

namespace ckd {

std::string discretize(double value, std::string_view unit, const DiscretizationRule& rule,
                       std::optional<std::string_view> sex) {
  if (unit != rule.source_unit)
    throw ValidationError("unit mismatch: got " + std::string(unit) + ", rule expects " + rule.source_unit);
  if (!std::isfinite(value)) throw ValidationError("value is not finite");
  if (rule.valid_min && value < *rule.valid_min)
    throw ValidationError("value " + std::to_string(value) + " below valid minimum");
  const std::vector<double>* breaks = &rule.breakpoints;
  if (!rule.sex_specific.empty()) {
    if (!sex) throw ValidationError("sex required for sex-specific rule");
    const auto it = rule.sex_specific.find(std::string(*sex));
    if (it == rule.sex_specific.end()) throw ValidationError("no bands for sex " + std::string(*sex));
    breaks = &it->second;
  }
  const auto band = std::upper_bound(breaks->begin(), breaks->end(), value) - breaks->begin();
  return rule.labels.at(static_cast<std::size_t>(band));
}

}  // namespace ckd
