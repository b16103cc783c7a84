#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ckd/cohort/schema.hpp"

namespace ckd {

// Returns the label of the band containing `value`. `unit` must equal the
// rule's source_unit; `sex` is required when the rule is sex specific.
std::string discretize(double value, std::string_view unit, const DiscretizationRule& rule,
                       std::optional<std::string_view> sex = std::nullopt);

}  // namespace ckd
