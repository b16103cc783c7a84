#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "ckd/models/classifier.hpp"
#include "ckd/models/params.hpp"

namespace ckd {

// Each takes per-row weights `w` (class weighting already applied).
std::unique_ptr<TreeModel> fit_decision_tree(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                             const Params& p, std::uint64_t seed);
std::unique_ptr<TreeModel> fit_random_forest(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                             const Params& p, std::uint64_t seed);
std::unique_ptr<TreeModel> fit_extra_trees(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                           const Params& p, std::uint64_t seed);
std::unique_ptr<TreeModel> fit_adaboost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                        const Params& p, std::uint64_t seed);

std::size_t resolve_max_features(const std::string& rule, std::size_t d);

}  // namespace ckd
