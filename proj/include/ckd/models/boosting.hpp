#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "ckd/models/classifier.hpp"
#include "ckd/models/params.hpp"

namespace ckd {

std::unique_ptr<TreeModel> fit_gradient_boosting(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                                 const Params& p, std::uint64_t seed);
std::unique_ptr<TreeModel> fit_xgboost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                       const Params& p, std::uint64_t seed);
std::unique_ptr<TreeModel> fit_lightgbm(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                        const Params& p, std::uint64_t seed);
std::unique_ptr<TreeModel> fit_catboost(const Matrix& X, std::span<const int> y, std::span<const double> w,
                                        const Params& p, std::uint64_t seed);

}  // namespace ckd
