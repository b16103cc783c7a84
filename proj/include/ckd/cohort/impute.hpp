#pragma once

#include <cstdint>

#include "ckd/cohort/raw_table.hpp"

namespace ckd {

struct ImputeOptions {
  int iterations = 10;
  std::uint64_t seed = 42;
  double ridge = 1e-6;
  // Draw each imputation from the conditional model (prediction plus residual
  // noise) rather than taking the conditional mean.
  bool stochastic = true;
};

// Numeric gaps: chained equations. Each incomplete numeric column is regressed
// on every other numeric column, cycling `iterations` times from a mean fill.
// Draws are clamped to the observed range of their column.
// Text gaps: column mode, ties resolved by first appearance.
RawTable impute(const RawTable& raw, const ImputeOptions& options = {});

}  // namespace ckd
