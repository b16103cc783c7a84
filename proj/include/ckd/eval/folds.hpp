#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ckd {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Each class is shuffled and dealt round-robin over the folds, the deal
// continuing from one class to the next, so per-fold class counts are the
// floor or ceiling of the proportional share. k equal to the sample count
// gives leave-one-out.
std::vector<Fold> stratified_folds(std::span<const int> y, std::size_t k = 10, std::uint64_t seed = 42);

}  // namespace ckd
