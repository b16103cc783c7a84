#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ckd/cohort/cohort.hpp"

namespace ckd {

// Class-conditional category probabilities per feature.
struct SyntheticSpec {
  std::size_t n_ckd = 0;
  std::size_t n_nonckd = 0;
  // feature -> probabilities over the feature's categories, in declared order
  std::map<std::string, std::vector<double>> p_ckd;
  std::map<std::string, std::vector<double>> p_nonckd;
  std::uint64_t seed = 42;
};

// Reads per-class category counts and turns them into probabilities.
SyntheticSpec load_marginals(const std::filesystem::path& path, const CohortSchema& schema);
SyntheticSpec marginals_spec(const CohortSchema& schema, std::uint64_t seed = 42);

// Exactly n_ckd positive and n_nonckd negative rows in shuffled order. Each
// feature is sampled independently given the class.
Cohort synthesize_cohort(const CohortSchema& schema, const SyntheticSpec& spec);

}  // namespace ckd
