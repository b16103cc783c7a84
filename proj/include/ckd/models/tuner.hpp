#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ckd/eval/cross_validate.hpp"
#include "ckd/models/factory.hpp"
#include "ckd/models/params.hpp"

namespace ckd {

enum class Sampler { Tpe, Random };

struct SearchBudget {
  std::size_t n_trials = 50;
  Sampler sampler = Sampler::Tpe;
  std::uint64_t seed = 42;
};

struct Trial {
  std::size_t index = 0;
  Params params;
  // Mean cross-validated balanced accuracy.
  double score = 0;
};

struct TuneResult {
  ModelSpec best;
  std::size_t best_trial = 0;
  std::vector<Trial> trials;

  [[nodiscard]] nlohmann::json trial_log() const;
};

// Tree-structured Parzen estimator over the declared domains. Trial 0
// evaluates the declared defaults; the next few are uniform draws, after which
// each trial maximizes l(x)/g(x) over sampled candidates. Parameters outside
// `space` keep their catalog defaults. The earliest trial wins ties.
TuneResult tune(std::string_view kind, const Matrix& X, std::span<const int> y, const SearchBudget& budget,
                const CvProtocol& cv, const SearchSpace& space, std::uint64_t model_seed = 42,
                ClassWeighting weighting = ClassWeighting::Balanced);
TuneResult tune(std::string_view kind, const Matrix& X, std::span<const int> y, const SearchBudget& budget,
                const CvProtocol& cv = {}, std::uint64_t model_seed = 42,
                ClassWeighting weighting = ClassWeighting::Balanced);

}  // namespace ckd
