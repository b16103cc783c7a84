#include "ckd/eval/folds.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

std::vector<Fold> stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed) {
  const std::size_t n = y.size();
  if (k < 2) throw ValidationError("stratified_folds: k must be at least 2");
  if (k > n) throw ValidationError("stratified_folds: k exceeds the number of samples");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[y[i]].push_back(i);
  if (k < n)
    for (const auto& [cls, idx] : by_class)
      if (idx.size() < k)
        throw ValidationError("stratified_folds: class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                              " members, fewer than k=" + std::to_string(k));

  Rng rng(seed);
  std::vector<std::size_t> fold_of(n);
  std::size_t deal = 0;
  for (auto& [cls, idx] : by_class) {
    rng.shuffle(std::span<std::size_t>(idx));
    for (auto i : idx) fold_of[i] = deal++ % k;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

}  // namespace ckd
