#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ckd/models/classifier.hpp"
#include "ckd/models/trained_model.hpp"

namespace ckd {

enum class OutputSpace { Probability, Margin };
enum class ShapMethod { TreeExact, Enumeration, Permutation };
std::string_view shap_method_name(ShapMethod m);

struct Explanation {
  std::vector<std::string> features;
  std::vector<double> contributions;
  // Per-feature standard error of sampled estimates; zeros when exact.
  std::vector<double> std_errors;
  double base_value = 0;
  double output_value = 0;
  OutputSpace output_space = OutputSpace::Probability;
  ShapMethod method = ShapMethod::TreeExact;

  [[nodiscard]] double contribution(std::string_view feature) const;
  // (feature, input value, contribution) ordered by descending |contribution|.
  [[nodiscard]] std::vector<std::tuple<std::string, double, double>> waterfall(std::span<const double> x) const;
  [[nodiscard]] nlohmann::json to_json(std::span<const double> x) const;
};

struct ExplainOptions {
  // Coalitions are enumerated exactly up to this many features.
  std::size_t exact_limit = 10;
  // Permutations per explanation (used in antithetic pairs) above the limit.
  std::size_t permutations = 128;
  std::uint64_t seed = 42;
  // Skip the exact tree algorithm and enumeration, for testing the sampler.
  bool force_sampling = false;
};

// Interventional Shapley values of one tree's output for foreground x against
// a single reference row z.
std::vector<double> tree_shap(const Tree& tree, std::span<const double> x, std::span<const double> z);

// Shapley values of v(S) = sum_k w_k f(x_S, z_k) in probability space.
// Exact for tree ensembles whose output is a bounded sum of leaves; exact
// enumeration for few features; antithetic permutation sampling otherwise.
Explanation explain_local(const Classifier& model, std::span<const double> x, const Background& background,
                          std::span<const std::string> feature_names, const ExplainOptions& options = {});
Explanation explain_local(const TrainedModel& model, std::span<const double> x, const ExplainOptions& options = {});
// Refuses an input encoded under another schema.
Explanation explain_local(const TrainedModel& model, const std::string& schema_hash, std::span<const double> x,
                          const ExplainOptions& options = {});

struct GlobalImportance {
  // Descending mean |contribution|; ties keep column order.
  std::vector<std::pair<std::string, double>> ranking;

  [[nodiscard]] double value(std::string_view feature) const;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string to_delimited() const;
};

GlobalImportance explain_global(const Classifier& model, const Matrix& X, const Background& background,
                                std::span<const std::string> feature_names, const ExplainOptions& options = {});
GlobalImportance explain_global(const TrainedModel& model, const Matrix& X, const ExplainOptions& options = {});

}  // namespace ckd
