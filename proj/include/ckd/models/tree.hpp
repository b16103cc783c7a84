#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "ckd/common/matrix.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

// Internal nodes send x[feature] < threshold to `left`.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
  double cover = 0;

  [[nodiscard]] bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  [[nodiscard]] double predict(std::span<const double> x) const;
  [[nodiscard]] int depth() const;
  [[nodiscard]] std::vector<int> used_features() const;
  void scale_leaves(double factor);

  [[nodiscard]] nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j);
};

enum class Link { Identity, Logistic };

// output = link(base + scale * sum of tree values)
struct TreeEnsemble {
  std::vector<Tree> trees;
  double base = 0;
  double scale = 1;
  Link link = Link::Identity;

  [[nodiscard]] double raw(std::span<const double> x) const;
  [[nodiscard]] double predict(std::span<const double> x) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static TreeEnsemble from_json(const nlohmann::json& j);
};

// Training matrix pre-binned per column. Split candidates are midpoints
// between distinct values, thinned to at most `max_bins` - 1 per column.
class BinnedData {
 public:
  explicit BinnedData(const Matrix& X, std::size_t max_bins = 256);

  [[nodiscard]] std::size_t rows() const { return n_; }
  [[nodiscard]] std::size_t cols() const { return thresholds_.size(); }
  [[nodiscard]] const std::vector<double>& thresholds(std::size_t f) const { return thresholds_[f]; }
  [[nodiscard]] std::uint16_t bin(std::size_t f, std::size_t r) const { return bins_[f * n_ + r]; }
  [[nodiscard]] const std::uint16_t* column(std::size_t f) const { return bins_.data() + f * n_; }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> thresholds_;
  std::vector<std::uint16_t> bins_;
};

enum class Criterion { Gini, Gradient, Newton };
enum class Growth { DepthWise, LeafWise, Oblivious };

struct TreeConfig {
  Criterion criterion = Criterion::Gini;
  Growth growth = Growth::DepthWise;
  int max_depth = -1;           // < 0: unlimited
  std::size_t max_leaves = 0;   // 0: unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  double min_child_weight = 0;  // lower bound on hessian mass per child
  double lambda = 0;
  double gamma = 0;
  std::size_t max_features = 0;  // per-node candidate features, 0: all
  bool random_thresholds = false;
};

// Per-row statistics. Gini: g = w * y. Gradient/Newton: g and h are the
// weighted first and second derivatives of the loss.
struct RowStats {
  std::span<const double> g;
  std::span<const double> h;
  std::span<const double> w;
};

// Grows one tree over `rows` (duplicates not allowed). Leaf values are class
// probabilities for Gini and Newton steps otherwise. When `gain` is given, the
// split gain of every chosen split is added to gain[feature]. `features`
// restricts the columns considered; empty means all.
Tree build_tree(const BinnedData& data, std::span<const std::size_t> rows, const RowStats& stats,
                const TreeConfig& config, Rng& rng, std::span<const std::size_t> features = {},
                std::vector<double>* gain = nullptr);

}  // namespace ckd
