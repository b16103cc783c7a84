#include "ckd/selection/rfecv.hpp"

#include <algorithm>
#include <numeric>

#include "ckd/common/error.hpp"
#include "ckd/eval/cross_validate.hpp"
#include "ckd/eval/folds.hpp"
#include "ckd/eval/metrics.hpp"

namespace ckd {

namespace {

void require_importance(const ModelSpec& spec) {
  if (!classifier_kind(spec.kind).supports_importance)
    throw ValidationError("RFECV estimator " + std::string(spec.kind_name()) + " exposes no feature importances");
}

std::vector<double> fit_importance(const ModelSpec& spec, const Matrix& X, std::span<const int> y) {
  const auto model = fit_classifier(spec, X, y);
  auto imp = model->importances();
  if (imp.size() != X.cols()) throw ValidationError("estimator returned no importances");
  return imp;
}

// Index of the least important column; later columns lose ties.
std::size_t weakest(const std::vector<double>& imp) {
  std::size_t k = 0;
  for (std::size_t j = 1; j < imp.size(); ++j)
    if (imp[j] <= imp[k]) k = j;
  return k;
}

}  // namespace

std::vector<std::size_t> rfe_order(const ModelSpec& spec, const Matrix& X, std::span<const int> y,
                                   std::vector<double>* final_importance, std::size_t stop_at) {
  require_importance(spec);
  std::vector<std::size_t> alive(X.cols());
  std::iota(alive.begin(), alive.end(), 0);
  std::vector<std::size_t> removed;
  while (alive.size() > stop_at) {
    const auto imp = fit_importance(spec, X.select_cols(alive), y);
    const auto k = weakest(imp);
    removed.push_back(alive[k]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(k));
  }
  auto imp = fit_importance(spec, X.select_cols(alive), y);
  std::vector<std::size_t> order(alive.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return imp[a] > imp[b]; });
  std::vector<std::size_t> out;
  std::vector<double> kept_imp;
  for (auto o : order) {
    out.push_back(alive[o]);
    kept_imp.push_back(imp[o]);
  }
  for (auto it = removed.rbegin(); it != removed.rend(); ++it) out.push_back(*it);
  if (final_importance) *final_importance = kept_imp;
  return out;
}

FeatureRanking rfecv_rank(const EncodedMatrix& data, const ModelSpec& spec, SelectionMethod method, Scope scope,
                          const RfecvOptions& options, RfecvTrace* trace) {
  require_importance(spec);
  const std::size_t d = data.cols();
  if (d == 0) throw ValidationError("RFECV needs at least one column");
  const auto& y = data.labels;
  const auto folds = stratified_folds(y, options.cv_folds, options.seed);
  std::vector<double> scores(d, 0.0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fold = folds[f];
    const Matrix Xtr = data.values.select_rows(fold.train);
    const Matrix Xte = data.values.select_rows(fold.test);
    std::vector<int> ytr;
    std::vector<int> yte;
    for (auto i : fold.train) ytr.push_back(y[i]);
    for (auto i : fold.test) yte.push_back(y[i]);
    std::vector<std::size_t> alive(d);
    std::iota(alive.begin(), alive.end(), 0);
    while (!alive.empty()) {
      const auto model = fit_classifier(spec, Xtr.select_cols(alive), ytr);
      const auto probs = model->predict_proba(Xte.select_cols(alive));
      scores[alive.size() - 1] +=
          balanced_accuracy(confusion(yte, threshold_predictions(probs, 0.5))) / static_cast<double>(folds.size());
      if (alive.size() == 1) break;
      const auto k = weakest(model->importances());
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  // First maximum over increasing sizes is the smallest best subset.
  const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin()) + 1;
  if (trace) *trace = {scores, best};

  std::vector<double> imp;
  const auto order = rfe_order(spec, data.values, y, &imp, best);
  FeatureRanking r{method, scope, {}, {}};
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& name = data.column_names[order[k]];
    r.entries.push_back({name, k + 1, k < best ? imp[k] : 0.0});
    if (k < best) r.selected.push_back(name);
  }
  return r;
}

FeatureRanking rfecv_rank(const EncodedMatrix& data, SelectionMethod method, Scope scope, const RfecvOptions& options,
                          RfecvTrace* trace) {
  const auto kind = rfecv_estimator(method);
  if (!kind) throw ValidationError(std::string(method_name(method)) + " is not an RFECV method");
  return rfecv_rank(data, make_classifier(*kind, {}, options.seed), method, scope, options, trace);
}

}  // namespace ckd
