#include "ckd/eval/cross_validate.hpp"

#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

namespace ckd {

std::vector<int> threshold_predictions(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
  return out;
}

CvResult cross_validate(const ModelSpec& spec, const Matrix& X, std::span<const int> y, const CvProtocol& protocol) {
  const auto folds = stratified_folds(y, protocol.k, protocol.seed);
  return cross_validate(spec, X, y, folds, protocol);
}

CvResult cross_validate(const ModelSpec& spec, const Matrix& X, std::span<const int> y, std::span<const Fold> folds,
                        const CvProtocol& protocol) {
  if (X.rows() != y.size()) throw ValidationError("training data dimension mismatch");
  CvResult result;
  result.oof_scores.assign(y.size(), 0.0);
  std::vector<FoldMetrics> per_fold;
  per_fold.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fold = folds[f];
    const Matrix Xtr = X.select_rows(fold.train);
    std::vector<int> ytr;
    ytr.reserve(fold.train.size());
    for (auto i : fold.train) ytr.push_back(y[i]);
    ModelSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, f);
    const auto model = fit_classifier(fold_spec, Xtr, ytr);
    std::vector<int> yte;
    std::vector<double> scores;
    for (auto i : fold.test) {
      yte.push_back(y[i]);
      const double p = model->predict_proba(X.row(i));
      scores.push_back(p);
      result.oof_scores[i] = p;
    }
    per_fold.push_back(fold_metrics(f, yte, threshold_predictions(scores, protocol.threshold), scores));
  }
  result.summary = summarize(per_fold, protocol.ci);
  return result;
}

}  // namespace ckd
