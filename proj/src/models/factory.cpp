#include "ckd/models/factory.hpp"

#include <cmath>

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/models/boosting.hpp"
#include "ckd/models/forest.hpp"
#include "ckd/models/knn.hpp"
#include "ckd/models/linear.hpp"
#include "ckd/models/mlp.hpp"
#include "ckd/models/svm.hpp"

namespace ckd {

using nlohmann::json;

std::vector<double> Classifier::predict_proba(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_proba(X.row(i));
  return out;
}

std::vector<double> normalize_importances(std::vector<double> v) {
  double s = 0;
  for (double x : v) s += x;
  if (s > 0)
    for (double& x : v) x /= s;
  return v;
}

json TreeModel::to_json() const {
  return {{"type", "trees"}, {"n_features", d_}, {"importances", imp_}, {"ensemble", ens_.to_json()}};
}

std::unique_ptr<TreeModel> TreeModel::from_json(const json& j) {
  return std::make_unique<TreeModel>(TreeEnsemble::from_json(j.at("ensemble")),
                                     j.at("importances").get<std::vector<double>>(),
                                     j.at("n_features").get<std::size_t>());
}

std::unique_ptr<Classifier> classifier_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "trees") return TreeModel::from_json(j);
  if (type == "logistic") return LogisticModel::from_json(j);
  if (type == "knn") return KnnModel::from_json(j);
  if (type == "svm") return SvmModel::from_json(j);
  if (type == "mlp") return MlpModel::from_json(j);
  throw ValidationError("unknown fitted model type " + type);
}

json ModelSpec::to_json() const {
  return {{"kind", std::string(kind_name())},
          {"hyperparameters", params_to_json(hyperparameters)},
          {"class_weighting", class_weighting == ClassWeighting::Balanced ? "balanced" : "none"},
          {"seed", seed}};
}

ModelSpec ModelSpec::from_json(const json& j) {
  ModelSpec s;
  s.kind = classifier_kind(j.at("kind").get<std::string>()).id;
  s.hyperparameters = params_from_json(j.at("hyperparameters"));
  const auto cw = j.at("class_weighting").get<std::string>();
  if (cw != "balanced" && cw != "none") throw ValidationError("unknown class_weighting " + cw);
  s.class_weighting = cw == "balanced" ? ClassWeighting::Balanced : ClassWeighting::None;
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::string ModelSpec::digest() const { return sha256_hex(to_json().dump()); }

ModelSpec make_classifier(std::string_view kind, const Params& params, std::uint64_t seed, ClassWeighting weighting,
                          const SearchSpaceCatalog& spaces) {
  const auto& k = classifier_kind(kind);
  const auto& space = spaces.at(k.name);
  Params full = space.defaults();
  for (const auto& [name, value] : params) {
    const auto* domain = space.find(name);
    if (!domain) throw ValidationError("unknown hyperparameter " + name + " for " + std::string(k.name));
    domain->check(value);
    // Integral float values are accepted for float domains.
    if (domain->type == ParamType::Float && std::holds_alternative<std::int64_t>(value)) {
      full[name] = static_cast<double>(std::get<std::int64_t>(value));
    } else {
      full[name] = value;
    }
  }
  return {k.id, std::move(full), weighting, seed};
}

std::vector<double> class_weights(std::span<const int> y, ClassWeighting weighting) {
  std::vector<double> w(y.size(), 1.0);
  if (weighting == ClassWeighting::None) return w;
  double pos = 0;
  for (int v : y) pos += v == 1 ? 1 : 0;
  const double n = static_cast<double>(y.size());
  const double neg = n - pos;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double nc = y[i] == 1 ? pos : neg;
    w[i] = n / (2.0 * nc);
  }
  return w;
}

std::unique_ptr<Classifier> fit_classifier(const ModelSpec& spec, const Matrix& X, std::span<const int> y) {
  const auto w = class_weights(y, spec.class_weighting);
  return fit_classifier(spec, X, y, w);
}

std::unique_ptr<Classifier> fit_classifier(const ModelSpec& spec, const Matrix& X, std::span<const int> y,
                                           std::span<const double> w) {
  if (X.rows() != y.size() || X.rows() != w.size()) throw ValidationError("training data dimension mismatch");
  if (X.rows() == 0) throw ValidationError("no training rows");
  for (double v : X.data())
    if (std::isnan(v)) throw ValidationError("NaN in training matrix");
  for (int v : y)
    if (v != 0 && v != 1) throw ValidationError("training labels must be 0 or 1");
  const auto& p = spec.hyperparameters;
  const auto seed = spec.seed;
  switch (spec.kind) {
    case ClassifierId::LR:
    case ClassifierId::SVM: {
      bool pos = false;
      bool neg = false;
      for (int v : y) (v == 1 ? pos : neg) = true;
      if (!pos || !neg) throw ValidationError(std::string(spec.kind_name()) + " needs both classes in training data");
      if (spec.kind == ClassifierId::LR) return fit_logistic(X, y, w, get_double(p, "C"));
      return fit_svm(X, y, w, get_double(p, "C"), get_double(p, "gamma"));
    }
    case ClassifierId::DT: return fit_decision_tree(X, y, w, p, seed);
    case ClassifierId::KNN:
      return std::make_unique<KnnModel>(X, std::vector<int>(y.begin(), y.end()), std::vector<double>(w.begin(), w.end()),
                                        static_cast<std::size_t>(get_int(p, "n_neighbors")),
                                        get_string(p, "weights") == "distance");
    case ClassifierId::RF: return fit_random_forest(X, y, w, p, seed);
    case ClassifierId::ET: return fit_extra_trees(X, y, w, p, seed);
    case ClassifierId::AB: return fit_adaboost(X, y, w, p, seed);
    case ClassifierId::GB: return fit_gradient_boosting(X, y, w, p, seed);
    case ClassifierId::XGB: return fit_xgboost(X, y, w, p, seed);
    case ClassifierId::LGB: return fit_lightgbm(X, y, w, p, seed);
    case ClassifierId::CB: return fit_catboost(X, y, w, p, seed);
    case ClassifierId::MLP: {
      MlpOptions o;
      o.hidden = static_cast<std::size_t>(get_int(p, "hidden_units"));
      o.learning_rate = get_double(p, "learning_rate");
      o.alpha = get_double(p, "alpha");
      o.epochs = static_cast<std::size_t>(get_int(p, "epochs"));
      o.tanh = get_string(p, "activation") == "tanh";
      return fit_mlp(X, y, w, o, seed);
    }
  }
  throw ValidationError("unregistered kind");
}

}  // namespace ckd
