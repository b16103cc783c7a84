#include "ckd/models/registry.hpp"

#include <string>

#include "ckd/common/error.hpp"

namespace ckd {

const std::array<ClassifierKind, kNumClassifiers>& classifier_registry() {
  static const std::array<ClassifierKind, kNumClassifiers> reg{{
      {ClassifierId::LR, "LR", Family::Linear, true, true, "L2-regularized logistic regression"},
      {ClassifierId::DT, "DT", Family::Tree, true, true, "CART decision tree, Gini criterion"},
      {ClassifierId::KNN, "KNN", Family::Distance, false, true, "k-nearest neighbours vote"},
      {ClassifierId::SVM, "SVM", Family::Kernel, false, true, "RBF-kernel support vector machine"},
      {ClassifierId::RF, "RF", Family::Bagging, true, true, "random forest of bootstrapped CART trees"},
      {ClassifierId::ET, "ET", Family::Bagging, true, true, "extremely randomized trees"},
      {ClassifierId::AB, "AB", Family::Boosting, true, true, "discrete AdaBoost (SAMME) over shallow trees"},
      {ClassifierId::GB, "GB", Family::Boosting, true, true, "gradient boosting, least-squares splits on gradients"},
      {ClassifierId::XGB, "XGB", Family::Boosting, true, true,
       "second-order boosting, depth-wise growth, L2 leaf penalty and split cost"},
      {ClassifierId::LGB, "LGB", Family::Boosting, true, true, "second-order boosting, best-first leaf-wise growth"},
      {ClassifierId::CB, "CB", Family::Boosting, true, true, "second-order boosting over oblivious trees"},
      {ClassifierId::MLP, "MLP", Family::Neural, false, true, "one-hidden-layer perceptron trained with Adam"},
  }};
  return reg;
}

const ClassifierKind& classifier_kind(ClassifierId id) { return classifier_registry()[registry_order(id)]; }

const ClassifierKind& classifier_kind(std::string_view name) {
  for (const auto& k : classifier_registry())
    if (k.name == name) return k;
  throw ValidationError("unregistered kind: " + std::string(name));
}

std::size_t registry_order(ClassifierId id) { return static_cast<std::size_t>(id); }

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Linear: return "linear";
    case Family::Tree: return "tree";
    case Family::Distance: return "distance";
    case Family::Kernel: return "kernel";
    case Family::Bagging: return "bagging";
    case Family::Boosting: return "boosting";
    case Family::Neural: return "neural";
  }
  return "?";
}

}  // namespace ckd
