#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace ckd {

enum class ClassifierId { LR, DT, KNN, SVM, RF, ET, AB, GB, XGB, LGB, CB, MLP };
enum class Family { Linear, Tree, Distance, Kernel, Bagging, Boosting, Neural };

struct ClassifierKind {
  ClassifierId id;
  std::string_view name;
  Family family;
  bool supports_importance;
  bool supports_probability;
  std::string_view description;
};

inline constexpr std::size_t kNumClassifiers = 12;

// In registry order.
const std::array<ClassifierKind, kNumClassifiers>& classifier_registry();
const ClassifierKind& classifier_kind(ClassifierId id);
// Throws ValidationError("unregistered kind ...") for unknown names.
const ClassifierKind& classifier_kind(std::string_view name);
std::size_t registry_order(ClassifierId id);
std::string_view family_name(Family f);

}  // namespace ckd
