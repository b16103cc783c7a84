#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ckd {

using ParamValue = std::variant<std::int64_t, double, std::string>;
using Params = std::map<std::string, ParamValue>;

nlohmann::json params_to_json(const Params& p);
Params params_from_json(const nlohmann::json& j);
std::string param_to_string(const ParamValue& v);

std::int64_t get_int(const Params& p, const std::string& name);
double get_double(const Params& p, const std::string& name);
const std::string& get_string(const Params& p, const std::string& name);

enum class ParamType { Int, Float, Categorical };

struct ParamDomain {
  std::string name;
  ParamType type = ParamType::Float;
  double low = 0;
  double high = 0;
  bool log = false;
  std::vector<std::string> choices;
  ParamValue default_value;

  // Throws ValidationError when v has the wrong type or lies outside the domain.
  void check(const ParamValue& v) const;
};

// Ordered parameter domains for one classifier kind.
struct SearchSpace {
  std::vector<ParamDomain> params;

  [[nodiscard]] const ParamDomain* find(std::string_view name) const;
  [[nodiscard]] Params defaults() const;
};

struct SearchSpaceCatalog {
  int version = 0;
  std::map<std::string, SearchSpace> kinds;

  [[nodiscard]] const SearchSpace& at(std::string_view kind) const;
  static SearchSpaceCatalog from_json(const nlohmann::json& j);
  static SearchSpaceCatalog load(const std::filesystem::path& path);
  // data/search_spaces.json, loaded once.
  static const SearchSpaceCatalog& builtin();
};

}  // namespace ckd
