#include "ckd/models/params.hpp"

#include <algorithm>
#include <cmath>

#include "ckd/cohort/schema.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

json params_to_json(const Params& p) {
  json j = json::object();
  for (const auto& [k, v] : p) std::visit([&](const auto& x) { j[k] = x; }, v);
  return j;
}

Params params_from_json(const json& j) {
  Params p;
  for (const auto& [k, v] : j.items()) {
    if (v.is_number_integer()) {
      p[k] = v.get<std::int64_t>();
    } else if (v.is_number()) {
      p[k] = v.get<double>();
    } else if (v.is_string()) {
      p[k] = v.get<std::string>();
    } else {
      throw ValidationError("parameter " + k + " must be a number or string");
    }
  }
  return p;
}

std::string param_to_string(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return json(*d).dump();
  return std::get<std::string>(v);
}

namespace {

const ParamValue& lookup(const Params& p, const std::string& name) {
  const auto it = p.find(name);
  if (it == p.end()) throw ValidationError("missing hyperparameter " + name);
  return it->second;
}

}  // namespace

std::int64_t get_int(const Params& p, const std::string& name) {
  const auto& v = lookup(p, name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ValidationError("hyperparameter " + name + " is not an integer");
}

double get_double(const Params& p, const std::string& name) {
  const auto& v = lookup(p, name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ValidationError("hyperparameter " + name + " is not numeric");
}

const std::string& get_string(const Params& p, const std::string& name) {
  const auto& v = lookup(p, name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ValidationError("hyperparameter " + name + " is not a string");
}

void ParamDomain::check(const ParamValue& v) const {
  switch (type) {
    case ParamType::Int: {
      const auto* i = std::get_if<std::int64_t>(&v);
      if (!i) throw ValidationError("hyperparameter " + name + " must be an integer");
      if (static_cast<double>(*i) < low || static_cast<double>(*i) > high)
        throw ValidationError("hyperparameter " + name + "=" + std::to_string(*i) + " out of range");
      return;
    }
    case ParamType::Float: {
      double x = 0;
      if (const auto* d = std::get_if<double>(&v)) {
        x = *d;
      } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
        x = static_cast<double>(*i);
      } else {
        throw ValidationError("hyperparameter " + name + " must be numeric");
      }
      if (!std::isfinite(x) || x < low || x > high)
        throw ValidationError("hyperparameter " + name + "=" + param_to_string(v) + " out of range");
      return;
    }
    case ParamType::Categorical: {
      const auto* s = std::get_if<std::string>(&v);
      if (!s || std::find(choices.begin(), choices.end(), *s) == choices.end())
        throw ValidationError("hyperparameter " + name + " must be one of the declared choices");
      return;
    }
  }
}

const ParamDomain* SearchSpace::find(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

Params SearchSpace::defaults() const {
  Params out;
  for (const auto& p : params) out[p.name] = p.default_value;
  return out;
}

const SearchSpace& SearchSpaceCatalog::at(std::string_view kind) const {
  const auto it = kinds.find(std::string(kind));
  if (it == kinds.end()) throw ValidationError("no search space for kind " + std::string(kind));
  return it->second;
}

SearchSpaceCatalog SearchSpaceCatalog::from_json(const json& j) {
  SearchSpaceCatalog cat;
  cat.version = j.at("version").get<int>();
  for (const auto& [kind, entries] : j.at("kinds").items()) {
    SearchSpace space;
    for (const auto& e : entries) {
      ParamDomain d;
      d.name = e.at("name").get<std::string>();
      const auto type = e.at("type").get<std::string>();
      if (type == "int") {
        d.type = ParamType::Int;
        d.low = e.at("low").get<double>();
        d.high = e.at("high").get<double>();
        d.default_value = e.at("default").get<std::int64_t>();
      } else if (type == "float") {
        d.type = ParamType::Float;
        d.low = e.at("low").get<double>();
        d.high = e.at("high").get<double>();
        d.default_value = e.at("default").get<double>();
      } else if (type == "categorical") {
        d.type = ParamType::Categorical;
        d.choices = e.at("choices").get<std::vector<std::string>>();
        d.default_value = e.at("default").get<std::string>();
      } else {
        throw ValidationError("search space " + kind + "." + d.name + ": unknown type " + type);
      }
      d.log = e.value("log", false);
      if (d.type != ParamType::Categorical && (d.low > d.high || (d.log && d.low <= 0)))
        throw ValidationError("search space " + kind + "." + d.name + ": invalid bounds");
      d.check(d.default_value);
      space.params.push_back(std::move(d));
    }
    cat.kinds.emplace(kind, std::move(space));
  }
  return cat;
}

SearchSpaceCatalog SearchSpaceCatalog::load(const std::filesystem::path& path) {
  return from_json(json::parse(read_text_file(path)));
}

const SearchSpaceCatalog& SearchSpaceCatalog::builtin() {
  static const SearchSpaceCatalog cat = load(source_data_dir() / "search_spaces.json");
  return cat;
}

}  // namespace ckd
