#include "ckd/app/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/models/registry.hpp"

namespace ckd {

using nlohmann::json;

std::vector<std::string> PipelineConfig::classifier_list() const {
  if (!classifiers.empty()) return classifiers;
  std::vector<std::string> out;
  for (const auto& k : classifier_registry()) out.emplace_back(k.name);
  return out;
}

namespace {

json deterministic_part(const PipelineConfig& c) {
  json cohort{{"kind", c.cohort.kind}, {"seed", c.cohort.seed}};
  if (c.cohort.kind == "file") cohort["path"] = c.cohort.path.string();
  return {{"cohort", cohort},
          {"feature_sets", c.feature_sets},
          {"classifiers", c.classifier_list()},
          {"selection", c.selection},
          {"budget", {{"n_trials", c.budget.n_trials},
                      {"sampler", c.budget.sampler == Sampler::Tpe ? "tpe" : "random"},
                      {"seed", c.budget.seed}}},
          {"cv", {{"k", c.cv.k},
                  {"seed", c.cv.seed},
                  {"ci", c.cv.ci == CiMethod::StudentT ? "student_t" : "normal"},
                  {"threshold", c.cv.threshold}}},
          {"compare_sota", c.compare_sota},
          {"external_datasets", c.external_datasets}};
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ValidationError("unknown config key " + where + (where.empty() ? "" : ".") + k);
}

}  // namespace

json PipelineConfig::to_json() const {
  auto j = deterministic_part(*this);
  j["cache_dir"] = cache_dir.string();
  j["output_dir"] = output_dir.string();
  j["serve"] = {{"bind_address", serve.bind_address}, {"port", serve.port}, {"model", serve.model.string()}};
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  check_keys(j,
             {"cohort", "feature_sets", "classifiers", "selection", "budget", "cv", "compare_sota", "external_datasets",
              "cache_dir", "output_dir", "serve"},
             "");
  PipelineConfig c;
  try {
    if (j.contains("cohort")) {
      const auto& s = j.at("cohort");
      check_keys(s, {"kind", "path", "seed"}, "cohort");
      c.cohort.kind = s.value("kind", c.cohort.kind);
      c.cohort.path = s.value("path", std::string{});
      c.cohort.seed = s.value("seed", c.cohort.seed);
    }
    if (j.contains("feature_sets")) c.feature_sets = j.at("feature_sets").get<std::vector<std::string>>();
    if (j.contains("classifiers")) c.classifiers = j.at("classifiers").get<std::vector<std::string>>();
    c.selection = j.value("selection", c.selection);
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      check_keys(b, {"n_trials", "sampler", "seed"}, "budget");
      c.budget.n_trials = b.value("n_trials", c.budget.n_trials);
      const auto sampler = b.value("sampler", std::string("tpe"));
      if (sampler != "tpe" && sampler != "random") throw ValidationError("unknown sampler " + sampler);
      c.budget.sampler = sampler == "tpe" ? Sampler::Tpe : Sampler::Random;
      c.budget.seed = b.value("seed", c.budget.seed);
    }
    if (j.contains("cv")) {
      const auto& v = j.at("cv");
      check_keys(v, {"k", "seed", "ci", "threshold"}, "cv");
      c.cv.k = v.value("k", c.cv.k);
      c.cv.seed = v.value("seed", c.cv.seed);
      const auto ci = v.value("ci", std::string("student_t"));
      if (ci != "student_t" && ci != "normal") throw ValidationError("unknown ci method " + ci);
      c.cv.ci = ci == "normal" ? CiMethod::Normal : CiMethod::StudentT;
      c.cv.threshold = v.value("threshold", c.cv.threshold);
    }
    c.compare_sota = j.value("compare_sota", c.compare_sota);
    if (j.contains("external_datasets"))
      c.external_datasets = j.at("external_datasets").get<std::vector<std::string>>();
    c.cache_dir = j.value("cache_dir", std::string{});
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (j.contains("serve")) {
      const auto& s = j.at("serve");
      check_keys(s, {"bind_address", "port", "model"}, "serve");
      c.serve.bind_address = s.value("bind_address", c.serve.bind_address);
      c.serve.port = s.value("port", c.serve.port);
      c.serve.model = s.value("model", std::string{});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string PipelineConfig::digest() const { return sha256_hex(deterministic_part(*this).dump()); }

void PipelineConfig::validate() const {
  if (cohort.kind != "synthetic" && cohort.kind != "file") throw ValidationError("unknown cohort kind " + cohort.kind);
  if (cohort.kind == "file" && cohort.path.empty()) throw ValidationError("cohort kind file needs a path");
  if (feature_sets.empty()) throw ValidationError("no feature sets configured");
  std::set<std::string> seen;
  for (const auto& c : classifier_list()) {
    classifier_kind(c);
    if (!seen.insert(c).second) throw ValidationError("classifier " + c + " listed twice");
  }
  if (selection != "recorded" && selection != "run") throw ValidationError("unknown selection mode " + selection);
  if (budget.n_trials < 1) throw ValidationError("budget must allow at least one trial");
  if (cv.k < 2) throw ValidationError("cv.k must be at least 2");
  if (!(cv.threshold > 0 && cv.threshold < 1)) throw ValidationError("cv.threshold must lie in (0, 1)");
  if (serve.port < 0 || serve.port > 65535) throw ValidationError("serve.port out of range");
}

void apply_environment(PipelineConfig& config) {
  if (const char* v = std::getenv("CKD_BIND_ADDRESS"); v && *v) {
    std::string s(v);
    const auto colon = s.rfind(':');
    if (colon != std::string::npos && s.find(':') == colon) {
      config.serve.bind_address = s.substr(0, colon);
      try {
        config.serve.port = std::stoi(s.substr(colon + 1));
      } catch (const std::exception&) {
        throw ValidationError("CKD_BIND_ADDRESS has an invalid port: " + s);
      }
    } else {
      config.serve.bind_address = s;
    }
  }
  if (const char* v = std::getenv("CKD_CACHE_DIR"); v && *v) config.cache_dir = v;
  if (const char* v = std::getenv("CKD_PRIVATE_COHORT"); v && *v) {
    config.cohort.kind = "file";
    config.cohort.path = v;
  }
}

}  // namespace ckd
