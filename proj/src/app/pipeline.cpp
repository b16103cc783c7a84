#include "ckd/app/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "ckd/cohort/synthetic.hpp"
#include "ckd/common/error.hpp"
#include "ckd/external/cache.hpp"
#include "ckd/models/registry.hpp"

namespace ckd {

using nlohmann::json;

namespace {

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FieldError& e) {
    throw FieldError(e.reason(), e.field(), stage + ": " + e.what());
  } catch (const SchemaMismatchError& e) {
    throw SchemaMismatchError(stage + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(stage + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(stage + ": " + e.what());
  }
}

void note(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::string file_stem(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return s;
}

}  // namespace

Cohort load_training_cohort(const PipelineConfig& config, const CohortSchema& schema) {
  if (config.cohort.kind == "synthetic") return synthesize_cohort(schema, marginals_spec(schema, config.cohort.seed));
  LoadOptions opts;
  opts.strict = true;
  opts.dataset_id = "primary";
  return load_cohort(config.cohort.path, schema, opts).cohort;
}

std::vector<FeatureRanking> pipeline_rankings(const PipelineConfig& config, const EncodedMatrix& data,
                                              const CohortSchema& schema) {
  if (config.selection == "recorded") return recorded_rankings();
  std::vector<FeatureRanking> out;
  for (auto scope : {Scope::S1, Scope::S2})
    for (auto m : kAllSelectionMethods) out.push_back(run_selection(m, data, schema, scope, config.cv.seed));
  return out;
}

EvaluationReport evaluate_feature_set(const std::string& name, const std::vector<std::string>& columns,
                                      const EncodedMatrix& data, const PipelineConfig& config,
                                      std::map<std::string, TuneResult>* tuned, const ProgressFn& progress) {
  const auto sub = data.select_columns(columns);
  std::vector<ModelRow> rows;
  for (const auto& kind : config.classifier_list()) {
    note(progress, "tune " + name + " " + kind);
    auto t = tune(kind, sub.values, sub.labels, config.budget, config.cv, config.budget.seed);
    auto cv = cross_validate(t.best, sub.values, sub.labels, config.cv);
    rows.push_back({kind, registry_order(classifier_kind(kind).id), std::move(cv.summary)});
    if (tuned) tuned->emplace(kind, std::move(t));
  }
  return make_report(name, std::move(rows));
}

std::vector<ExternalReport> validate_external(const HarmonizationMap& map, const Cohort& external,
                                              const EncodedMatrix& training, const ModelSpec& s1_spec,
                                              const ModelSpec& s2_spec) {
  const auto data = encode_onehot(external);
  std::vector<ExternalReport> out;
  for (const std::string set : {"Common", "S1subset", "S2subset"}) {
    const auto it = map.sets.find(set);
    if (it == map.sets.end()) continue;
    const auto& spec = set == "S2subset" ? s2_spec : s1_spec;
    const auto model = train(spec, training, set, it->second);
    const std::string label = set == "Common" ? "Common" : set == "S1subset" ? "S1 subset" : "S2 subset";
    out.push_back(external_evaluate(model, data, std::string(dataset_name(map.dataset)), label));
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config, const ProgressFn& progress) {
  const auto schema = CohortSchema::primary();
  staged("config", [&] {
    config.validate();
    for (const auto& d : config.external_datasets) parse_dataset(d);
    return 0;
  });

  note(progress, "preprocess");
  const auto cohort = staged("preprocess", [&] { return load_training_cohort(config, schema); });
  const auto data = encode_onehot(cohort);

  // Recorded rankings are enough to check names before any expensive work.
  staged("config", [&] {
    FeatureSetCatalog probe(schema);
    probe.add_rankings(recorded_rankings());
    for (const auto& s : config.feature_sets) probe.at(s);
    return 0;
  });

  note(progress, "select");
  PipelineResult res;
  res.rankings = staged("select", [&] { return pipeline_rankings(config, data, schema); });
  FeatureSetCatalog catalog(schema);
  catalog.add_rankings(res.rankings);

  auto& bundle = res.bundle;
  json all_tuning = json::object();
  for (const auto& set : config.feature_sets) {
    std::map<std::string, TuneResult> tuned;
    auto report = staged("evaluate " + set, [&] {
      return evaluate_feature_set(set, catalog.at(set), data, config, &tuned, progress);
    });
    json logs = json::object();
    for (const auto& [kind, t] : tuned) logs[kind] = t.trial_log();
    all_tuning[set] = logs;
    const auto& best = tuned.at(report.best_row().classifier);
    auto model = staged("train " + set, [&] { return train(best.best, data, set, catalog.at(set)); });
    model.set_trial_log(best.trial_log());
    bundle.add("models/" + file_stem(set) + ".json", model.to_json().dump(1) + "\n");
    res.best_models.emplace(set, std::move(model));
    res.reports.push_back(std::move(report));
  }

  std::vector<std::string> order;
  for (const auto& f : schema.features()) order.push_back(f.name);
  for (auto scope : {Scope::S1, Scope::S2})
    bundle.add("rankings_" + std::string(scope_name(scope)) + ".tsv", format_ranking_table(res.rankings, scope, order));
  bundle.add("rankings.json", rankings_to_json(res.rankings).dump(1) + "\n");
  bundle.add("feature_sets.json", catalog.to_json().dump(1) + "\n");
  bundle.add("performance.tsv", format_performance_table(res.reports));
  bundle.add("performance_best.tsv", format_best_table(res.reports));
  bundle.add("confusion.tsv", format_confusion_table(res.reports));
  json evals = json::array();
  for (const auto& r : res.reports) evals.push_back(r.to_json());
  bundle.add("evaluation.json", evals.dump(1) + "\n");
  bundle.add("tuning.json", all_tuning.dump(1) + "\n");

  auto best_spec = [&](const std::string& set, ClassifierId fallback) {
    const auto it = res.best_models.find(set);
    if (it != res.best_models.end()) return it->second.spec();
    return ModelSpec{fallback, SearchSpaceCatalog::builtin().at(classifier_kind(fallback).name).defaults(),
                     ClassWeighting::Balanced, 42};
  };

  if (config.compare_sota) {
    note(progress, "compare-sota");
    staged("compare-sota", [&] {
      for (auto t : kAllTools) res.tools.push_back(evaluate_tool(clinical_tool(t), primary_binding(t), cohort));
      std::vector<ProposedModel> proposed;
      for (const auto& r : res.reports) {
        if (r.feature_set_name == "BestS1") proposed.push_back({"S1 model", r.best_row().summary});
        if (r.feature_set_name == "BestS2") proposed.push_back({"S2 model", r.best_row().summary});
      }
      bundle.add("sota.tsv", format_sota_table(res.tools, proposed));
      bundle.add("sota.json", sota_to_json(res.tools, proposed).dump(1) + "\n");
      return 0;
    });
  }

  if (!config.external_datasets.empty()) {
    note(progress, "external-validate");
    staged("external-validate", [&] {
      DatasetCache cache(config.cache_dir.empty() ? DatasetCache::default_dir() : config.cache_dir);
      const auto s1 = best_spec("BestS1", ClassifierId::DT);
      const auto s2 = best_spec("BestS2", ClassifierId::CB);
      for (const auto& name : config.external_datasets) {
        const auto& map = builtin_map(parse_dataset(name));
        const auto raw = load_source(cache.ensure(map, false), map);
        const auto h = harmonize(raw, map, schema);
        auto reports = validate_external(map, h.cohort, data, s1, s2);
        res.external.insert(res.external.end(), reports.begin(), reports.end());
      }
      bundle.add("external.tsv", format_external_table(res.external));
      bundle.add("external.json", external_reports_to_json(res.external).dump(1) + "\n");
      return 0;
    });
  }

  bundle.set_meta("config", config.to_json());
  bundle.set_meta("config_digest", config.digest());
  bundle.set_meta("schema_hash", schema.hash());
  bundle.set_meta("data_digest", matrix_digest(data));
  bundle.set_meta("seeds", {{"cohort", config.cohort.seed}, {"budget", config.budget.seed}, {"cv", config.cv.seed}});
  bundle.set_meta("versions", {{"ckdscreen", CKD_VERSION}, {"model_format", 1}, {"schema", CohortSchema::kSchemaVersion}});
  return res;
}

}  // namespace ckd
