#include <csignal>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "ckd/app/config.hpp"
#include "ckd/app/pipeline.hpp"
#include "ckd/app/service.hpp"
#include "ckd/cohort/synthetic.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/external/cache.hpp"
#include "ckd/models/factory.hpp"
#include "ckd/models/params.hpp"
#include "ckd/models/registry.hpp"
#include "ckd/selection/ranking.hpp"

using namespace ckd;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Options shared by the subcommands that build a PipelineConfig. Unset flags
// leave the config file (or default) value in place.
struct ConfigFlags {
  std::string config_path;
  std::string cohort;
  std::optional<std::uint64_t> cohort_seed;
  std::vector<std::string> feature_sets;
  std::vector<std::string> classifiers;
  std::string selection;
  std::optional<std::size_t> budget;
  std::string sampler;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::string output_dir;
  std::string cache_dir;
  std::vector<std::string> external;
  bool no_sota = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config; flags override its values");
    app->add_option("--cohort", cohort, "cohort file, or 'synthetic'");
    app->add_option("--cohort-seed", cohort_seed, "synthetic cohort seed");
    app->add_option("--feature-sets", feature_sets, "feature set names from the catalog");
    app->add_option("--classifiers", classifiers, "classifier kinds (default: all twelve)");
    app->add_option("--selection", selection, "recorded | run");
    app->add_option("--budget", budget, "tuning trials per classifier");
    app->add_option("--sampler", sampler, "tpe | random");
    app->add_option("--seed", seed, "seed for tuning and cross-validation");
    app->add_option("--k", k, "cross-validation folds");
    app->add_option("--output-dir", output_dir, "bundle directory");
    app->add_option("--cache-dir", cache_dir, "external dataset cache");
    app->add_option("--external", external, "external datasets to validate on (cached only)");
    app->add_flag("--no-sota", no_sota, "skip the clinical tool comparison");
  }

  [[nodiscard]] PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
    apply_environment(c);
    if (!cohort.empty()) {
      if (cohort == "synthetic") {
        c.cohort.kind = "synthetic";
      } else {
        c.cohort.kind = "file";
        c.cohort.path = cohort;
      }
    }
    if (cohort_seed) c.cohort.seed = *cohort_seed;
    if (!feature_sets.empty()) c.feature_sets = feature_sets;
    if (!classifiers.empty()) c.classifiers = classifiers;
    if (!selection.empty()) c.selection = selection;
    if (budget) c.budget.n_trials = *budget;
    if (!sampler.empty()) {
      if (sampler != "tpe" && sampler != "random") throw ValidationError("unknown sampler " + sampler);
      c.budget.sampler = sampler == "tpe" ? Sampler::Tpe : Sampler::Random;
    }
    if (seed) {
      c.budget.seed = *seed;
      c.cv.seed = *seed;
    }
    if (k) c.cv.k = *k;
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (!cache_dir.empty()) c.cache_dir = cache_dir;
    if (!external.empty()) c.external_datasets = external;
    if (no_sota) c.compare_sota = false;
    c.validate();
    return c;
  }
};

Cohort cohort_from(const std::string& source, std::uint64_t seed, const CohortSchema& schema) {
  PipelineConfig c;
  if (source.empty() || source == "synthetic") {
    c.cohort.seed = seed;
  } else {
    c.cohort.kind = "file";
    c.cohort.path = source;
  }
  return load_training_cohort(c, schema);
}

void print_progress(const std::string& s) { std::cerr << "[ckdscreen] " << s << "\n"; }

int cmd_ingest(const std::string& input, const std::string& output, const std::vector<std::string>& mapping,
               bool strict) {
  const auto schema = CohortSchema::primary();
  LoadOptions opts;
  opts.strict = strict;
  for (const auto& m : mapping) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw ValidationError("mapping must be feature=column: " + m);
    opts.mapping[m.substr(0, eq)] = m.substr(eq + 1);
  }
  const auto res = load_cohort(input, schema, opts);
  for (const auto& d : res.rejected) std::cerr << "row " << d.line << " (" << d.column << "): " << d.message << "\n";
  write_cohort(res.cohort, output);
  std::cout << "rows " << res.cohort.size() << " (CKD " << res.cohort.count_positive() << ", non-CKD "
            << res.cohort.count_negative() << "), rejected " << res.rejected.size() << "\n";
  return 0;
}

int cmd_synthesize(std::optional<std::size_t> n_ckd, std::optional<std::size_t> n_nonckd, std::uint64_t seed,
                   const std::string& output) {
  const auto schema = CohortSchema::primary();
  auto spec = marginals_spec(schema, seed);
  if (n_ckd) spec.n_ckd = *n_ckd;
  if (n_nonckd) spec.n_nonckd = *n_nonckd;
  const auto cohort = synthesize_cohort(schema, spec);
  if (output.empty()) {
    std::cout << format_cohort(cohort);
  } else {
    write_cohort(cohort, output);
  }
  return 0;
}

int cmd_select(const std::string& cohort_src, std::uint64_t cohort_seed, const std::vector<std::string>& methods,
               const std::string& scope_arg, std::uint64_t seed, const std::string& output) {
  const auto schema = CohortSchema::primary();
  const auto data = encode_onehot(cohort_from(cohort_src, cohort_seed, schema));
  std::vector<Scope> scopes;
  if (scope_arg == "both") {
    scopes = {Scope::S1, Scope::S2};
  } else {
    scopes = {parse_scope(scope_arg)};
  }
  std::vector<SelectionMethod> chosen;
  if (methods.empty() || (methods.size() == 1 && methods[0] == "all")) {
    chosen.assign(kAllSelectionMethods.begin(), kAllSelectionMethods.end());
  } else {
    for (const auto& m : methods) chosen.push_back(parse_method(m));
  }
  std::vector<FeatureRanking> out;
  for (auto s : scopes)
    for (auto m : chosen) {
      print_progress(std::string(method_name(m)) + " " + std::string(scope_name(s)));
      out.push_back(run_selection(m, data, schema, s, seed));
    }
  std::vector<std::string> order;
  for (const auto& f : schema.features()) order.push_back(f.name);
  for (auto s : scopes) std::cout << format_ranking_table(out, s, order) << "\n";
  if (!output.empty()) write_text_file(output, rankings_to_json(out).dump(1) + "\n");
  return 0;
}

int cmd_train(const std::string& cohort_src, std::uint64_t cohort_seed, const std::string& set,
              const std::string& kind, const std::string& params_json, std::optional<std::size_t> budget,
              std::uint64_t seed, const std::string& rankings, const std::string& output) {
  const auto schema = CohortSchema::primary();
  const auto data = encode_onehot(cohort_from(cohort_src, cohort_seed, schema));
  FeatureSetCatalog catalog(schema);
  catalog.add_rankings(rankings.empty() ? recorded_rankings() : load_rankings(rankings));
  const auto& columns = catalog.at(set);
  ModelSpec spec;
  std::optional<TuneResult> tuned;
  if (budget) {
    const auto sub = data.select_columns(columns);
    tuned = tune(kind, sub.values, sub.labels, {*budget, Sampler::Tpe, seed}, CvProtocol{10, seed}, seed);
    spec = tuned->best;
  } else {
    Params p;
    if (!params_json.empty()) {
      try {
        p = params_from_json(json::parse(params_json));
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("--params is not valid JSON: ") + e.what());
      }
    }
    spec = make_classifier(kind, p, seed);
  }
  auto model = train(spec, data, set, columns);
  if (tuned) model.set_trial_log(tuned->trial_log());
  model.save(output);
  std::cout << "trained " << spec.kind_name() << " on " << set << " (" << columns.size() << " columns) -> " << output
            << "\n";
  return 0;
}

int cmd_evaluate(const ConfigFlags& flags) {
  const auto config = flags.resolve();
  const auto res = run_pipeline(config, print_progress);
  res.bundle.write(config.output_dir);
  std::cout << res.bundle.file("performance_best.tsv");
  std::cout << "bundle written to " << config.output_dir.string() << "\n";
  return 0;
}

int cmd_compare_sota(const std::string& cohort_src, std::uint64_t cohort_seed, const std::vector<std::string>& models,
                     std::size_t k, std::uint64_t seed, const std::string& output) {
  const auto schema = CohortSchema::primary();
  const auto cohort = cohort_from(cohort_src, cohort_seed, schema);
  std::vector<ToolEvaluation> tools;
  for (auto t : kAllTools) tools.push_back(evaluate_tool(clinical_tool(t), primary_binding(t), cohort));
  std::vector<ProposedModel> proposed;
  const auto data = encode_onehot(cohort);
  for (const auto& path : models) {
    const auto m = TrainedModel::load(path);
    m.require_schema(schema.hash());
    const auto sub = data.select_columns(m.columns());
    auto cv = cross_validate(m.spec(), sub.values, sub.labels, CvProtocol{k, seed});
    proposed.push_back({m.feature_set_name() + " " + std::string(m.spec().kind_name()), std::move(cv.summary)});
  }
  std::cout << format_sota_table(tools, proposed);
  if (!output.empty()) write_text_file(output, sota_to_json(tools, proposed).dump(1) + "\n");
  return 0;
}

int cmd_external(const std::vector<std::string>& datasets, const std::string& source, std::string cache_dir,
                 bool download, const std::string& training_src, std::uint64_t cohort_seed, const std::string& model_s1,
                 const std::string& model_s2, const std::string& output) {
  const auto schema = CohortSchema::primary();
  PipelineConfig env;
  apply_environment(env);
  if (cache_dir.empty()) cache_dir = env.cache_dir.empty() ? DatasetCache::default_dir().string() : env.cache_dir.string();
  DatasetCache cache(cache_dir);
  std::vector<DatasetId> ids;
  for (const auto& d : datasets) {
    if (d == "all") {
      ids.assign(kAllDatasets.begin(), kAllDatasets.end());
    } else {
      ids.push_back(parse_dataset(d));
    }
  }
  if (ids.empty()) ids.assign(kAllDatasets.begin(), kAllDatasets.end());
  if (!source.empty()) {
    if (ids.size() != 1) throw ValidationError("--source needs exactly one --dataset");
    cache.import(builtin_map(ids[0]), source);
  }
  const auto training = encode_onehot(cohort_from(training_src, cohort_seed, schema));
  auto spec_of = [&](const std::string& path, ClassifierId fallback) {
    if (!path.empty()) return TrainedModel::load(path).spec();
    return make_classifier(classifier_kind(fallback).name);
  };
  const auto s1 = spec_of(model_s1, ClassifierId::DT);
  const auto s2 = spec_of(model_s2, ClassifierId::CB);
  std::vector<ExternalReport> reports;
  for (auto id : ids) {
    const auto& map = builtin_map(id);
    const auto raw = load_source(cache.ensure(map, download), map);
    const auto h = harmonize(raw, map, schema);
    print_progress(std::string(dataset_name(id)) + ": " + std::to_string(h.cohort.size()) + " rows, " +
                   std::to_string(h.imputed_cells) + " imputed cells");
    for (const auto& [set, why] : map.unavailable) print_progress(std::string(dataset_name(id)) + " " + set + ": " + why);
    auto r = validate_external(map, h.cohort, training, s1, s2);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  std::cout << format_external_table(reports);
  if (!output.empty()) write_text_file(output, external_reports_to_json(reports).dump(1) + "\n");
  return 0;
}

int cmd_explain(const std::string& model_path, const std::string& input, const std::string& cohort_src,
                std::uint64_t cohort_seed, bool global, std::size_t permutations, std::uint64_t seed) {
  const auto schema = CohortSchema::primary();
  const auto model = TrainedModel::load(model_path);
  ExplainOptions opts;
  opts.permutations = permutations;
  opts.seed = seed;
  if (global) {
    const auto data = encode_onehot(cohort_from(cohort_src, cohort_seed, schema));
    const auto sub = data.select_columns(model.columns());
    model.require_schema(data.schema_hash);
    std::cout << explain_global(model, sub.values, opts).to_delimited();
    return 0;
  }
  if (input.empty()) throw ValidationError("explain needs --input (feature map JSON) or --global");
  const PredictionService service(model, schema, opts);
  json request;
  try {
    request = json::parse(input.front() == '{' ? input : read_text_file(input));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("input is not valid JSON: ") + e.what());
  }
  std::cout << service.explain(request).dump(1) << "\n";
  return 0;
}

ServiceServer* g_server = nullptr;

int cmd_serve(const ConfigFlags& flags, const std::string& model_path, const std::string& bind,
              std::optional<int> port) {
  auto config = flags.resolve();
  if (!model_path.empty()) config.serve.model = model_path;
  if (!bind.empty()) config.serve.bind_address = bind;
  if (port) config.serve.port = *port;
  if (config.serve.model.empty()) throw ValidationError("serve needs a model artifact (--model)");
  auto service = std::make_shared<const PredictionService>(TrainedModel::load(config.serve.model),
                                                           CohortSchema::primary());
  ServiceServer server(service);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "serving " << service->model().feature_set_name() << " on " << config.serve.bind_address << ":"
            << config.serve.port << "\n";
  server.run(config.serve.bind_address, config.serve.port);
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CKD screening toolkit"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "validate a delimited cohort file against the schema");
  std::string in_path, out_path;
  std::vector<std::string> mapping;
  bool strict = false;
  ingest->add_option("--input", in_path, "source file")->required();
  ingest->add_option("--output", out_path, "validated cohort file")->required();
  ingest->add_option("--map", mapping, "feature=column renames");
  ingest->add_flag("--strict", strict, "fail on the first invalid row");

  auto* synth = app.add_subcommand("synthesize", "draw a cohort from the recorded cohort marginals");
  std::optional<std::size_t> n_ckd, n_nonckd;
  std::uint64_t synth_seed = 42;
  std::string synth_out;
  synth->add_option("--n-ckd", n_ckd, "CKD rows");
  synth->add_option("--n-nonckd", n_nonckd, "non-CKD rows");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--output", synth_out, "cohort file (stdout when omitted)");

  std::string cohort_src = "synthetic";
  std::uint64_t cohort_seed = 42;
  auto add_cohort = [&](CLI::App* a) {
    a->add_option("--cohort", cohort_src, "cohort file, or 'synthetic'");
    a->add_option("--cohort-seed", cohort_seed, "synthetic cohort seed");
  };

  auto* select = app.add_subcommand("select-features", "rank features with the selection methods");
  std::vector<std::string> methods;
  std::string scope = "both", sel_out;
  std::uint64_t sel_seed = 42;
  add_cohort(select);
  select->add_option("--method", methods, "method names, or 'all'");
  select->add_option("--scope", scope, "S1 | S2 | both");
  select->add_option("--seed", sel_seed, "seed");
  select->add_option("--output", sel_out, "rankings JSON");

  auto* trainc = app.add_subcommand("train", "fit one classifier on a feature set");
  std::string set = "BestS1", kind = "DT", params, rankings, model_out;
  std::optional<std::size_t> train_budget;
  std::uint64_t train_seed = 42;
  add_cohort(trainc);
  trainc->add_option("--feature-set", set, "feature set name");
  trainc->add_option("--classifier", kind, "classifier kind");
  trainc->add_option("--params", params, "hyperparameters as a JSON object");
  trainc->add_option("--tune", train_budget, "tune with this many trials instead of --params");
  trainc->add_option("--seed", train_seed, "seed");
  trainc->add_option("--rankings", rankings, "rankings JSON (default: recorded selections)");
  trainc->add_option("--output", model_out, "model artifact")->required();

  auto* evaluate = app.add_subcommand("evaluate", "run the pipeline and write a results bundle");
  ConfigFlags eval_flags;
  eval_flags.attach(evaluate);

  auto* sota = app.add_subcommand("compare-sota", "score the clinical tools and compare with trained models");
  std::vector<std::string> sota_models;
  std::size_t sota_k = 10;
  std::uint64_t sota_seed = 42;
  std::string sota_out;
  add_cohort(sota);
  sota->add_option("--model", sota_models, "model artifacts to cross-validate alongside the tools");
  sota->add_option("--k", sota_k, "folds");
  sota->add_option("--seed", sota_seed, "seed");
  sota->add_option("--output", sota_out, "JSON report");

  auto* ext = app.add_subcommand("external-validate", "evaluate on harmonized public datasets");
  std::vector<std::string> datasets;
  std::string ext_source, ext_cache, s1_model, s2_model, ext_out;
  bool download = false;
  add_cohort(ext);
  ext->add_option("--dataset", datasets, "UCI-2015 | UCI-2023 | TH | all");
  ext->add_option("--source", ext_source, "local copy of the dataset to place in the cache");
  ext->add_option("--cache-dir", ext_cache, "cache directory");
  ext->add_flag("--download", download, "fetch missing datasets from their source URIs");
  ext->add_option("--model-s1", s1_model, "artifact whose spec is refit for Common and S1 subset");
  ext->add_option("--model-s2", s2_model, "artifact whose spec is refit for S2 subset");
  ext->add_option("--output", ext_out, "JSON report");

  auto* expl = app.add_subcommand("explain", "Shapley attributions for one input or a cohort");
  std::string expl_model, expl_input;
  bool global = false;
  std::size_t perms = 128;
  std::uint64_t expl_seed = 42;
  add_cohort(expl);
  expl->add_option("--model", expl_model, "model artifact")->required();
  expl->add_option("--input", expl_input, "feature map JSON, inline or a file");
  expl->add_flag("--global", global, "mean |contribution| over the cohort");
  expl->add_option("--permutations", perms, "sampled permutations above the exact limit");
  expl->add_option("--seed", expl_seed, "seed");

  auto* serve = app.add_subcommand("serve", "HTTP prediction and explanation service");
  ConfigFlags serve_flags;
  std::string serve_model, bind;
  std::optional<int> port;
  serve->add_option("--config", serve_flags.config_path, "JSON config");
  serve->add_option("--model", serve_model, "model artifact");
  serve->add_option("--bind", bind, "bind address");
  serve->add_option("--port", port, "port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(in_path, out_path, mapping, strict);
    if (synth->parsed()) return cmd_synthesize(n_ckd, n_nonckd, synth_seed, synth_out);
    if (select->parsed()) return cmd_select(cohort_src, cohort_seed, methods, scope, sel_seed, sel_out);
    if (trainc->parsed())
      return cmd_train(cohort_src, cohort_seed, set, kind, params, train_budget, train_seed, rankings, model_out);
    if (evaluate->parsed()) return cmd_evaluate(eval_flags);
    if (sota->parsed()) return cmd_compare_sota(cohort_src, cohort_seed, sota_models, sota_k, sota_seed, sota_out);
    if (ext->parsed())
      return cmd_external(datasets, ext_source, ext_cache, download, cohort_src, cohort_seed, s1_model, s2_model,
                          ext_out);
    if (expl->parsed()) return cmd_explain(expl_model, expl_input, cohort_src, cohort_seed, global, perms, expl_seed);
    if (serve->parsed()) return cmd_serve(serve_flags, serve_model, bind, port);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
