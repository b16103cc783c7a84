#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ckd/app/bundle.hpp"
#include "ckd/app/config.hpp"
#include "ckd/clinical/tools.hpp"
#include "ckd/cohort/encode.hpp"
#include "ckd/eval/report.hpp"
#include "ckd/external/harmonize.hpp"
#include "ckd/external/validate.hpp"
#include "ckd/models/trained_model.hpp"
#include "ckd/selection/catalog.hpp"

namespace ckd {

using ProgressFn = std::function<void(const std::string&)>;

struct PipelineResult {
  ResultsBundle bundle;
  std::vector<FeatureRanking> rankings;
  std::vector<EvaluationReport> reports;
  // Best model of each evaluated feature set, refit on the whole cohort.
  std::map<std::string, TrainedModel> best_models;
  std::vector<ToolEvaluation> tools;
  std::vector<ExternalReport> external;
};

Cohort load_training_cohort(const PipelineConfig& config, const CohortSchema& schema);

// Selections replayed from the bundled file or rerun on the cohort.
std::vector<FeatureRanking> pipeline_rankings(const PipelineConfig& config, const EncodedMatrix& data,
                                              const CohortSchema& schema);

// Tunes every classifier on `columns`, then cross-validates the tuned spec.
// Tuning logs are returned per classifier when `logs` is given.
EvaluationReport evaluate_feature_set(const std::string& name, const std::vector<std::string>& columns,
                                      const EncodedMatrix& data, const PipelineConfig& config,
                                      std::map<std::string, TuneResult>* tuned = nullptr,
                                      const ProgressFn& progress = {});

// Models for one external dataset's constructed sets, trained on `training`.
// The S2 subset uses `s2_spec`; Common and the S1 subset use `s1_spec`.
std::vector<ExternalReport> validate_external(const HarmonizationMap& map, const Cohort& external,
                                              const EncodedMatrix& training, const ModelSpec& s1_spec,
                                              const ModelSpec& s2_spec);

// Runs selection, tuning, evaluation, clinical comparison and external
// validation. Feature sets and classifiers are checked before any training.
// Errors carry the failing stage in their message.
PipelineResult run_pipeline(const PipelineConfig& config, const ProgressFn& progress = {});

}  // namespace ckd
