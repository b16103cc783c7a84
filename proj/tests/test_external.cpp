#include <gtest/gtest.h>

#include <filesystem>

#include "ckd/cohort/encode.hpp"
#include "ckd/cohort/schema.hpp"
#include "ckd/cohort/synthetic.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/eval/metrics.hpp"
#include "ckd/external/cache.hpp"
#include "ckd/external/harmonize.hpp"
#include "ckd/external/validate.hpp"
#include "ckd/models/factory.hpp"
#include "ckd/models/trained_model.hpp"
#include "ckd/selection/catalog.hpp"
#include "test_util.hpp"

using namespace ckd;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const std::string& name) { return fs::path(CKD_SOURCE_DIR) / "tests" / "fixtures" / name; }

const CohortSchema& schema() {
  static const CohortSchema s = CohortSchema::primary();
  return s;
}

RawTable source_table(DatasetId id) {
  const auto& map = builtin_map(id);
  const std::string file = id == DatasetId::TH ? "th.csv" : id == DatasetId::UCI2015 ? "uci2015.zip" : "uci2023.zip";
  return load_source(fixture(file), map);
}

HarmonizeResult harmonized(DatasetId id) { return harmonize(source_table(id), builtin_map(id), schema()); }

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("ckd-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

const TrainedModel& synthetic_model(const std::vector<std::string>& columns, const std::string& kind) {
  static std::map<std::string, TrainedModel> cache;
  const auto key = kind + std::to_string(columns.size());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const auto data = encode_onehot(synthesize_cohort(schema(), marginals_spec(schema(), 42)));
  return cache.emplace(key, train(make_classifier(kind), data, "synthetic", columns)).first->second;
}

}  // namespace

TEST(Zip, MembersStoredDeflatedAndNested) {
  const auto a = read_text_file(fixture("uci2015.zip"));
  EXPECT_TRUE(is_zip(a));
  EXPECT_FALSE(is_zip("age,class\n"));
  const auto members = zip_members(a);
  ASSERT_EQ(members.size(), 2u);
  EXPECT_EQ(members[0], "Chronic_Kidney_Disease/chronic_kidney_disease_full.arff");
  EXPECT_EQ(zip_extract(a, "chronic_kidney_disease.info.txt"), "fixture\n");
  const auto arff = zip_extract(a, "chronic_kidney_disease_full.arff");
  EXPECT_EQ(arff.rfind("@relation", 0), 0u);
  const auto nested = zip_extract(read_text_file(fixture("uci2023.zip")), "ckd-dataset-v2.csv");
  EXPECT_EQ(nested.rfind("bp (Diastolic)", 0), 0u);
  EXPECT_THROW(zip_extract(a, "missing.csv"), ValidationError);
  EXPECT_THROW(zip_members("PK\x03\x04 truncated"), ValidationError);
}

TEST(Harmonize, MapsValidateAndRoundTrip) {
  for (auto id : kAllDatasets) {
    const auto& m = builtin_map(id);
    EXPECT_NO_THROW(m.validate(schema()));
    const auto back = HarmonizationMap::from_json(m.to_json());
    EXPECT_EQ(back.to_json(), m.to_json());
    EXPECT_EQ(parse_dataset(dataset_key(id)), id);
    EXPECT_EQ(parse_dataset(dataset_name(id)), id);
  }
  EXPECT_EQ(dataset_name(DatasetId::UCI2015), "UCI-2015");
  EXPECT_THROW(parse_dataset("MIMIC"), ValidationError);
}

TEST(Harmonize, Uci2015Fixture) {
  const auto r = harmonized(DatasetId::UCI2015);
  EXPECT_EQ(r.cohort.size(), 60u);
  EXPECT_EQ(r.cohort.count_positive(), 36u);
  EXPECT_GT(r.imputed_cells, 0u);
  EXPECT_TRUE(r.cohort.has_feature("RBC"));
  EXPECT_FALSE(r.cohort.has_feature("BMI"));
  EXPECT_EQ(r.cohort.provenance().dataset_id, "UCI2015");
  const auto m = encode_onehot(r.cohort);
  for (const auto& c : builtin_map(DatasetId::UCI2015).sets.at("Common")) EXPECT_GE(m.column_index(c), 0) << c;
}

TEST(Harmonize, Uci2023FixtureSkipsMetadataRows) {
  const auto raw = source_table(DatasetId::UCI2023);
  EXPECT_EQ(raw.rows(), 50u);
  const auto r = harmonize(raw, builtin_map(DatasetId::UCI2023), schema());
  EXPECT_EQ(r.cohort.size(), 50u);
  EXPECT_EQ(r.cohort.count_positive(), 30u);
  const auto& common = builtin_map(DatasetId::UCI2023).sets.at("Common");
  EXPECT_EQ(common, (std::vector<std::string>{"Hypertension", "Age_60+y", "Diabetes", "Anemia", "RBC", "Age_31-39y"}));
  const auto m = encode_onehot(r.cohort);
  for (const auto& c : common) EXPECT_GE(m.column_index(c), 0) << c;
}

TEST(Harmonize, ThFixtureKeepsPositivesAndConvertsUnits) {
  const auto r = harmonized(DatasetId::TH);
  EXPECT_EQ(r.cohort.size(), 8u);
  EXPECT_EQ(r.cohort.count_negative(), 0u);
  EXPECT_EQ(r.dropped_negative, 40u);
  const auto& map = builtin_map(DatasetId::TH);
  EXPECT_EQ(map.unavailable.at("S1subset"), "None common pathology tests");
  EXPECT_FALSE(map.sets.contains("S1subset"));
  EXPECT_TRUE(r.cohort.has_feature("Hypercholesterolemia"));
  EXPECT_FALSE(r.cohort.has_feature("Anemia"));
}

TEST(Harmonize, UnitConversionInvertsFactor) {
  auto map = builtin_map(DatasetId::TH);
  RawTable raw;
  auto col = [](std::string name, std::vector<double> v) {
    RawColumn c;
    c.name = std::move(name);
    c.numeric = true;
    c.numbers.assign(v.begin(), v.end());
    return c;
  };
  // 5.2 mmol/L is about 201 mg/dL, just over a 200 mg/dL cut; 5.1 is below.
  raw.columns = {col("Sex", {1, 0}), col("AgeBaseline", {45, 65}), col("HistoryHTN", {1, 0}),
                 col("HistoryDiabetes", {0, 1}), col("HistoryCHD", {0, 0}), col("HistorySmoking", {1, 0}),
                 col("BMIBaseline", {24, 31}), col("CholesterolBaseline", {5.2, 5.1}),
                 col("TriglyceridesBaseline", {1.0, 2.0}), col("EventCKD35", {1, 1})};
  const auto r = harmonize(raw, map, schema());
  const auto row0 = r.cohort.row_map(0);
  const auto row1 = r.cohort.row_map(1);
  EXPECT_EQ(row0.at("Age"), "40-49y");
  EXPECT_EQ(row1.at("BMI"), "Obese");
  EXPECT_EQ(row0.at("Gender"), "Male");
  EXPECT_EQ(row0.at("Hypercholesterolemia"), "Yes");
  EXPECT_EQ(row1.at("Hypercholesterolemia"), "No");
  EXPECT_EQ(row0.at("Hypertriglyceridemia"), "No");
  EXPECT_EQ(row1.at("Hypertriglyceridemia"), "Yes");
}

TEST(Harmonize, ErrorsNameTheProblem) {
  auto map = builtin_map(DatasetId::TH);
  map.features[1].unit = "months";
  try {
    map.validate(schema());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unit mismatch for Age"), std::string::npos);
  }
  auto empty = builtin_map(DatasetId::UCI2015);
  empty.sets["S1subset"].clear();
  try {
    empty.validate(schema());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("constructed set S1subset is empty"), std::string::npos);
  }
  auto foreign = builtin_map(DatasetId::UCI2015);
  foreign.sets["Common"].push_back("BMI_Obese");
  EXPECT_THROW(foreign.validate(schema()), ValidationError);
  auto none = builtin_map(DatasetId::UCI2015);
  none.features.clear();
  EXPECT_THROW(none.validate(schema()), ValidationError);
  auto raw = source_table(DatasetId::UCI2015);
  raw.column("htn").text[0] = "maybe";
  try {
    harmonize(raw, builtin_map(DatasetId::UCI2015), schema());
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "Hypertension");
  }
}

TEST(Cache, OfflineImportAndTamper) {
  TempDir tmp;
  DatasetCache cache(tmp.path());
  const auto& map = builtin_map(DatasetId::UCI2015);
  EXPECT_FALSE(cache.contains(map));
  try {
    cache.ensure(map, false);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("network access is disabled"), std::string::npos);
  }
  const auto p = cache.import(map, fixture("uci2015.zip"));
  EXPECT_TRUE(cache.contains(map));
  EXPECT_EQ(cache.ensure(map, false), p);
  EXPECT_EQ(cache.digest(map), sha256_file(fixture("uci2015.zip")));
  EXPECT_EQ(load_source(p, map).rows(), 60u);
  write_text_file(p, "tampered");
  EXPECT_FALSE(cache.contains(map));
  auto pinned = map;
  pinned.sha256 = std::string(64, '0');
  EXPECT_THROW(cache.import(pinned, fixture("uci2015.zip")), ValidationError);
}

TEST(ExternalEvaluate, TwoClassMatchesFoldMetrics) {
  const auto r = harmonized(DatasetId::UCI2023);
  const auto& cols = builtin_map(DatasetId::UCI2023).sets.at("S1subset");
  const auto& model = synthetic_model(cols, "DT");
  const auto rep = external_evaluate(model, r.cohort, "UCI-2023", "S1 subset");
  const auto data = encode_onehot(r.cohort);
  const auto p = model.predict_proba(data.select_columns(cols));
  std::vector<int> pred;
  for (double v : p) pred.push_back(v >= model.threshold() ? 1 : 0);
  const auto fm = fold_metrics(0, data.labels, pred, p);
  EXPECT_EQ(rep.counts, fm.counts);
  for (auto m : kAllMetrics) {
    ASSERT_TRUE(rep.get(m));
    EXPECT_DOUBLE_EQ(*rep.get(m), fm.get(m));
  }
  EXPECT_EQ(rep.n, 50u);
  EXPECT_GE(*rep.get(Metric::Sensitivity), 0.7);
}

TEST(ExternalEvaluate, AllPositiveCohortReportsSensitivityOnly) {
  const auto r = harmonized(DatasetId::TH);
  const auto& cols = builtin_map(DatasetId::TH).sets.at("S2subset");
  const auto rep = external_evaluate(synthetic_model(cols, "CB"), r.cohort, "TH", "S2 subset");
  EXPECT_TRUE(rep.single_class());
  ASSERT_TRUE(rep.get(Metric::Sensitivity));
  for (auto m : kAllMetrics)
    if (m != Metric::Sensitivity) EXPECT_FALSE(rep.get(m));
  const auto j = rep.to_json();
  EXPECT_TRUE(j.at("metrics").at("balanced_accuracy").is_null());
  const auto table = format_external_table({rep});
  EXPECT_NE(table.find("--"), std::string::npos);
}

TEST(ExternalEvaluate, AllCkdToyScoresSensitivityOne) {
  std::vector<FeatureMap> rows(5, FeatureMap{{"Hypertension", "Yes"}, {"Age", "60+y"}});
  const std::vector<int> y(5, 1);
  const auto cohort = Cohort::from_maps(schema(), rows, y);
  const std::vector<std::string> cols{"Hypertension", "Age_60+y"};
  const auto rep = external_evaluate(synthetic_model(cols, "DT"), cohort, "toy", "toy");
  EXPECT_DOUBLE_EQ(*rep.get(Metric::Sensitivity), 1.0);
  EXPECT_FALSE(rep.get(Metric::AucRoc));
  std::vector<int> none(5, 0);
  EXPECT_THROW(external_evaluate(synthetic_model(cols, "DT"), Cohort::from_maps(schema(), rows, none), "toy", "toy"),
               ValidationError);
}

TEST(ExternalEvaluate, FeatureSetMismatchIsRefused) {
  const auto r = harmonized(DatasetId::TH);
  const auto& model = synthetic_model(kBestS1, "DT");
  try {
    external_evaluate(model, r.cohort, "TH", "BestS1");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("feature-set mismatch"), std::string::npos);
  }
}
