#include <gtest/gtest.h>

#include <cmath>

#include "ckd/cohort/cohort.hpp"
#include "ckd/cohort/discretize.hpp"
#include "ckd/cohort/encode.hpp"
#include "ckd/cohort/impute.hpp"
#include "ckd/cohort/raw_table.hpp"
#include "ckd/cohort/synthetic.hpp"
#include "ckd/common/error.hpp"
#include "ckd/common/rng.hpp"

using namespace ckd;

namespace {

const CohortSchema& schema() {
  static const CohortSchema s = CohortSchema::primary();
  return s;
}

const DiscretizationRule& rule(const std::string& feature) { return *schema().feature(feature).discretization; }

}  // namespace

TEST(Schema, PrimaryLayout) {
  EXPECT_EQ(schema().features().size(), 24u);
  const auto cols = schema().columns();
  EXPECT_EQ(cols.size(), 35u);
  EXPECT_NE(std::find(cols.begin(), cols.end(), "Age_18-30y"), cols.end());
  EXPECT_NE(std::find(cols.begin(), cols.end(), "Age_60+y"), cols.end());
  EXPECT_NE(std::find(cols.begin(), cols.end(), "Hypertension"), cols.end());
  EXPECT_EQ(std::find(cols.begin(), cols.end(), "Hypertension_Yes"), cols.end());
  const auto again = CohortSchema::primary();
  EXPECT_EQ(again.hash(), schema().hash());
}

TEST(Schema, JsonRoundTripKeepsHash) {
  const auto back = CohortSchema::from_json(schema().to_json());
  EXPECT_EQ(back.hash(), schema().hash());
}

TEST(Load, EmptyFileHasNoRows) {
  EXPECT_THROW(
      {
        try {
          parse_cohort("", schema());
        } catch (const ValidationError& e) {
          EXPECT_STREQ(e.what(), "no rows");
          throw;
        }
      },
      ValidationError);
}

TEST(Load, RejectsUnknownCategoryWithRowContext) {
  const std::string text = "Hypertension,Class\nYes,CKD\nMaybe,non-CKD\nNo,non-CKD\n";
  const auto res = parse_cohort(text, schema());
  EXPECT_EQ(res.cohort.size(), 2u);
  ASSERT_EQ(res.rejected.size(), 1u);
  EXPECT_EQ(res.rejected[0].line, 2u);
  EXPECT_EQ(res.rejected[0].column, "Hypertension");
  LoadOptions strict;
  strict.strict = true;
  EXPECT_THROW(parse_cohort(text, schema(), strict), ValidationError);
}

TEST(Load, MissingLabelColumn) { EXPECT_THROW(parse_cohort("Hypertension\nYes\n", schema()), ValidationError); }

TEST(Load, RoundTripThroughFile) {
  const auto c = synthesize_cohort(schema(), marginals_spec(schema(), 3));
  const auto path = std::filesystem::temp_directory_path() / "ckd_roundtrip.csv";
  write_cohort(c, path);
  const auto back = load_cohort(path, schema()).cohort;
  EXPECT_EQ(back.size(), c.size());
  EXPECT_EQ(back.labels(), c.labels());
  const auto a = encode_onehot(c);
  const auto b = encode_onehot(back);
  EXPECT_EQ(a.column_names, b.column_names);
  EXPECT_EQ(a.values.data(), b.values.data());
  EXPECT_EQ(a.schema_hash, b.schema_hash);
}

TEST(Impute, NoMissingIsIdentity) {
  const auto t = parse_raw_csv("a,b\n1,x\n2,y\n3,x\n");
  EXPECT_EQ(t.missing_count(), 0u);
  const auto out = impute(t);
  ASSERT_EQ(out.columns.size(), t.columns.size());
  for (std::size_t i = 0; i < t.columns.size(); ++i) EXPECT_TRUE(out.columns[i] == t.columns[i]);
}

TEST(Impute, CategoricalModeFill) {
  const auto t = parse_raw_csv("c\nyes\nyes\nno\n?\n");
  const auto out = impute(t);
  EXPECT_EQ(*out.column("c").text[3], "yes");
}

TEST(Impute, RegressionRecoversLinearRelation) {
  std::string text = "c1,c2\n";
  for (int i = 1; i <= 20; ++i) text += std::to_string(i) + "," + (i == 7 ? "?" : std::to_string(2 * i)) + "\n";
  const auto out = impute(parse_raw_csv(text));
  const double v = *out.column("c2").numbers[6];
  EXPECT_NEAR(v, 14.0, 0.05 * 14.0);
}

TEST(Discretize, TableBands) {
  EXPECT_EQ(discretize(31.0, "kg/m2", rule("BMI")), "Obese");
  EXPECT_EQ(discretize(18.5, "kg/m2", rule("BMI")), "Normal");
  EXPECT_EQ(discretize(18.49, "kg/m2", rule("BMI")), "Underweight");
  EXPECT_EQ(discretize(12.5, "g/dL", rule("Anemia"), "Male"), "Yes");
  EXPECT_EQ(discretize(12.5, "g/dL", rule("Anemia"), "Female"), "No");
  EXPECT_EQ(discretize(60.0, "years", rule("Age")), "50-60y");
  EXPECT_EQ(discretize(61.0, "years", rule("Age")), "60+y");
  EXPECT_EQ(discretize(30.9, "years", rule("Age")), "18-30y");
}

TEST(Discretize, Errors) {
  EXPECT_THROW(discretize(31.0, "lb/in2", rule("BMI")), ValidationError);
  EXPECT_THROW(discretize(12.0, "g/dL", rule("Anemia")), ValidationError);
  EXPECT_THROW(discretize(-1.0, "kg/m2", rule("BMI")), ValidationError);
  EXPECT_THROW(discretize(std::nan(""), "kg/m2", rule("BMI")), ValidationError);
}

TEST(Discretize, BandsPartitionTheLine) {
  Rng rng(11);
  for (const auto& f : schema().features()) {
    if (!f.discretization) continue;
    const auto& r = *f.discretization;
    for (int i = 0; i < 500; ++i) {
      const double v = rng.uniform(0, 400);
      std::optional<std::string_view> sex;
      if (!r.sex_specific.empty()) sex = i % 2 ? "Male" : "Female";
      const auto label = discretize(v, r.source_unit, r, sex);
      EXPECT_EQ(std::count(r.labels.begin(), r.labels.end(), label), 1) << f.name << " " << v;
    }
  }
}

TEST(Encode, CategoricalAndBinaryColumns) {
  EXPECT_EQ(schema().feature("Age").column_names().size(), 5u);
  EXPECT_EQ(schema().feature("Hypertension").column_names(), std::vector<std::string>{"Hypertension"});
  FeatureSpec a;
  a.name = "A";
  a.kind = FeatureKind::Categorical;
  a.categories = {"x", "y"};
  const CohortSchema toy({a}, "Class", "CKD", "non-CKD");
  const std::vector<FeatureMap> rows{{{"A", "x"}}, {{"A", "y"}}, {{"A", "x"}}};
  const std::vector<int> y{1, 0, 1};
  const auto m = encode_onehot(Cohort::from_maps(toy, rows, y));
  ASSERT_EQ(m.column_names, (std::vector<std::string>{"A_x", "A_y"}));
  EXPECT_EQ(m.values(0, 0), 1);
  EXPECT_EQ(m.values(1, 0), 0);
  EXPECT_EQ(m.values(2, 0), 1);
  EXPECT_EQ(m.values(0, 1), 0);
  EXPECT_EQ(m.values(1, 1), 1);
  EXPECT_EQ(m.values(2, 1), 0);
}

TEST(Encode, IndicatorsSumToOnePerCategoricalFeature) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = encode_onehot(synthesize_cohort(schema(), marginals_spec(schema(), seed)));
    for (const auto& f : schema().features()) {
      if (f.kind != FeatureKind::Categorical) continue;
      std::vector<int> idx;
      for (const auto& c : f.column_names()) idx.push_back(m.column_index(c));
      for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0;
        for (int i : idx) s += m.values(r, static_cast<std::size_t>(i));
        EXPECT_EQ(s, 1.0);
      }
    }
  }
}

TEST(Encode, RowRejectsUnknownAndMissing) {
  const std::vector<std::string> cols{"Hypertension", "Age_60+y"};
  EXPECT_THROW(encode_row(schema(), cols, {{"Hypertension", "Yes"}}), FieldError);
  try {
    encode_row(schema(), cols, {{"Hypertension", "Yes"}, {"Age", "70y"}});
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "Age");
    EXPECT_EQ(e.reason(), FieldError::Reason::UnknownCategory);
  }
  const auto x = encode_row(schema(), cols, {{"Hypertension", "Yes"}, {"Age", "60+y"}});
  EXPECT_EQ(x, (std::vector<double>{1, 1}));
}

TEST(Synthetic, MarginalCounts) {
  const auto c = synthesize_cohort(schema(), marginals_spec(schema(), 42));
  EXPECT_EQ(c.size(), 284u);
  EXPECT_EQ(c.count_positive(), 112u);
  EXPECT_EQ(c.count_negative(), 172u);
}

TEST(Synthetic, SameSeedIsByteIdentical) {
  const auto a = format_cohort(synthesize_cohort(schema(), marginals_spec(schema(), 42)));
  const auto b = format_cohort(synthesize_cohort(schema(), marginals_spec(schema(), 42)));
  EXPECT_EQ(a, b);
  const auto c = format_cohort(synthesize_cohort(schema(), marginals_spec(schema(), 43)));
  EXPECT_NE(a, c);
}

TEST(Synthetic, ConditionalPrevalenceConverges) {
  auto spec = marginals_spec(schema(), 5);
  spec.n_ckd = 10000;
  spec.n_nonckd = 10000;
  spec.p_ckd["Hypertension"] = {0.33, 0.67};
  spec.p_nonckd["Hypertension"] = {0.884, 0.116};
  const auto c = synthesize_cohort(schema(), spec);
  for (const auto& f : schema().features()) {
    const auto fi = *schema().feature_index(f.name);
    for (int cls : {0, 1}) {
      const auto& p = cls == 1 ? spec.p_ckd.at(f.name) : spec.p_nonckd.at(f.name);
      std::vector<double> counts(f.categories.size(), 0);
      double n = 0;
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.labels()[r] != cls) continue;
        counts[static_cast<std::size_t>(c.category(r, fi))] += 1;
        n += 1;
      }
      for (std::size_t k = 0; k < counts.size(); ++k) EXPECT_NEAR(counts[k] / n, p[k], 0.03) << f.name;
    }
  }
}
