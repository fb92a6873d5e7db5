#include "solicit/analysis.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "solicit/error.h"
#include "solicit/features.h"
#include "solicit/lexicon.h"
#include "test_support.h"

namespace solicit {
namespace {

using ::solicit::testing::DataPath;
using ::solicit::testing::Gen;

std::vector<std::string> FullFeatureNames() {
  const CategoryLexicon lexicon = LoadLexicon(DataPath("lexicon.json"));
  FeatureExtractor extractor(
      lexicon, LoadTraitCoefficients(DataPath("coefficients.json"), lexicon));
  return extractor.names();
}

// Columns are independent noise except `planted`, which shift with the label.
LabeledDataset SyntheticDataset(const std::vector<std::string>& names,
                                const std::vector<std::size_t>& planted,
                                std::size_t rows, std::uint64_t seed) {
  Gen gen(seed);
  LabeledDataset d;
  d.feature_names = names;
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = gen.Coin() ? 1 : 0;
    d.labels.push_back(y);
    d.weights.push_back(1.0);
    d.ids.push_back(std::to_string(i));
    for (std::size_t c = 0; c < names.size(); ++c) {
      const bool dependent =
          std::find(planted.begin(), planted.end(), c) != planted.end();
      d.values.push_back(gen.Real(0, 1) + (dependent ? 0.6 * y : 0.0));
      d.missing.push_back(0);
    }
  }
  return d;
}

TEST(PearsonStatisticTest, ReferenceTable) {
  EXPECT_NEAR(PearsonStatistic({{10, 20}, {20, 10}}), 20.0 / 3.0, 1e-12);
}

TEST(ChiSquareFeatureTest, ReferenceTwoByTwo) {
  std::vector<double> values;
  std::vector<int> labels;
  auto add = [&](double v, int y, int count) {
    for (int i = 0; i < count; ++i) {
      values.push_back(v);
      labels.push_back(y);
    }
  };
  add(0.0, 1, 10);
  add(0.0, 0, 20);
  add(1.0, 1, 20);
  add(1.0, 0, 10);
  const std::vector<std::uint8_t> missing(values.size(), 0);
  const ChiSquareResult r = ChiSquareFeature(values, missing, labels, 2);
  EXPECT_NEAR(r.statistic, 6.6667, 1e-4);
  EXPECT_EQ(r.df, 1);
  EXPECT_NEAR(r.p_value, 0.009823274507519235, 1e-9);
}

TEST(ChiSquareFeatureTest, SeparatingFeatureGivesSampleSize) {
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    labels.push_back(i % 2);
    values.push_back(i % 2);
  }
  const std::vector<std::uint8_t> missing(values.size(), 0);
  EXPECT_NEAR(ChiSquareFeature(values, missing, labels).statistic, 40.0, 1e-9);
}

TEST(ChiSquareFeatureTest, ConstantIsDegenerateAndMaskedFormsABin) {
  const std::vector<int> labels = {1, 0, 1, 0, 1, 0};
  const std::vector<double> values(6, 3.0);
  std::vector<std::uint8_t> missing(6, 0);
  const ChiSquareResult constant = ChiSquareFeature(values, missing, labels);
  EXPECT_TRUE(constant.degenerate);
  EXPECT_EQ(constant.p_value, 1.0);

  missing = {1, 1, 0, 0, 0, 0};
  const ChiSquareResult masked = ChiSquareFeature(values, missing, labels);
  EXPECT_FALSE(masked.degenerate);
  EXPECT_EQ(masked.df, 1);
  EXPECT_THROW(ChiSquareFeature(values, missing, std::vector<int>(6, 1)),
               ContractError);
}

TEST(ChiSquareFeatureTest, InvariantUnderMonotoneTransform) {
  Gen gen(3);
  for (int round = 0; round < 50; ++round) {
    const int n = gen.Int(10, 150);
    std::vector<double> x(n), tx(n);
    std::vector<int> y(n);
    std::vector<std::uint8_t> missing(n, 0);
    for (int i = 0; i < n; ++i) {
      x[i] = gen.Int(0, 30) / 7.0 - 2.0;
      tx[i] = std::exp(3.0 * x[i]) + 5.0;
      y[i] = gen.Coin() ? 1 : 0;
      missing[i] = gen.Coin(0.1) ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    const int bins = gen.Int(2, 6);
    const ChiSquareResult a = ChiSquareFeature(x, missing, y, bins);
    const ChiSquareResult b = ChiSquareFeature(tx, missing, y, bins);
    EXPECT_EQ(a.degenerate, b.degenerate);
    EXPECT_EQ(a.df, b.df);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-9);
  }
}

// Under independence the p-value is close to uniform (Kolmogorov-Smirnov at
// the 1% level).
TEST(ChiSquareFeatureTest, NullPValuesAreUniform) {
  Gen gen(11);
  std::vector<double> ps;
  for (int round = 0; round < 300; ++round) {
    std::vector<double> x(400);
    std::vector<int> y(400);
    for (int i = 0; i < 400; ++i) {
      x[i] = gen.Real(0, 1);
      y[i] = gen.Coin() ? 1 : 0;
    }
    const std::vector<std::uint8_t> missing(400, 0);
    ps.push_back(ChiSquareFeature(x, missing, y).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double d = 0.0;
  const double n = static_cast<double>(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    d = std::max({d, (i + 1) / n - ps[i], ps[i] - i / n});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(n));
}

TEST(QuantileCutsTest, DedupesAndFollowsRankRule) {
  EXPECT_EQ(QuantileCuts({1, 2, 3, 4, 5, 6, 7, 8}, 4),
            (std::vector<double>{2, 4, 6}));
  EXPECT_EQ(QuantileCuts({1, 1, 1, 1, 2}, 4), (std::vector<double>{1}));
}

TEST(SignificanceTest, ThresholdAndPlantedFeatures) {
  const std::vector<std::string> names = FullFeatureNames();
  ASSERT_EQ(names.size(), 119u);
  const std::vector<std::size_t> planted = {3, 20, 57, 90, 116};
  std::vector<std::size_t> retained;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SignificanceReport report =
        AnalyzeSignificance(SyntheticDataset(names, planted, 600, seed));
    EXPECT_EQ(report.tested, 119u);
    EXPECT_NEAR(report.threshold, 4.2017e-4, 1e-8);
    std::size_t kept = 0;
    for (std::size_t c = 0; c < names.size(); ++c) {
      const bool is_planted =
          std::find(planted.begin(), planted.end(), c) != planted.end();
      if (is_planted) {
        EXPECT_TRUE(report.features[c].significant) << names[c];
      } else if (!report.features[c].significant) {
        ++kept;
      }
      EXPECT_EQ(report.features[c].significant,
                report.features[c].test.p_value < report.threshold);
    }
    retained.push_back(kept);
    EXPECT_FALSE(report.no_rejections);
    EXPECT_GE(report.fdr, 0.0);
    EXPECT_LE(report.fdr, 1.0);
  }
  std::nth_element(retained.begin(), retained.begin() + 10, retained.end());
  EXPECT_GE(retained[10], 110u);
}

TEST(SignificanceTest, NoRejectionsReportsZeroFdr) {
  const SignificanceReport report = AnalyzeSignificance(
      SyntheticDataset({"a", "b", "c"}, {}, 60, 4), 1e-12);
  EXPECT_TRUE(report.no_rejections);
  EXPECT_EQ(report.fdr, 0.0);
  EXPECT_TRUE(report.Significant().empty());
}

TEST(SignificanceTest, RaisingAlphaNeverShrinksTheSet) {
  Gen gen(8);
  std::vector<std::string> names;
  for (int c = 0; c < 30; ++c) names.push_back("f" + std::to_string(c));
  for (int round = 0; round < 10; ++round) {
    const LabeledDataset d =
        SyntheticDataset(names, {1, 7}, gen.Int(40, 200), gen.engine()());
    std::vector<std::string> previous;
    for (double alpha : {1e-6, 1e-4, 0.01, 0.05, 0.2, 0.9}) {
      const std::vector<std::string> current =
          AnalyzeSignificance(d, alpha).Significant();
      for (const std::string& f : previous) {
        EXPECT_NE(std::find(current.begin(), current.end(), f), current.end());
      }
      previous = current;
    }
  }
}

TEST(SignificanceTest, ExportsCsvAndJson) {
  const SignificanceReport report =
      AnalyzeSignificance(SyntheticDataset({"a", "b"}, {0}, 200, 2));
  const std::string csv = report.ToCsv();
  EXPECT_EQ(csv.rfind("feature,chi2,df,p,significant\n", 0), 0u);
  EXPECT_NE(report.ToJson().find("\"bonferroni_threshold\""), std::string::npos);
}

TEST(BuildSubsetTest, NamedSubsets) {
  const std::vector<std::string> names = FullFeatureNames();
  const SignificanceReport report =
      AnalyzeSignificance(SyntheticDataset(names, {3, 20, 57, 90, 116}, 600, 1));
  EXPECT_EQ(BuildSubset(subsets::kAll, report, names).size(), 119u);
  EXPECT_EQ(BuildSubset(subsets::kTop4, report, names), Top4Features());
  EXPECT_EQ(BuildSubset(subsets::kCommonSignificant, report, names),
            CommonSignificantFeatures());
  EXPECT_EQ(BuildSubset(subsets::kSignificant, report, names),
            report.Significant());
  // Fewer than ten rejections.
  EXPECT_THROW(BuildSubset(subsets::kTop10Significant, report, names),
               ContractError);
  EXPECT_THROW(BuildSubset("bogus", report, names), ConfigError);
  EXPECT_THROW(BuildSubset(subsets::kTop4, report, {"a", "b"}), ConfigError);
}

TEST(BuildSubsetTest, TopTenTakesSmallestPValues) {
  std::vector<std::string> names;
  std::vector<std::size_t> planted;
  for (std::size_t c = 0; c < 14; ++c) {
    names.push_back("f" + std::to_string(c));
    if (c < 12) planted.push_back(c);
  }
  const SignificanceReport report =
      AnalyzeSignificance(SyntheticDataset(names, planted, 500, 6));
  const std::vector<std::string> top =
      BuildSubset(subsets::kTop10Significant, report, names);
  ASSERT_EQ(top.size(), 10u);
  double worst_in = 0.0;
  for (const auto& f : report.features) {
    if (std::find(top.begin(), top.end(), f.name) != top.end()) {
      EXPECT_TRUE(f.significant);
      worst_in = std::max(worst_in, f.test.p_value);
    }
  }
  for (const auto& f : report.features) {
    if (f.significant &&
        std::find(top.begin(), top.end(), f.name) == top.end()) {
      EXPECT_GE(f.test.p_value, worst_in);
    }
  }
}

}  // namespace
}  // namespace solicit
