#include "solicit/experiment.h"

#include <gtest/gtest.h>

#include "solicit/error.h"
#include "solicit/lexicon.h"
#include "test_support.h"

namespace solicit {
namespace {

using Span = std::pair<std::size_t, std::size_t>;

using ::solicit::testing::DataPath;
using ::solicit::testing::TempDir;

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SimConfig config;
    config.population = 240;
    config.days = 12;
    config.seed = 4;
    const Vocabulary vocabulary = LoadVocabulary(DataPath("vocabulary.json"));
    population_ = new Population(GeneratePopulation(config, vocabulary));
    bench_ = new Benchmark(MakeBenchmark(*population_));
    const CategoryLexicon lexicon = LoadLexicon(DataPath("lexicon.json"));
    extractor_ = new FeatureExtractor(
        lexicon, LoadTraitCoefficients(DataPath("coefficients.json"), lexicon));
  }
  static void TearDownTestSuite() {
    delete population_;
    delete bench_;
    delete extractor_;
  }

  static Population* population_;
  static Benchmark* bench_;
  static FeatureExtractor* extractor_;
};

Population* ExperimentTest::population_ = nullptr;
Benchmark* ExperimentTest::bench_ = nullptr;
FeatureExtractor* ExperimentTest::extractor_ = nullptr;

TEST_F(ExperimentTest, ZeroBudgetGivesEmptyArms) {
  ExperimentOptions options;
  options.budget = 0;
  const ExperimentReport r = RunExperiment(*bench_, *extractor_, options);
  ASSERT_EQ(r.arms.size(), 4u);
  for (const ArmResult& arm : r.arms) {
    EXPECT_TRUE(arm.empty);
    EXPECT_EQ(arm.sent, 0u);
    EXPECT_EQ(arm.rate, 0.0);
  }
}

TEST_F(ExperimentTest, TooLargeBudgetIsAConfigError) {
  ExperimentOptions options;
  options.budget = 31;  // 4 * 31 > 120 candidates
  EXPECT_THROW(RunExperiment(*bench_, *extractor_, options), ConfigError);
}

TEST_F(ExperimentTest, ArmsAreConsistentAndDeterministic) {
  ExperimentOptions options;
  options.budget = 20;
  options.interval_sizes = {0.25, 0.5, 0.75, 1.0};
  options.cost_ratios = {2, 10};
  const ExperimentReport a = RunExperiment(*bench_, *extractor_, options);
  const ExperimentReport b = RunExperiment(*bench_, *extractor_, options);
  EXPECT_EQ(a.ToJson(), b.ToJson());
  EXPECT_EQ(a.candidates, 120u);
  EXPECT_EQ(a.training_rows, 120u * 3u);
  for (const char* name : {"engine", "random", "topk"}) {
    const ArmResult& arm = a.Arm(name);
    EXPECT_EQ(arm.sent, 20u) << name;
    EXPECT_LE(arm.responded, arm.sent);
    EXPECT_GE(arm.rate, 0.0);
    EXPECT_LE(arm.rate, 1.0);
  }
  EXPECT_LE(a.Arm("binary").sent, 20u);
  EXPECT_THROW(a.Arm("nope"), ContractError);
  EXPECT_EQ(a.cost_sweep.size(), 2u);

  ASSERT_EQ(a.interval_sweep.size(), 4u);
  for (std::size_t i = 1; i < a.interval_sweep.size(); ++i) {
    EXPECT_LE(a.interval_sweep[i].train.rate, a.interval_sweep[i - 1].train.rate);
    EXPECT_GE(a.interval_sweep[i].train_recall,
              a.interval_sweep[i - 1].train_recall);
  }
  const IntervalSweepRow& full = a.interval_sweep.back();
  EXPECT_DOUBLE_EQ(full.train_recall, 1.0);
  EXPECT_DOUBLE_EQ(full.train.rate, static_cast<double>(a.training_positives) /
                                        static_cast<double>(a.training_rows));
  EXPECT_DOUBLE_EQ(full.test_recall, 1.0);

  options.seed = 43;
  EXPECT_NE(RunExperiment(*bench_, *extractor_, options).ToJson(), a.ToJson());
}

TEST_F(ExperimentTest, LoadedBenchmarkMatchesInMemory) {
  TempDir dir;
  WritePopulation(*population_, dir.path());
  const Benchmark loaded = LoadBenchmark(dir.path());
  ExperimentOptions options;
  options.budget = 10;
  EXPECT_EQ(RunExperiment(loaded, *extractor_, options).ToJson(),
            RunExperiment(*bench_, *extractor_, options).ToJson());
}

TEST(FitToSizeTest, ShrinksAndGrows) {
  EXPECT_EQ(FitToSize(3, 10, 20, 4), Span(3, 6));
  EXPECT_EQ(FitToSize(3, 4, 20, 5), Span(3, 7));
  EXPECT_EQ(FitToSize(17, 19, 20, 6), Span(15, 20));
  EXPECT_EQ(FitToSize(1, 1, 5, 5), Span(1, 5));
  EXPECT_THROW(FitToSize(1, 2, 5, 6), ContractError);
  EXPECT_THROW(FitToSize(1, 2, 5, 0), ContractError);
}

}  // namespace
}  // namespace solicit
