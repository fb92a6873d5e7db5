#include "solicit/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "solicit/util.h"
#include "test_support.h"

namespace solicit {
namespace {

using json = nlohmann::json;
using ::solicit::testing::TempDir;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result RunTool(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json ReadJson(const std::string& path) { return json::parse(ReadFile(path)); }

// One small population and its feature tables shared by the pipeline tests.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    pop_ = dir_->File("pop");
    const Result sim = RunTool({"simulate", "--out", pop_, "--population", "160",
                            "--days", "10", "--seed", "5"});
    ASSERT_EQ(sim.code, 0) << sim.err;
    train_csv_ = dir_->File("train.csv");
    cand_csv_ = dir_->File("cand.csv");
    ASSERT_EQ(RunTool({"featurize", "--corpus", pop_, "--out", train_csv_}).code, 0);
    ASSERT_EQ(RunTool({"featurize", "--corpus", pop_, "--out", cand_csv_, "--rows",
                   "candidates"})
                  .code,
              0);
    model_ = dir_->File("model.json");
    ASSERT_EQ(RunTool({"train", "--features", train_csv_, "--out", model_}).code, 0);
  }
  static void TearDownTestSuite() { delete dir_; }

  static TempDir* dir_;
  static std::string pop_, train_csv_, cand_csv_, model_;
};

TempDir* CliTest::dir_ = nullptr;
std::string CliTest::pop_, CliTest::train_csv_, CliTest::cand_csv_,
    CliTest::model_;

TEST(CliUsageTest, ExitCodes) {
  EXPECT_EQ(RunTool({}).code, kExitUsageError);
  EXPECT_EQ(RunTool({"bogus"}).code, kExitUsageError);
  EXPECT_EQ(RunTool({"--help"}).code, kExitOk);
  EXPECT_EQ(RunTool({"train", "--features", "x.csv"}).code, kExitUsageError);
  EXPECT_EQ(RunTool({"train", "--features", "/nonexistent/x.csv", "--out", "m.json"})
                .code,
            kExitDataError);
  TempDir dir;
  WriteFile(dir.File("bad.json"), R"({"populaton": 3})");
  const Result bad = RunTool({"simulate", "--out", dir.File("p"), "--sim-config",
                          dir.File("bad.json")});
  EXPECT_EQ(bad.code, kExitUsageError);
  EXPECT_NE(bad.err.find("populaton"), std::string::npos);
}

TEST(CliUsageTest, SeedFromEnvironment) {
  TempDir dir;
  ::setenv("SOLICIT_SEED", "77", 1);
  const Result r = RunTool({"simulate", "--out", dir.File("p"), "--population", "10",
                        "--days", "9"});
  ::unsetenv("SOLICIT_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadJson(dir.File("p/manifest.json"))["seed"], 77);
  EXPECT_EQ(ReadJson(dir.File("p/sim_config.json"))["seed"], 77);
}

TEST_F(CliTest, SimulateWritesManifest) {
  const json m = ReadJson(pop_ + "/manifest.json");
  EXPECT_EQ(m["subcommand"], "simulate");
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["flags"]["population"], "160");
  EXPECT_FALSE(m["outputs"].empty());
  EXPECT_TRUE(m.contains("wall_time_seconds"));
}

TEST_F(CliTest, TrainManifestRecordsWeights) {
  const json m = ReadJson(model_ + ".manifest.json");
  EXPECT_EQ(m["weights"]["positive"], 1.0);
  EXPECT_EQ(m["weights"]["negative"], 1.0);
  EXPECT_EQ(m["features"], 119);
  EXPECT_TRUE(m["inputs"].contains(train_csv_));

  const std::string svm = dir_->File("svm.json");
  ASSERT_EQ(RunTool({"train", "--features", train_csv_, "--out", svm, "--kind", "svm",
                 "--benefit", "5", "--cost", "1"})
                .code,
            0);
  EXPECT_EQ(ReadJson(svm + ".manifest.json")["weights"]["positive"], 4.0);
  EXPECT_EQ(ReadJson(svm)["kind"], "linear_svm");
  EXPECT_EQ(RunTool({"train", "--features", train_csv_, "--out", svm, "--benefit",
                 "1", "--cost", "2"})
                .code,
            kExitUsageError);
}

TEST_F(CliTest, AnalyzeWritesReportAndSubsets) {
  const std::string out = dir_->File("analysis");
  const Result r = RunTool({"analyze", "--features", train_csv_, "--out-dir", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadFile(out + "/significance.csv").rfind("feature,chi2,df,p,significant", 0),
            0u);
  const json subsets = ReadJson(out + "/subsets.json");
  EXPECT_EQ(subsets["all"].size(), 119u);
  EXPECT_EQ(subsets["top4"].size(), 4u);
  EXPECT_TRUE(std::filesystem::exists(out + "/subset_top4.txt"));
  EXPECT_TRUE(std::filesystem::exists(out + "/manifest.json"));
}

TEST_F(CliTest, EvalPrintsTable) {
  const std::string out = dir_->File("eval.json");
  const Result r = RunTool({"eval", "--features", train_csv_, "--out", out, "--subset",
                        "top4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean"), std::string::npos);
  EXPECT_EQ(ReadJson(out)["folds"].size(), 5u);
}

TEST_F(CliTest, RecommendHonoursMinimumFraction) {
  const std::string out = dir_->File("rec.json");
  const Result r = RunTool({"recommend", "--model", model_, "--training", train_csv_,
                        "--candidates", cand_csv_, "--out", out,
                        "--min-fraction", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json sel = ReadJson(out);
  EXPECT_GE(sel["selected_ids"].size() * 20, sel["candidate_count"].get<std::size_t>());
  EXPECT_EQ(sel["candidate_count"], 80);
  EXPECT_EQ(RunTool({"recommend", "--model", model_, "--training", train_csv_,
                 "--candidates", cand_csv_, "--out", out, "--min-fraction", "2"})
                .code,
            kExitUsageError);
}

TEST_F(CliTest, ExperimentSweeps) {
  const std::string out = dir_->File("exp.json");
  const Result r = RunTool({"experiment", "--population", pop_, "--out", out,
                        "--budget", "10", "--sweep", "interval", "--sweep",
                        "cost"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = ReadJson(out);
  ASSERT_EQ(report["interval_sweep"].size(), 4u);
  EXPECT_EQ(report["cost_sweep"].size(), 3u);
  EXPECT_EQ(report["arms"].size(), 4u);
  double previous = 2.0;
  for (const json& row : report["interval_sweep"]) {
    EXPECT_LE(row["train_rate"].get<double>(), previous);
    previous = row["train_rate"].get<double>();
  }
  EXPECT_EQ(report["interval_sweep"][3]["train_recall"], 1.0);

  const Result again = RunTool({"experiment", "--population", pop_, "--out",
                            dir_->File("exp2.json"), "--budget", "10",
                            "--sweep", "interval", "--sweep", "cost"});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(ReadFile(out), ReadFile(dir_->File("exp2.json")));

  EXPECT_EQ(RunTool({"experiment", "--population", pop_, "--out", out, "--budget",
                 "500"})
                .code,
            kExitUsageError);
  EXPECT_EQ(RunTool({"experiment", "--population", pop_, "--out", out, "--sweep",
                 "sideways"})
                .code,
            kExitUsageError);
}

TEST_F(CliTest, ServeRejectsBadModel) {
  WriteFile(dir_->File("broken.json"), "{}");
  EXPECT_EQ(RunTool({"serve", "--population", pop_, "--model",
                 dir_->File("broken.json")})
                .code,
            kExitDataError);
}

}  // namespace
}  // namespace solicit
