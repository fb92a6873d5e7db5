#include "solicit/features.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "solicit/error.h"
#include "test_support.h"

namespace solicit {
namespace {

namespace fn = feature_names;
using ::solicit::testing::DataPath;
using ::solicit::testing::Gen;
using ::solicit::testing::TempDir;

// Owns posts and exposes them as an ascending timeline.
class TimelineBuilder {
 public:
  void Add(Timestamp t, const std::string& text, bool retweet = false) {
    auto p = std::make_unique<PostRecord>();
    p->post_id = "p" + std::to_string(posts_.size());
    p->author_id = "u";
    p->timestamp = t;
    p->text = text;
    p->is_retweet = retweet;
    posts_.push_back(std::move(p));
  }
  Timeline Get() {
    ptrs_.clear();
    for (const auto& p : posts_) ptrs_.push_back(p.get());
    std::stable_sort(ptrs_.begin(), ptrs_.end(),
                     [](const PostRecord* a, const PostRecord* b) {
                       return a->timestamp < b->timestamp;
                     });
    return ptrs_;
  }

 private:
  std::vector<std::unique_ptr<PostRecord>> posts_;
  std::vector<const PostRecord*> ptrs_;
};

constexpr Timestamp kMonday = 1338768000;  // 2012-06-04 00:00 UTC

TEST(ResponsivenessTest, ArithmeticExample) {
  InteractionSummary s;
  s.direct_questions_received = 6;
  s.responses_to_direct = 3;
  s.response_latencies = {120, 240, 240, 600};
  s.indirect_questions_exposed = 4;
  s.responses_to_indirect = 1;
  const FeatureBlock b = ResponsivenessFeatures(s);
  ASSERT_EQ(b.size(), 7u);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kMeanResponseTime), 300);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kMedianResponseTime), 240);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kModeResponseTime), 240);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kMaxResponseTime), 600);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kMinResponseTime), 120);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kPastResponseRate), 0.5);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kProactiveness), 0.25);
}

TEST(ResponsivenessTest, EmptyAndSingleton) {
  const FeatureBlock empty = ResponsivenessFeatures({});
  EXPECT_EQ(std::count(empty.missing.begin(), empty.missing.end(), true), 7);
  InteractionSummary one;
  one.direct_questions_received = 1;
  one.responses_to_direct = 1;
  one.response_latencies = {60};
  const FeatureBlock b = ResponsivenessFeatures(one);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(b.values[i], 60);
}

TEST(ResponsivenessTest, ModeTiesGoToSmallestMinute) {
  InteractionSummary s;
  s.direct_questions_received = 4;
  s.responses_to_direct = 4;
  s.response_latencies = {300, 60, 310, 70};
  EXPECT_DOUBLE_EQ(*ResponsivenessFeatures(s).Get(fn::kModeResponseTime), 60);
}

// Property: min <= median <= max and mean within [min, max].
TEST(ResponsivenessTest, RandomOrderStatistics) {
  Gen gen(3);
  for (int round = 0; round < 200; ++round) {
    InteractionSummary s;
    const int n = gen.Int(1, 20);
    s.direct_questions_received = n + gen.Int(0, 5);
    s.responses_to_direct = n;
    for (int i = 0; i < n; ++i) s.response_latencies.push_back(gen.Int(1, 100000));
    const FeatureBlock b = ResponsivenessFeatures(s);
    const double mn = *b.Get(fn::kMinResponseTime);
    const double mx = *b.Get(fn::kMaxResponseTime);
    EXPECT_LE(mn, *b.Get(fn::kMedianResponseTime));
    EXPECT_LE(*b.Get(fn::kMedianResponseTime), mx);
    EXPECT_LE(mn, *b.Get(fn::kMeanResponseTime) + 1e-9);
    EXPECT_LE(*b.Get(fn::kMeanResponseTime), mx + 1e-9);
    const double rate = *b.Get(fn::kPastResponseRate);
    EXPECT_GE(rate, 0.0);
    EXPECT_LE(rate, 1.0);
  }
}

TEST(ProfileSocialWordsTest, Examples) {
  const auto lex = CategoryLexicon::FromJsonText(
      R"({"social": ["talk*", "tweet*", "communicat*"]})");
  EXPECT_EQ(ProfileSocialWords("talking, tweeting, coffee", lex), 2);
  EXPECT_EQ(ProfileSocialWords("", lex), 0);
  EXPECT_EQ(ProfileSocialWords("coffee and cake", lex), 0);
  const auto other = CategoryLexicon::FromJsonText(R"({"food": ["cake"]})");
  EXPECT_THROW(ProfileSocialWords("x", other), ConfigError);
}

TEST(LiwcScoresTest, FractionOfTokensAndRetweetExclusion) {
  const auto lex = CategoryLexicon::FromJsonText(R"({"social": ["friend"]})");
  TimelineBuilder tl;
  // 10 posts of 5 tokens, one friend per two posts: 5 of 50.
  for (int i = 0; i < 10; ++i) {
    tl.Add(i, i % 2 == 0 ? "friend aa bb cc dd" : "ee ff gg hh ii");
  }
  EXPECT_DOUBLE_EQ(*LiwcScores(tl.Get(), lex).Get("social"), 0.1);
  tl.Add(100, "friend friend friend", true);
  EXPECT_DOUBLE_EQ(*LiwcScores(tl.Get(), lex).Get("social"), 0.1);

  TimelineBuilder only_rt;
  only_rt.Add(1, "friend", true);
  EXPECT_FALSE(LiwcScores(only_rt.Get(), lex).Get("social").has_value());
}

TEST(Big5ScoresTest, WeightedSum) {
  const auto lex =
      CategoryLexicon::FromJsonText(R"({"social": ["a"], "posemo": ["b"]})");
  const auto traits = TraitCoefficients::FromJsonText(
      R"({"Extraversion": {"social": 0.3, "posemo": 0.2}, "Zero": {"social": 0}})",
      lex);
  FeatureBlock liwc;
  liwc.Add("social", 0.1);
  liwc.Add("posemo", 0.05);
  const FeatureBlock b = Big5Scores(liwc, traits);
  EXPECT_NEAR(*b.Get("Extraversion"), 0.04, 1e-15);
  EXPECT_DOUBLE_EQ(*b.Get("Zero"), 0.0);
}

// Property: scaling every category score by c scales every trait by c.
TEST(Big5ScoresTest, RandomLinearity) {
  const auto lex = LoadLexicon(DataPath("lexicon.json"));
  const auto traits = LoadTraitCoefficients(DataPath("coefficients.json"), lex);
  Gen gen(5);
  for (int round = 0; round < 50; ++round) {
    FeatureBlock liwc, scaled;
    const double c = gen.Real(-3, 3);
    for (const auto& name : lex.categories()) {
      const double v = gen.Real(0, 0.2);
      liwc.Add(name, v);
      scaled.Add(name, c * v);
    }
    const FeatureBlock a = Big5Scores(liwc, traits);
    const FeatureBlock b = Big5Scores(scaled, traits);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(b.values[i], c * a.values[i], 1e-12);
    }
  }
}

TEST(ActivityFeaturesTest, ArithmeticExample) {
  TimelineBuilder tl;
  // 40 posts, 10 retweets, spanning exactly 5 days.
  for (int i = 0; i < 40; ++i) {
    tl.Add(kMonday + i * (5 * kSecondsPerDay) / 39, "x", i < 10);
  }
  const FeatureBlock b = ActivityFeatures(tl.Get(), kMonday + 6 * kSecondsPerDay);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kMsgCount), 40);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kDailyMsgCount), 8);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kRetweetRatio), 0.25);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kDailyRetweetRatio), 2.0);
}

TEST(ActivityFeaturesTest, EmptyAndNoRetweets) {
  TimelineBuilder empty;
  const FeatureBlock e = ActivityFeatures(empty.Get(), kMonday);
  EXPECT_DOUBLE_EQ(*e.Get(fn::kMsgCount), 0);
  EXPECT_EQ(std::count(e.missing.begin(), e.missing.end(), true), 3);
  TimelineBuilder tl;
  tl.Add(kMonday, "a");
  tl.Add(kMonday + 10, "b");
  const FeatureBlock b = ActivityFeatures(tl.Get(), kMonday + 20);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kRetweetRatio), 0);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kDailyRetweetRatio), 0);
}

TEST(ReadinessFeaturesTest, Examples) {
  TimelineBuilder tl;
  for (int i = 0; i < 40; ++i) {
    // 10 posts on Mondays, 30 on Tuesdays.
    const Timestamp day = i < 10 ? 0 : 1;
    tl.Add(kMonday + 7 * kSecondsPerDay * (i % 3) + day * kSecondsPerDay + i, "x");
  }
  const FeatureBlock b =
      ReadinessFeatures(tl.Get(), kMonday + 21 * kSecondsPerDay + 5);
  EXPECT_DOUBLE_EQ(*b.Get(fn::kTweetingLikelihoodOfDay), 0.25);

  TimelineBuilder last;
  last.Add(37800, "x");
  EXPECT_DOUBLE_EQ(*ReadinessFeatures(last.Get(), 43200).Get(fn::kTweetingInactivity),
                   5400);
}

TEST(ReadinessFeaturesTest, SteadinessIsInverseGapSd) {
  TimelineBuilder tl;
  // 20 gaps alternating 0 and 3600 s have a population sd of 1800 s.
  Timestamp t = 0;
  for (int i = 0; i < 21; ++i) {
    tl.Add(t, "x");
    t += i % 2 == 0 ? 0 : 3600;
  }
  const double s =
      *ReadinessFeatures(tl.Get(), t + 1, 21).Get(fn::kTweetingSteadiness);
  EXPECT_NEAR(s, 1.0 / 1800.0, 1e-15);

  TimelineBuilder regular;
  for (int i = 0; i < 30; ++i) regular.Add(i * 600, "x");
  EXPECT_DOUBLE_EQ(
      *ReadinessFeatures(regular.Get(), 100000).Get(fn::kTweetingSteadiness), 1.0);
}

// Properties: day and hour likelihoods sum to 1 over all days and hours;
// inactivity grows strictly with the query time.
TEST(ReadinessFeaturesTest, RandomLikelihoodSums) {
  Gen gen(9);
  for (int round = 0; round < 30; ++round) {
    TimelineBuilder tl;
    const int n = gen.Int(1, 60);
    for (int i = 0; i < n; ++i) tl.Add(kMonday + gen.Int(0, 20 * 86400), "x");
    const Timeline t = tl.Get();
    const Timestamp base = kMonday + 21 * kSecondsPerDay;
    double day_sum = 0, hour_sum = 0;
    for (int d = 0; d < 7; ++d) {
      day_sum += *ReadinessFeatures(t, base + d * kSecondsPerDay)
                      .Get(fn::kTweetingLikelihoodOfDay);
    }
    for (int h = 0; h < 24; ++h) {
      hour_sum += *ReadinessFeatures(t, base + h * kSecondsPerHour)
                       .Get(fn::kTweetingLikelihoodOfHour);
    }
    EXPECT_NEAR(day_sum, 1.0, 1e-12);
    EXPECT_NEAR(hour_sum, 1.0, 1e-12);
    const double a = *ReadinessFeatures(t, base).Get(fn::kTweetingInactivity);
    const double b = *ReadinessFeatures(t, base + 1).Get(fn::kTweetingInactivity);
    EXPECT_GE(a, 0.0);
    EXPECT_GT(b, a);
  }
}

class ExtractorTest : public ::testing::Test {
 protected:
  ExtractorTest()
      : lexicon_(LoadLexicon(DataPath("lexicon.json"))),
        extractor_(lexicon_,
                   LoadTraitCoefficients(DataPath("coefficients.json"), lexicon_,
                                         true)) {}
  CategoryLexicon lexicon_;
  FeatureExtractor extractor_;
};

TEST_F(ExtractorTest, ShippedConfigurationHas119Features) {
  EXPECT_EQ(extractor_.size(), 119u);
  EXPECT_EQ(extractor_.names().front(), fn::kMeanResponseTime);
  EXPECT_EQ(extractor_.names().back(), fn::kTweetingInactivity);
  EXPECT_EQ(extractor_.GroupOf(0), FeatureGroupKind::kResponsiveness);
  EXPECT_EQ(extractor_.GroupOf(7), FeatureGroupKind::kProfile);
  EXPECT_EQ(extractor_.GroupOf(8), FeatureGroupKind::kPersonality);
  EXPECT_EQ(extractor_.GroupOf(111), FeatureGroupKind::kActivity);
  EXPECT_EQ(extractor_.GroupOf(118), FeatureGroupKind::kReadiness);
}

TEST_F(ExtractorTest, EmptyHistoryIsMaskedExceptCounts) {
  const Corpus corpus =
      Corpus::Build({UserRecord{"u", "user", "", 0}}, {});
  const FeatureVector v = extractor_.Extract(corpus, corpus.users()[0], kMonday);
  ASSERT_EQ(v.size(), 119u);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.names[i] == fn::kCountSocialWords || v.names[i] == fn::kMsgCount) {
      EXPECT_FALSE(v.missing[i]);
      EXPECT_EQ(v.values[i], 0.0);
    } else {
      EXPECT_TRUE(v.missing[i]) << v.names[i];
    }
  }
  EXPECT_EQ(extractor_.Extract(corpus, corpus.users()[0], kMonday), v);
}

TEST(FeatureLengthLawTest, RandomLexiconAndTraitCounts) {
  Gen gen(13);
  for (int round = 0; round < 20; ++round) {
    const int c = gen.Int(1, 12);
    const int t = gen.Int(0, 6);
    std::vector<CategoryLexicon::Entry> entries = {{"social", {"talk*"}}};
    for (int i = 1; i < c; ++i) {
      entries.push_back({"cat" + std::to_string(i), {"w" + std::to_string(i)}});
    }
    const auto lex = CategoryLexicon::FromEntries(entries);
    std::vector<TraitCoefficients::Trait> traits;
    for (int i = 0; i < t; ++i) {
      traits.push_back({"T" + std::to_string(i), {{0, 1.0}}});
    }
    const FeatureExtractor fx(lex, TraitCoefficients::FromTraits(traits));
    EXPECT_EQ(fx.size(), static_cast<std::size_t>(16 + c + t));
  }
}

TEST(FeatureTableTest, CsvRoundTripKeepsMaskedCells) {
  FeatureTable t;
  FeatureVector v;
  v.names = {"a", "b"};
  v.values = {1.5, 0.0};
  v.missing = {false, true};
  v.query_time = 77;
  t.Append("u1", v, 1);
  v.values = {-2.25, 3.0};
  v.missing = {false, false};
  t.Append("u2", v, 0);
  TempDir dir;
  WriteFeatureCsv(dir.File("f.csv"), t);
  const FeatureTable back = ReadFeatureCsv(dir.File("f.csv"));
  EXPECT_EQ(back.feature_names, t.feature_names);
  EXPECT_EQ(back.user_ids, t.user_ids);
  EXPECT_EQ(back.values, t.values);
  EXPECT_EQ(back.missing, t.missing);
  EXPECT_EQ(back.labels, t.labels);
  EXPECT_EQ(back.query_times, t.query_times);
  EXPECT_THROW(t.Select({"a", "zzz"}), ConfigError);
  EXPECT_EQ(t.Select({"b"}).values[1], std::vector<double>{3.0});
}

}  // namespace
}  // namespace solicit
