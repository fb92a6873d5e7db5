#include "solicit/lexicon.h"

#include <gtest/gtest.h>

#include "solicit/error.h"
#include "test_support.h"

namespace solicit {
namespace {

using ::solicit::testing::DataPath;
using ::solicit::testing::Gen;

TEST(LexiconTest, ParsesCategoriesInFileOrder) {
  const auto lex = CategoryLexicon::FromJsonText(
      R"({"social": ["talk*", "friend"], "food": ["pizza"]})");
  ASSERT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.categories()[0], "social");
  EXPECT_EQ(lex.patterns(0).size(), 2u);
}

TEST(LexiconTest, RejectsInnerWildcard) {
  EXPECT_THROW(CategoryLexicon::FromJsonText(R"({"x": ["a*b"]})"), ConfigError);
  EXPECT_THROW(CategoryLexicon::FromJsonText(R"({"x": []})"), ConfigError);
}

TEST(LexiconTest, ShippedLexiconHas68Categories) {
  const auto lex = LoadLexicon(DataPath("lexicon.json"));
  EXPECT_EQ(lex.size(), 68u);
  EXPECT_TRUE(lex.IndexOf("social").has_value());
  const auto traits =
      LoadTraitCoefficients(DataPath("coefficients.json"), lex, true);
  EXPECT_EQ(traits.size(), 35u);
}

TEST(TokenizeTest, Examples) {
  EXPECT_EQ(Tokenize("Talking to @bob about #food http://x.co").tokens,
            (std::vector<std::string>{"talking", "to", "about", "food"}));
  EXPECT_EQ(Tokenize("").total_count(), 0u);
  EXPECT_EQ(Tokenize("don't stop").tokens,
            (std::vector<std::string>{"don't", "stop"}));
}

TEST(CountMatchesTest, Examples) {
  const auto lex =
      CategoryLexicon::FromJsonText(R"({"social": ["talk*", "friend"]})");
  TokenStream t{{"talking", "friend", "code"}};
  EXPECT_EQ(CountMatches(t, lex), std::vector<std::int64_t>{2});
  EXPECT_EQ(CountMatches(TokenStream{}, lex), std::vector<std::int64_t>{0});
  EXPECT_EQ(CountMatches(TokenStream{{"talk"}}, lex), std::vector<std::int64_t>{1});
  EXPECT_EQ(CountMatches(TokenStream{{"tal"}}, lex), std::vector<std::int64_t>{0});
}

TEST(CountMatchesTest, TokenCountsInEveryMatchingCategory) {
  const auto lex = CategoryLexicon::FromJsonText(
      R"({"a": ["fri*"], "b": ["friend"], "c": ["zzz"]})");
  EXPECT_EQ(CountMatches(TokenStream{{"friend"}}, lex),
            (std::vector<std::int64_t>{1, 1, 0}));
}

std::string RandomWord(Gen& gen) {
  std::string w;
  const int len = gen.Int(1, 6);
  for (int i = 0; i < len; ++i) w += static_cast<char>('a' + gen.Int(0, 3));
  return w;
}

// Properties: a token matches stem* iff the stem is a prefix; appending
// tokens never lowers a count; counting is deterministic.
TEST(CountMatchesTest, RandomPatternSoundnessAndMonotonicity) {
  Gen gen(11);
  for (int round = 0; round < 200; ++round) {
    const std::string stem = RandomWord(gen);
    const std::string token = RandomWord(gen);
    const auto lex = CategoryLexicon::FromEntries({{"c", {stem + "*"}}});
    const bool prefix = token.compare(0, stem.size(), stem) == 0 &&
                        token.size() >= stem.size();
    EXPECT_EQ(CountMatches(TokenStream{{token}}, lex)[0], prefix ? 1 : 0)
        << stem << " vs " << token;

    TokenStream s;
    std::vector<std::int64_t> prev = CountMatches(s, lex);
    for (int k = 0; k < 10; ++k) {
      s.tokens.push_back(RandomWord(gen));
      const auto now = CountMatches(s, lex);
      EXPECT_GE(now[0], prev[0]);
      EXPECT_EQ(CountMatches(s, lex), now);
      prev = now;
    }
  }
}

TEST(TraitCoefficientsTest, UnknownCategoryIsConfigError) {
  const auto lex = CategoryLexicon::FromJsonText(R"({"social": ["talk*"]})");
  EXPECT_THROW(TraitCoefficients::FromJsonText(R"({"T": {"nope": 1.0}})", lex),
               ConfigError);
  EXPECT_THROW(
      TraitCoefficients::FromJsonText(R"({"T": {"social": 1.0}})", lex, true),
      ConfigError);
}

}  // namespace
}  // namespace solicit
