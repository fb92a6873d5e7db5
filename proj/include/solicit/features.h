#ifndef SOLICIT_FEATURES_H_
#define SOLICIT_FEATURES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "solicit/corpus.h"
#include "solicit/lexicon.h"
#include "solicit/util.h"

namespace solicit {

// Feature names that are not lexicon categories or traits.
namespace feature_names {
inline constexpr const char* kMeanResponseTime = "MeanResponseTime";
inline constexpr const char* kMedianResponseTime = "MedianResponseTime";
inline constexpr const char* kModeResponseTime = "ModeResponseTime";
inline constexpr const char* kMaxResponseTime = "MaxResponseTime";
inline constexpr const char* kMinResponseTime = "MinResponseTime";
inline constexpr const char* kPastResponseRate = "PastResponseRate";
inline constexpr const char* kProactiveness = "Proactiveness";
inline constexpr const char* kCountSocialWords = "CountSocialWords";
inline constexpr const char* kMsgCount = "MsgCount";
inline constexpr const char* kDailyMsgCount = "DailyMsgCount";
inline constexpr const char* kRetweetRatio = "RetweetRatio";
inline constexpr const char* kDailyRetweetRatio = "DailyRetweetRatio";
inline constexpr const char* kTweetingLikelihoodOfDay =
    "TweetingLikelihoodOfDay";
inline constexpr const char* kTweetingLikelihoodOfHour =
    "TweetingLikelihoodOfHour";
inline constexpr const char* kTweetingSteadiness = "TweetingSteadiness";
inline constexpr const char* kTweetingInactivity = "TweetingInactivity";
}  // namespace feature_names

enum class FeatureGroupKind {
  kResponsiveness,
  kProfile,
  kPersonality,
  kActivity,
  kReadiness,
};

const char* FeatureGroupName(FeatureGroupKind kind);

// A named block of feature values. Masked entries hold 0.
struct FeatureBlock {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<bool> missing;

  std::size_t size() const { return values.size(); }
  void Add(std::string name, double value) {
    names.push_back(std::move(name));
    values.push_back(value);
    missing.push_back(false);
  }
  void AddMasked(std::string name) {
    names.push_back(std::move(name));
    values.push_back(0.0);
    missing.push_back(true);
  }
  // Value by name; nullopt when masked or absent.
  std::optional<double> Get(std::string_view name) const;
};

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<bool> missing;
  Timestamp query_time = 0;

  std::size_t size() const { return values.size(); }
  std::optional<double> Get(std::string_view name) const;
  bool operator==(const FeatureVector&) const = default;
};

using Timeline = std::span<const PostRecord* const>;

// Mean/median/mode/max/min latency, PastResponseRate and Proactiveness.
FeatureBlock ResponsivenessFeatures(const InteractionSummary& summary);

// Raw count of profile tokens in the lexicon's `social` category. Throws
// ConfigError when the lexicon has no such category.
std::int64_t ProfileSocialWords(std::string_view profile_text,
                                const CategoryLexicon& lexicon);

// N_g / N over the tokens of the timeline's non-retweet posts, one value per
// category. All masked when there are no tokens.
FeatureBlock LiwcScores(Timeline timeline, const CategoryLexicon& lexicon);

// Weighted sums of category scores; masked wherever the input is masked.
FeatureBlock Big5Scores(const FeatureBlock& liwc,
                        const TraitCoefficients& coefficients);

FeatureBlock ActivityFeatures(Timeline timeline, Timestamp query_time);

FeatureBlock ReadinessFeatures(Timeline timeline, Timestamp query_time,
                               std::size_t window = 20);

struct FeatureOptions {
  // Only the most recent `post_cap` posts at or before the query time feed
  // the timeline-based features.
  std::size_t post_cap = 200;
  std::size_t steadiness_window = 20;
};

// Builds the full feature vector: responsiveness (7), profile (1), one score
// per lexicon category, one per trait, activity (4), readiness (4).
class FeatureExtractor {
 public:
  FeatureExtractor(CategoryLexicon lexicon, TraitCoefficients coefficients,
                   FeatureOptions options = {});

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  const CategoryLexicon& lexicon() const { return lexicon_; }
  FeatureGroupKind GroupOf(std::size_t feature) const;

  // Features of `user` as of `query_time`, from corpus posts at or before it.
  FeatureVector Extract(const Corpus& corpus, const UserRecord& user,
                        Timestamp query_time) const;

  // Same, from an explicit ascending timeline (already cut at query_time)
  // and interaction summary.
  FeatureVector ExtractFrom(const UserRecord& user, Timeline timeline,
                            const InteractionSummary& interactions,
                            Timestamp query_time) const;

 private:
  CategoryLexicon lexicon_;
  TraitCoefficients coefficients_;
  FeatureOptions options_;
  std::vector<std::string> names_;
};

// One row per (user, query time). Labels are present when every row has one.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> user_ids;
  std::vector<Timestamp> query_times;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<bool>> missing;
  std::vector<int> labels;

  std::size_t rows() const { return values.size(); }
  bool labeled() const { return !labels.empty(); }
  void Append(const std::string& user_id, const FeatureVector& v,
              std::optional<int> label = {});
  // Keeps only the named columns, in the given order. ConfigError names the
  // first column that does not exist.
  FeatureTable Select(const std::vector<std::string>& columns) const;
};

// CSV: user_id,query_time,<feature names...>[,responded]; masked cells empty.
std::string FeatureTableToCsv(const FeatureTable& table);
FeatureTable FeatureTableFromCsv(std::string_view text,
                                 const std::string& source = "features");
void WriteFeatureCsv(const std::string& path, const FeatureTable& table);
FeatureTable ReadFeatureCsv(const std::string& path);

// Rows for every solicitation in the corpus, labelled with the outcome and
// computed at the send time.
FeatureTable FeaturizeSolicitations(const Corpus& corpus,
                                    const FeatureExtractor& extractor);

// Unlabelled rows for the given users at one query time.
FeatureTable FeaturizeUsers(const Corpus& corpus,
                            const FeatureExtractor& extractor,
                            const std::vector<std::string>& user_ids,
                            Timestamp query_time);

}  // namespace solicit

#endif  // SOLICIT_FEATURES_H_
