#include "solicit/features.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "solicit/error.h"

namespace solicit {

namespace fn = feature_names;

namespace {

constexpr std::size_t kResponsivenessCount = 7;
constexpr std::size_t kProfileCount = 1;
constexpr std::size_t kActivityCount = 4;

std::optional<double> LookUp(const std::vector<std::string>& names,
                             const std::vector<double>& values,
                             const std::vector<bool>& missing,
                             std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      if (missing[i]) return std::nullopt;
      return values[i];
    }
  }
  return std::nullopt;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Most frequent whole-minute bucket, in seconds; smallest bucket wins ties.
double ModeByMinute(const std::vector<double>& latencies) {
  std::map<std::int64_t, std::size_t> buckets;
  for (double l : latencies) {
    ++buckets[static_cast<std::int64_t>(std::floor(l / 60.0))];
  }
  std::int64_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [bucket, count] : buckets) {
    if (count > best_count) {
      best = bucket;
      best_count = count;
    }
  }
  return static_cast<double>(best) * 60.0;
}

std::string JoinCsv(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += cells[i];
  }
  return out;
}

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double ParseNumber(const std::string& cell, const std::string& source,
                   std::size_t line) {
  double v = 0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(source, line, "bad number '" + cell + "'");
  }
  return v;
}

}  // namespace

const char* FeatureGroupName(FeatureGroupKind kind) {
  switch (kind) {
    case FeatureGroupKind::kResponsiveness:
      return "responsiveness";
    case FeatureGroupKind::kProfile:
      return "profile";
    case FeatureGroupKind::kPersonality:
      return "personality";
    case FeatureGroupKind::kActivity:
      return "activity";
    case FeatureGroupKind::kReadiness:
      return "readiness";
  }
  return "unknown";
}

std::optional<double> FeatureBlock::Get(std::string_view name) const {
  return LookUp(names, values, missing, name);
}

std::optional<double> FeatureVector::Get(std::string_view name) const {
  return LookUp(names, values, missing, name);
}

FeatureBlock ResponsivenessFeatures(const InteractionSummary& summary) {
  FeatureBlock b;
  const std::vector<double>& t = summary.response_latencies;
  if (t.empty()) {
    for (const char* name :
         {fn::kMeanResponseTime, fn::kMedianResponseTime, fn::kModeResponseTime,
          fn::kMaxResponseTime, fn::kMinResponseTime}) {
      b.AddMasked(name);
    }
  } else {
    const double sum = std::accumulate(t.begin(), t.end(), 0.0);
    b.Add(fn::kMeanResponseTime, sum / static_cast<double>(t.size()));
    b.Add(fn::kMedianResponseTime, Median(t));
    b.Add(fn::kModeResponseTime, ModeByMinute(t));
    b.Add(fn::kMaxResponseTime, *std::max_element(t.begin(), t.end()));
    b.Add(fn::kMinResponseTime, *std::min_element(t.begin(), t.end()));
  }
  if (summary.direct_questions_received == 0) {
    b.AddMasked(fn::kPastResponseRate);
  } else {
    b.Add(fn::kPastResponseRate,
          static_cast<double>(summary.responses_to_direct) /
              static_cast<double>(summary.direct_questions_received));
  }
  if (summary.indirect_questions_exposed == 0) {
    b.AddMasked(fn::kProactiveness);
  } else {
    b.Add(fn::kProactiveness,
          static_cast<double>(summary.responses_to_indirect) /
              static_cast<double>(summary.indirect_questions_exposed));
  }
  return b;
}

std::int64_t ProfileSocialWords(std::string_view profile_text,
                                const CategoryLexicon& lexicon) {
  const auto social = lexicon.IndexOf("social");
  if (!social) throw ConfigError("lexicon has no 'social' category");
  return CountMatches(Tokenize(profile_text), lexicon)[*social];
}

FeatureBlock LiwcScores(Timeline timeline, const CategoryLexicon& lexicon) {
  TokenStream tokens;
  for (const PostRecord* p : timeline) {
    if (!p->is_retweet) AppendTokens(p->text, tokens);
  }
  FeatureBlock b;
  const std::size_t n = tokens.total_count();
  if (n == 0) {
    for (const std::string& c : lexicon.categories()) b.AddMasked(c);
    return b;
  }
  const std::vector<std::int64_t> counts = CountMatches(tokens, lexicon);
  for (std::size_t g = 0; g < lexicon.size(); ++g) {
    b.Add(lexicon.categories()[g],
          static_cast<double>(counts[g]) / static_cast<double>(n));
  }
  return b;
}

FeatureBlock Big5Scores(const FeatureBlock& liwc,
                        const TraitCoefficients& coefficients) {
  FeatureBlock b;
  for (const TraitCoefficients::Trait& trait : coefficients.traits()) {
    double score = 0.0;
    bool masked = false;
    for (const TraitCoefficients::Term& term : trait.terms) {
      if (term.category >= liwc.size()) {
        throw ConfigError("trait '" + trait.name +
                          "' refers past the category scores");
      }
      if (liwc.missing[term.category]) masked = true;
      score += term.weight * liwc.values[term.category];
    }
    if (masked) {
      b.AddMasked(trait.name);
    } else {
      b.Add(trait.name, score);
    }
  }
  return b;
}

FeatureBlock ActivityFeatures(Timeline timeline, Timestamp /*query_time*/) {
  FeatureBlock b;
  const std::size_t n = timeline.size();
  b.Add(fn::kMsgCount, static_cast<double>(n));
  if (n == 0) {
    b.AddMasked(fn::kDailyMsgCount);
    b.AddMasked(fn::kRetweetRatio);
    b.AddMasked(fn::kDailyRetweetRatio);
    return b;
  }
  const Timestamp span = timeline.back()->timestamp - timeline.front()->timestamp;
  const double active_days = std::max<double>(
      1.0, std::ceil(static_cast<double>(span) /
                     static_cast<double>(kSecondsPerDay)));
  const auto retweets = static_cast<double>(
      std::count_if(timeline.begin(), timeline.end(),
                    [](const PostRecord* p) { return p->is_retweet; }));
  b.Add(fn::kDailyMsgCount, static_cast<double>(n) / active_days);
  b.Add(fn::kRetweetRatio, retweets / static_cast<double>(n));
  b.Add(fn::kDailyRetweetRatio, retweets / active_days);
  return b;
}

FeatureBlock ReadinessFeatures(Timeline timeline, Timestamp query_time,
                               std::size_t window) {
  FeatureBlock b;
  const std::size_t n = timeline.size();
  if (n == 0) {
    b.AddMasked(fn::kTweetingLikelihoodOfDay);
    b.AddMasked(fn::kTweetingLikelihoodOfHour);
  } else {
    const int day = UtcWeekday(query_time);
    const int hour = UtcHour(query_time);
    std::size_t on_day = 0;
    std::size_t on_hour = 0;
    for (const PostRecord* p : timeline) {
      if (UtcWeekday(p->timestamp) == day) ++on_day;
      if (UtcHour(p->timestamp) == hour) ++on_hour;
    }
    b.Add(fn::kTweetingLikelihoodOfDay,
          static_cast<double>(on_day) / static_cast<double>(n));
    b.Add(fn::kTweetingLikelihoodOfHour,
          static_cast<double>(on_hour) / static_cast<double>(n));
  }

  const std::size_t k = std::min(window, n);
  if (k < 3) {
    b.AddMasked(fn::kTweetingSteadiness);
  } else {
    std::vector<double> gaps;
    for (std::size_t i = n - k + 1; i < n; ++i) {
      gaps.push_back(static_cast<double>(timeline[i]->timestamp -
                                         timeline[i - 1]->timestamp));
    }
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) /
                        static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    const double sigma =
        std::max(1.0, std::sqrt(ss / static_cast<double>(gaps.size())));
    b.Add(fn::kTweetingSteadiness, 1.0 / sigma);
  }

  if (n == 0) {
    b.AddMasked(fn::kTweetingInactivity);
  } else {
    b.Add(fn::kTweetingInactivity,
          static_cast<double>(
              std::max<Timestamp>(0, query_time - timeline.back()->timestamp)));
  }
  return b;
}

FeatureExtractor::FeatureExtractor(CategoryLexicon lexicon,
                                   TraitCoefficients coefficients,
                                   FeatureOptions options)
    : lexicon_(std::move(lexicon)),
      coefficients_(std::move(coefficients)),
      options_(options) {
  if (!lexicon_.IndexOf("social")) {
    throw ConfigError("lexicon has no 'social' category");
  }
  const InteractionSummary empty;
  auto append = [&](const FeatureBlock& block) {
    names_.insert(names_.end(), block.names.begin(), block.names.end());
  };
  append(ResponsivenessFeatures(empty));
  names_.push_back(fn::kCountSocialWords);
  names_.insert(names_.end(), lexicon_.categories().begin(),
                lexicon_.categories().end());
  for (const auto& t : coefficients_.traits()) names_.push_back(t.name);
  append(ActivityFeatures({}, 0));
  append(ReadinessFeatures({}, 0, options_.steadiness_window));

  std::unordered_set<std::string> seen;
  for (const std::string& name : names_) {
    if (!seen.insert(name).second) {
      throw ConfigError("feature name '" + name + "' is not unique");
    }
    if (name.find_first_of(",\"\n") != std::string::npos) {
      throw ConfigError("feature name '" + name + "' is not CSV-safe");
    }
  }
}

FeatureGroupKind FeatureExtractor::GroupOf(std::size_t feature) const {
  std::size_t edge = kResponsivenessCount;
  if (feature < edge) return FeatureGroupKind::kResponsiveness;
  edge += kProfileCount;
  if (feature < edge) return FeatureGroupKind::kProfile;
  edge += lexicon_.size() + coefficients_.size();
  if (feature < edge) return FeatureGroupKind::kPersonality;
  edge += kActivityCount;
  if (feature < edge) return FeatureGroupKind::kActivity;
  return FeatureGroupKind::kReadiness;
}

FeatureVector FeatureExtractor::Extract(const Corpus& corpus,
                                        const UserRecord& user,
                                        Timestamp query_time) const {
  const Timeline full = corpus.Timeline(user.user_id);
  auto cut = std::upper_bound(
      full.begin(), full.end(), query_time,
      [](Timestamp t, const PostRecord* p) { return t < p->timestamp; });
  const auto end = static_cast<std::size_t>(cut - full.begin());
  const std::size_t begin =
      end > options_.post_cap ? end - options_.post_cap : 0;
  return ExtractFrom(user, full.subspan(begin, end - begin),
                     DeriveInteractions(corpus, user, query_time), query_time);
}

FeatureVector FeatureExtractor::ExtractFrom(
    const UserRecord& user, Timeline timeline,
    const InteractionSummary& interactions, Timestamp query_time) const {
  FeatureVector v;
  v.query_time = query_time;
  v.names = names_;
  v.values.reserve(names_.size());
  v.missing.reserve(names_.size());
  auto append = [&](const FeatureBlock& block) {
    v.values.insert(v.values.end(), block.values.begin(), block.values.end());
    v.missing.insert(v.missing.end(), block.missing.begin(),
                     block.missing.end());
  };
  append(ResponsivenessFeatures(interactions));
  v.values.push_back(
      static_cast<double>(ProfileSocialWords(user.profile_text, lexicon_)));
  v.missing.push_back(false);
  const FeatureBlock liwc = LiwcScores(timeline, lexicon_);
  append(liwc);
  append(Big5Scores(liwc, coefficients_));
  append(ActivityFeatures(timeline, query_time));
  append(ReadinessFeatures(timeline, query_time, options_.steadiness_window));
  return v;
}

void FeatureTable::Append(const std::string& user_id, const FeatureVector& v,
                          std::optional<int> label) {
  if (feature_names.empty() && rows() == 0) feature_names = v.names;
  if (v.names != feature_names) {
    throw ContractError("feature vector layout differs from the table's");
  }
  if (label.has_value() != labeled() && rows() > 0) {
    throw ContractError("rows must be all labelled or all unlabelled");
  }
  user_ids.push_back(user_id);
  query_times.push_back(v.query_time);
  values.push_back(v.values);
  missing.push_back(v.missing);
  if (label) labels.push_back(*label);
}

FeatureTable FeatureTable::Select(
    const std::vector<std::string>& columns) const {
  std::vector<std::size_t> idx;
  for (const std::string& c : columns) {
    auto it = std::find(feature_names.begin(), feature_names.end(), c);
    if (it == feature_names.end()) {
      throw ConfigError("feature '" + c + "' is not in the feature space");
    }
    idx.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  FeatureTable out;
  out.feature_names = columns;
  out.user_ids = user_ids;
  out.query_times = query_times;
  out.labels = labels;
  for (std::size_t r = 0; r < rows(); ++r) {
    std::vector<double> vals;
    std::vector<bool> miss;
    for (std::size_t j : idx) {
      vals.push_back(values[r][j]);
      miss.push_back(missing[r][j]);
    }
    out.values.push_back(std::move(vals));
    out.missing.push_back(std::move(miss));
  }
  return out;
}

std::string FeatureTableToCsv(const FeatureTable& table) {
  std::ostringstream out;
  std::vector<std::string> header = {"user_id", "query_time"};
  header.insert(header.end(), table.feature_names.begin(),
                table.feature_names.end());
  if (table.labeled()) header.push_back("responded");
  out << JoinCsv(header) << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::vector<std::string> cells = {table.user_ids[r],
                                      std::to_string(table.query_times[r])};
    for (std::size_t j = 0; j < table.feature_names.size(); ++j) {
      cells.push_back(table.missing[r][j] ? ""
                                          : FormatDouble(table.values[r][j]));
    }
    if (table.labeled()) cells.push_back(std::to_string(table.labels[r]));
    out << JoinCsv(cells) << '\n';
  }
  return out.str();
}

FeatureTable FeatureTableFromCsv(std::string_view text,
                                 const std::string& source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  if (lines.empty()) throw ParseError(source, 1, "empty feature file");
  const std::vector<std::string> header = SplitCsv(lines[0]);
  if (header.size() < 2 || header[0] != "user_id" ||
      header[1] != "query_time") {
    throw ParseError(source, 1, "header must start with user_id,query_time");
  }
  FeatureTable t;
  const bool labeled = header.back() == "responded";
  t.feature_names.assign(header.begin() + 2,
                         header.end() - (labeled ? 1 : 0));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> cells = SplitCsv(lines[i]);
    if (cells.size() != header.size()) {
      throw ParseError(source, i + 1,
                       "expected " + std::to_string(header.size()) +
                           " cells, got " + std::to_string(cells.size()));
    }
    t.user_ids.push_back(cells[0]);
    t.query_times.push_back(
        static_cast<Timestamp>(ParseNumber(cells[1], source, i + 1)));
    std::vector<double> vals;
    std::vector<bool> miss;
    for (std::size_t j = 0; j < t.feature_names.size(); ++j) {
      const std::string& c = cells[j + 2];
      miss.push_back(c.empty());
      vals.push_back(c.empty() ? 0.0 : ParseNumber(c, source, i + 1));
    }
    t.values.push_back(std::move(vals));
    t.missing.push_back(std::move(miss));
    if (labeled) {
      const std::string& l = cells.back();
      if (l != "0" && l != "1") {
        throw ParseError(source, i + 1, "responded must be 0 or 1");
      }
      t.labels.push_back(l == "1" ? 1 : 0);
    }
  }
  return t;
}

void WriteFeatureCsv(const std::string& path, const FeatureTable& table) {
  WriteFile(path, FeatureTableToCsv(table));
}

FeatureTable ReadFeatureCsv(const std::string& path) {
  return FeatureTableFromCsv(ReadFile(path), path);
}

FeatureTable FeaturizeSolicitations(const Corpus& corpus,
                                    const FeatureExtractor& extractor) {
  FeatureTable t;
  t.feature_names = extractor.names();
  for (const SolicitationRecord& s : corpus.solicitations()) {
    const UserRecord* u = corpus.FindUser(s.target_user);
    t.Append(u->user_id, extractor.Extract(corpus, *u, s.sent_at),
             s.responded ? 1 : 0);
  }
  return t;
}

FeatureTable FeaturizeUsers(const Corpus& corpus,
                            const FeatureExtractor& extractor,
                            const std::vector<std::string>& user_ids,
                            Timestamp query_time) {
  FeatureTable t;
  t.feature_names = extractor.names();
  for (const std::string& id : user_ids) {
    const UserRecord* u = corpus.FindUser(id);
    if (!u) throw IntegrityError("unknown user " + id);
    t.Append(id, extractor.Extract(corpus, *u, query_time));
  }
  return t;
}

}  // namespace solicit
