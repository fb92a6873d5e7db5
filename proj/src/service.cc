#include "solicit/service.h"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <unordered_set>

#include "solicit/error.h"
#include "solicit/stats.h"

namespace solicit {

namespace {

using json = nlohmann::json;

const std::uint64_t kStreamEngage = Fnv1a64("engage");

constexpr std::size_t kRecentPosts = 20;

json PostJson(const PostRecord& p, const Corpus& corpus) {
  const UserRecord* author = corpus.FindUser(p.author_id);
  return {{"post_id", p.post_id},
          {"author_id", p.author_id},
          {"screen_name", author ? author->screen_name : ""},
          {"timestamp", p.timestamp},
          {"text", p.text},
          {"is_retweet", p.is_retweet}};
}

}  // namespace

const char* OperatorModeName(OperatorMode mode) {
  switch (mode) {
    case OperatorMode::kManual:
      return "manual";
    case OperatorMode::kAuto:
      return "auto";
    case OperatorMode::kMixed:
      return "mixed";
  }
  return "manual";
}

OperatorMode ParseOperatorMode(const std::string& name) {
  if (name == "manual") return OperatorMode::kManual;
  if (name == "auto") return OperatorMode::kAuto;
  if (name == "mixed") return OperatorMode::kMixed;
  throw ServiceError(400, "mode must be manual, auto or mixed, got '" + name + "'");
}

const char* EngagementStatusName(EngagementStatus status) {
  switch (status) {
    case EngagementStatus::kPending:
      return "pending";
    case EngagementStatus::kResponded:
      return "responded";
    case EngagementStatus::kNoResponse:
      return "no-response";
  }
  return "pending";
}

Session::Session(SessionOptions options, TrainedModel model,
                 FeatureExtractor extractor, RuleFilter rules)
    : options_(std::move(options)),
      model_(std::move(model)),
      extractor_(std::move(extractor)),
      rules_(std::move(rules)),
      mode_(options_.mode) {
  const std::filesystem::path dir(options_.population_dir);
  const std::string config_path = (dir / "sim_config.json").string();
  SimConfig config = SimConfig::FromJson(ReadFile(config_path), config_path);
  Vocabulary vocabulary = LoadVocabulary((dir / "vocabulary.json").string());
  if (std::filesystem::exists(dir / "solicitations.jsonl")) {
    prior_solicitations_ = ReadSolicitations((dir / "solicitations.jsonl").string());
  }

  const auto& names = extractor_.names();
  for (const std::string& f : model_.feature_names) {
    auto it = std::find(names.begin(), names.end(), f);
    if (it == names.end()) {
      throw ConfigError("model feature '" + f + "' is not extracted");
    }
    model_columns_.push_back(static_cast<std::size_t>(it - names.begin()));
  }

  id_ = "session-" + HexDigest(MixSeed(options_.seed, Fnv1a64(config.Digest())));
  world_ = std::make_unique<World>(config, std::move(vocabulary));
  clock_ = config.end_time();
  world_->AdvanceTo(clock_);
  RebuildCorpus();

  if (!prior_solicitations_.empty()) {
    const FeatureTable table =
        FeaturizeSolicitations(*corpus_, extractor_).Select(model_.feature_names);
    training_ranked_ = RankCandidates(model_, table);
  }
  Log({{"event", "start"},
       {"session", id_},
       {"clock", clock_},
       {"mode", OperatorModeName(mode_)}});
}

Session::~Session() = default;

Timestamp Session::clock() const {
  std::shared_lock lock(mutex_);
  return clock_;
}

OperatorMode Session::mode() const {
  std::shared_lock lock(mutex_);
  return mode_;
}

void Session::RebuildCorpus() {
  corpus_ = std::make_unique<Corpus>(Corpus::Build(
      world_->users(), world_->posts(), prior_solicitations_, world_->exposures()));
}

void Session::Log(const json& event) {
  if (!options_.log_path) return;
  std::ofstream out(*options_.log_path, std::ios::app);
  out << event.dump() << "\n";
}

std::vector<const PostRecord*> Session::FilteredPosts(Timestamp after,
                                                      Timestamp until) const {
  std::vector<const PostRecord*> out;
  for (const PostRecord& p : corpus_->posts()) {
    if (p.timestamp <= after || p.timestamp > until) continue;
    if (!world_->AgentIndex(p.author_id)) continue;
    if (!rules_.Matches(p.text)) continue;
    out.push_back(&p);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PostRecord* a, const PostRecord* b) {
                     if (a->timestamp != b->timestamp) {
                       return a->timestamp < b->timestamp;
                     }
                     return a->post_id < b->post_id;
                   });
  return out;
}

std::vector<std::string> Session::CandidateIds() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const PostRecord* p :
       FilteredPosts(clock_ - options_.candidate_window, clock_)) {
    if (seen.insert(p->author_id).second) ids.push_back(p->author_id);
  }
  return ids;
}

double Session::Score(const UserRecord& user) const {
  const FeatureVector v = extractor_.Extract(*corpus_, user, clock_);
  std::vector<double> values;
  std::vector<bool> missing;
  for (std::size_t c : model_columns_) {
    values.push_back(v.values[c]);
    missing.push_back(v.missing[c]);
  }
  return model_.PredictProba(values, missing);
}

RankedList Session::RankedCandidates() const {
  std::vector<RankedEntry> entries;
  for (const std::string& id : CandidateIds()) {
    RankedEntry e;
    e.id = id;
    e.probability = Score(*corpus_->FindUser(id));
    entries.push_back(std::move(e));
  }
  return SortRanked(std::move(entries));
}

json Session::Stream(std::optional<Timestamp> since, std::size_t limit) const {
  std::shared_lock lock(mutex_);
  const Timestamp after = since.value_or(clock_ - options_.candidate_window);
  const auto posts = FilteredPosts(after, clock_);
  json out = json::array();
  Timestamp cursor = after;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    // Never split one timestamp across pages.
    if (i >= limit && posts[i]->timestamp != cursor) break;
    out.push_back(PostJson(*posts[i], *corpus_));
    cursor = posts[i]->timestamp;
  }
  return {{"clock", clock_},
          {"since", after},
          {"next_since", cursor},
          {"posts", std::move(out)}};
}

json Session::Candidates() const {
  std::shared_lock lock(mutex_);
  json posts = json::array();
  for (const PostRecord* p :
       FilteredPosts(clock_ - options_.candidate_window, clock_)) {
    posts.push_back(PostJson(*p, *corpus_));
  }
  json users = json::array();
  const RankedList ranked = RankedCandidates();
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const UserRecord* u = corpus_->FindUser(ranked[r].id);
    users.push_back({{"user_id", ranked[r].id},
                     {"screen_name", u->screen_name},
                     {"probability", ranked[r].probability},
                     {"rank", r + 1},
                     {"engaged", engaged_.count(ranked[r].id) > 0}});
  }
  return {{"clock", clock_}, {"posts", std::move(posts)},
          {"candidates", std::move(users)}};
}

json Session::UserProfile(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  const UserRecord* user = corpus_->FindUser(user_id);
  if (!user) throw ServiceError(404, "unknown user '" + user_id + "'");

  const FeatureVector v = extractor_.Extract(*corpus_, *user, clock_);
  json features = json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    features.push_back(
        {{"name", v.names[i]},
         {"group", FeatureGroupName(extractor_.GroupOf(i))},
         {"value", v.missing[i] ? json(nullptr) : json(v.values[i])},
         {"masked", static_cast<bool>(v.missing[i])}});
  }
  const auto timeline = corpus_->Timeline(user_id);
  json recent = json::array();
  std::size_t shown = 0;
  for (auto it = timeline.rbegin(); it != timeline.rend() && shown < kRecentPosts;
       ++it) {
    if ((*it)->timestamp > clock_) continue;
    recent.push_back(PostJson(**it, *corpus_));
    ++shown;
  }
  json rank = nullptr;
  const RankedList ranked = RankedCandidates();
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (ranked[r].id == user_id) rank = r + 1;
  }
  json engagement = nullptr;
  if (auto it = engaged_.find(user_id); it != engaged_.end()) {
    engagement = EngagementJson(engagements_[it->second]);
  }
  return {{"user_id", user->user_id},
          {"screen_name", user->screen_name},
          {"profile_text", user->profile_text},
          {"clock", clock_},
          {"recent_posts", std::move(recent)},
          {"features", std::move(features)},
          {"probability", Score(*user)},
          {"rank", rank},
          {"engagement", std::move(engagement)}};
}

json Session::EngagementJson(const Engagement& e) const {
  json j = {{"id", e.id},
            {"user_id", e.user_id},
            {"question", e.question},
            {"sent_at", e.sent_at},
            {"source", e.source},
            {"status", EngagementStatusName(e.status)}};
  // The drawn response stays hidden until the clock reaches it.
  const bool revealed = e.status == EngagementStatus::kResponded;
  j["response_at"] = revealed ? json(*e.response_at) : json(nullptr);
  j["response_text"] = revealed ? json(*e.response_text) : json(nullptr);
  j["closed_at"] = e.closed_at ? json(*e.closed_at) : json(nullptr);
  return j;
}

json Session::Engagements() const {
  std::shared_lock lock(mutex_);
  json list = json::array();
  for (const Engagement& e : engagements_) list.push_back(EngagementJson(e));
  return {{"clock", clock_}, {"engagements", std::move(list)}};
}

json Session::Report() const {
  std::shared_lock lock(mutex_);
  std::size_t responded = 0;
  std::size_t no_response = 0;
  std::map<std::string, std::array<std::size_t, 2>> by_source;
  for (const Engagement& e : engagements_) {
    auto& s = by_source[e.source];
    ++s[0];
    if (e.status == EngagementStatus::kResponded) {
      ++responded;
      ++s[1];
    }
    if (e.status == EngagementStatus::kNoResponse) ++no_response;
  }
  const std::size_t sent = engagements_.size();
  json sources = json::object();
  for (const auto& [name, counts] : by_source) {
    sources[name] = {{"sent", counts[0]}, {"responded", counts[1]}};
  }
  return {{"session", id_},
          {"mode", OperatorModeName(mode_)},
          {"clock", clock_},
          {"model", {{"kind", ModelKindName(model_.kind)},
                     {"features", model_.feature_names.size()}}},
          {"constraints", {{"min_fraction", options_.constraints.min_fraction},
                           {"min_length", options_.constraints.min_length}}},
          {"sent", sent},
          {"responded", responded},
          {"no_response", no_response},
          {"pending", sent - responded - no_response},
          {"response_rate",
           sent > 0 ? static_cast<double>(responded) / static_cast<double>(sent)
                    : 0.0},
          {"by_source", std::move(sources)},
          {"mode_transitions", mode_log_}};
}

IntervalSelection Session::SelectLocked(
    const IntervalConstraints& constraints) const {
  if (training_ranked_.empty()) {
    throw ServiceError(409, "the population has no labelled solicitations");
  }
  const RankedList candidates = RankedCandidates();
  if (candidates.empty()) {
    IntervalSelection empty;
    empty.train_size = training_ranked_.size();
    empty.constraints = constraints;
    empty.candidate_count = 0;
    empty.test_begin = 0;
    empty.test_end = 0;
    return empty;
  }
  try {
    return RecommendFromRanked(training_ranked_, candidates, constraints);
  } catch (const ConstraintError& e) {
    throw ServiceError(400, e.what());
  }
}

json Session::RecommendNow(std::optional<double> min_fraction,
                           std::optional<std::size_t> min_length) {
  std::unique_lock lock(mutex_);
  IntervalConstraints c = options_.constraints;
  if (min_fraction) {
    if (!(*min_fraction >= 0.0 && *min_fraction <= 1.0)) {
      throw ServiceError(400, "min_fraction must lie in [0, 1]");
    }
    c.min_fraction = *min_fraction;
  }
  if (min_length) c.min_length = *min_length;
  const IntervalSelection sel = SelectLocked(c);
  options_.constraints = c;
  recommendation_ = sel.selected_ids;
  Log({{"event", "recommend"}, {"clock", clock_}, {"selected", sel.selected_ids}});
  json j = json::parse(sel.ToJson());
  j["clock"] = clock_;
  return j;
}

Engagement& Session::SendLocked(const std::string& user_id,
                                const std::string& question,
                                const std::string& source) {
  const auto agent = world_->AgentIndex(user_id);
  const AgentSpec& a = world_->agents()[*agent];
  Engagement e;
  e.id = engagements_.size() + 1;
  e.user_id = user_id;
  e.question = question;
  e.sent_at = clock_;
  e.source = source;
  // The outcome depends only on the seed, the user and the send time.
  Rng rng(MixSeed(MixSeed(MixSeed(options_.seed, kStreamEngage), Fnv1a64(user_id)),
                  static_cast<std::uint64_t>(clock_)));
  const double p =
      TrueResponseProbability(a, world_->config().response, clock_,
                              world_->LastPostAtOrBefore(*agent, clock_));
  const double u = rng.Uniform();
  const Timestamp delay =
      1 + static_cast<Timestamp>(std::llround(rng.Exponential(a.latency_scale)));
  if (u < p && delay <= options_.response_window) {
    e.response_at = clock_ + delay;
    e.response_text = "about 20 minutes right now";
  }
  engaged_[user_id] = engagements_.size();
  engagements_.push_back(std::move(e));
  Log({{"event", "engage"},
       {"clock", clock_},
       {"user_id", user_id},
       {"source", source}});
  return engagements_.back();
}

json Session::Engage(const std::string& user_id, const std::string& question) {
  std::unique_lock lock(mutex_);
  if (mode_ == OperatorMode::kAuto) {
    throw ServiceError(409, "automation owns sending in auto mode");
  }
  if (question.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ServiceError(400, "question must not be empty");
  }
  if (!world_->AgentIndex(user_id)) {
    throw ServiceError(404, "unknown user '" + user_id + "'");
  }
  if (engaged_.count(user_id)) {
    throw ServiceError(409, "user '" + user_id + "' was already asked");
  }
  if (mode_ == OperatorMode::kMixed &&
      std::find(recommendation_.begin(), recommendation_.end(), user_id) ==
          recommendation_.end()) {
    throw ServiceError(409, "user '" + user_id +
                                "' is not in the current recommendation");
  }
  return EngagementJson(SendLocked(user_id, question, "operator"));
}

json Session::SetMode(const std::string& mode) {
  const OperatorMode next = ParseOperatorMode(mode);
  std::unique_lock lock(mutex_);
  const OperatorMode prev = mode_;
  mode_ = next;
  if (prev != next) {
    json entry = {{"at", clock_},
                  {"from", OperatorModeName(prev)},
                  {"to", OperatorModeName(next)}};
    mode_log_.push_back(entry);
    entry["event"] = "mode";
    Log(entry);
  }
  return {{"mode", OperatorModeName(mode_)}, {"clock", clock_}};
}

std::size_t Session::ResolveLocked() {
  std::size_t resolved = 0;
  for (Engagement& e : engagements_) {
    if (e.status != EngagementStatus::kPending) continue;
    if (e.response_at && *e.response_at <= clock_) {
      e.status = EngagementStatus::kResponded;
      e.closed_at = *e.response_at;
      ++resolved;
    } else if (!e.response_at && e.sent_at + options_.response_window <= clock_) {
      e.status = EngagementStatus::kNoResponse;
      e.closed_at = e.sent_at + options_.response_window;
      ++resolved;
    }
  }
  return resolved;
}

json Session::Tick(std::int64_t seconds) {
  if (seconds < 0) throw ServiceError(400, "seconds must be non-negative");
  std::unique_lock lock(mutex_);
  const std::size_t before = world_->posts().size();
  clock_ += seconds;
  world_->AdvanceTo(clock_);
  RebuildCorpus();
  const std::size_t resolved = ResolveLocked();

  json sent = json::array();
  if (mode_ == OperatorMode::kAuto && !training_ranked_.empty()) {
    const IntervalSelection sel = SelectLocked(options_.constraints);
    recommendation_ = sel.selected_ids;
    for (const std::string& id : sel.selected_ids) {
      if (sent.size() >= options_.auto_budget) break;
      if (engaged_.count(id)) continue;
      const UserRecord* u = corpus_->FindUser(id);
      const std::string keyword =
          rules_.keywords.empty() ? std::string("airport") : rules_.keywords.front();
      sent.push_back(EngagementJson(SendLocked(
          id,
          "@" + u->screen_name + " how long is the line at the " + keyword +
              " right now?",
          "auto")));
    }
  }
  Log({{"event", "tick"}, {"clock", clock_}, {"seconds", seconds}});
  return {{"clock", clock_},
          {"new_posts", world_->posts().size() - before},
          {"resolved", resolved},
          {"auto_sent", std::move(sent)}};
}

}  // namespace solicit
