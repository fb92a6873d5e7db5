#include "solicit/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>

#include "json.hpp"
#include "solicit/error.h"

namespace solicit {

namespace {

using ordered_json = nlohmann::ordered_json;

// Independent random streams derived from the population seed.
const std::uint64_t kStreamAgents = Fnv1a64("agents");
const std::uint64_t kStreamHour = Fnv1a64("hour");
const std::uint64_t kStreamSplit = Fnv1a64("split");
const std::uint64_t kStreamSolicit = Fnv1a64("solicit");

constexpr const char* kDirectTemplates[] = {
    "@%s hi! how long is the wait at the %s right now?",
    "@%s are you near the %s? is it busy?",
    "@%s quick question, how is the %s this morning?",
};
constexpr const char* kIndirectTemplates[] = {
    "anyone know how long the line at the %s is?",
    "is the %s packed today?",
    "any updates from the %s?",
};

std::string Format(const char* pattern, const std::string& a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a.c_str());
  return buf;
}

std::string Format(const char* pattern, const std::string& a,
                   const std::string& b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a.c_str(), b.c_str());
  return buf;
}

std::string PaddedId(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

template <std::size_t N>
const char* Pick(const char* const (&items)[N], Rng& rng) {
  return items[rng.Below(N)];
}

void CheckRange(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw ConfigError(std::string("sim config '") + name + "' must lie in [" +
                      FormatDouble(lo) + ", " + FormatDouble(hi) + "], got " +
                      FormatDouble(v));
  }
}

}  // namespace

std::array<std::array<double, 5>, 5> TraitCorrelation(const SimConfig& c) {
  // Order: willingness, responsiveness, sociability, activity, latency.
  const double w[5] = {1.0, c.corr_w_rho, c.corr_w_s, c.corr_w_activity,
                       c.corr_w_latency};
  std::array<std::array<double, 5>, 5> m{};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      m[i][j] = i == j ? 1.0 : w[i] * w[j];
    }
  }
  if (c.corr_rho_s) m[1][2] = m[2][1] = *c.corr_rho_s;
  return m;
}

std::array<std::array<double, 5>, 5> CholeskyFactor(
    const std::array<std::array<double, 5>, 5>& m) {
  std::array<std::array<double, 5>, 5> l{};
  for (int j = 0; j < 5; ++j) {
    double d = m[j][j];
    for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (d < -1e-10) {
      throw ConfigError(
          "trait correlation matrix is not positive semidefinite");
    }
    l[j][j] = std::sqrt(std::max(d, 0.0));
    for (int i = j + 1; i < 5; ++i) {
      double s = m[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (l[j][j] > 0.0) {
        l[i][j] = s / l[j][j];
      } else if (std::fabs(s) > 1e-10) {
        throw ConfigError(
            "trait correlation matrix is not positive semidefinite");
      }
    }
  }
  return l;
}

void SimConfig::Validate() const {
  if (population < 1) throw ConfigError("population must be at least 1");
  if (days < 2) throw ConfigError("simulation needs at least 2 days");
  if (solicitation_window_days < 1 || solicitation_window_days >= days) {
    throw ConfigError("solicitation window must be shorter than the run");
  }
  if (solicitations_per_agent < 1) {
    throw ConfigError("solicitations_per_agent must be at least 1");
  }
  if (live_hour < 0 || live_hour > 23) {
    throw ConfigError("live_hour must be in 0..23");
  }
  if (!(mean_activity > 0.0)) throw ConfigError("mean_activity must be > 0");
  if (!(mean_latency > 0.0)) throw ConfigError("mean_latency must be > 0");
  if (!(willingness_shape > 0.0)) {
    throw ConfigError("willingness_shape must be > 0");
  }
  CheckRange(activity_sigma, 0.0, 5.0, "activity_sigma");
  CheckRange(latency_sigma, 0.0, 5.0, "latency_sigma");
  CheckRange(mean_readiness_sensitivity, 0.0, 100.0,
             "mean_readiness_sensitivity");
  CheckRange(diurnal_concentration, 0.0, 20.0, "diurnal_concentration");
  if (!(weekday_concentration > 0.0)) {
    throw ConfigError("weekday_concentration must be > 0");
  }
  CheckRange(corr_w_rho, -1.0, 1.0, "corr_w_rho");
  CheckRange(corr_w_s, -1.0, 1.0, "corr_w_s");
  CheckRange(corr_w_activity, -1.0, 1.0, "corr_w_activity");
  CheckRange(corr_w_latency, -1.0, 1.0, "corr_w_latency");
  if (corr_rho_s) CheckRange(*corr_rho_s, -1.0, 1.0, "corr_rho_s");
  if (peers < 1) throw ConfigError("at least one peer account is needed");
  CheckRange(direct_questions_per_day, 0.0, 100.0, "direct_questions_per_day");
  CheckRange(indirect_questions_per_day, 0.0, 100.0,
             "indirect_questions_per_day");
  CheckRange(indirect_reply_scale, 0.0, 1.0, "indirect_reply_scale");
  CheckRange(keyword_post_probability, 0.0, 1.0, "keyword_post_probability");
  CheckRange(retweet_min, 0.0, 1.0, "retweet_min");
  CheckRange(retweet_span, 0.0, 1.0 - retweet_min, "retweet_span");
  CheckRange(train_fraction, 0.0, 1.0, "train_fraction");
  if (!(response.tau > 0.0)) throw ConfigError("response tau must be > 0");
  if (keywords.empty()) throw ConfigError("at least one rule keyword needed");
  CholeskyFactor(TraitCorrelation(*this));
}

std::string SimConfig::ToJson() const {
  ordered_json j;
  j["population"] = population;
  j["days"] = days;
  j["seed"] = seed;
  j["start_time"] = start_time;
  j["mean_activity"] = mean_activity;
  j["activity_sigma"] = activity_sigma;
  j["mean_latency"] = mean_latency;
  j["latency_sigma"] = latency_sigma;
  j["willingness_shape"] = willingness_shape;
  j["mean_readiness_sensitivity"] = mean_readiness_sensitivity;
  j["diurnal_concentration"] = diurnal_concentration;
  j["weekday_concentration"] = weekday_concentration;
  j["corr_w_rho"] = corr_w_rho;
  j["corr_w_s"] = corr_w_s;
  j["corr_w_activity"] = corr_w_activity;
  j["corr_w_latency"] = corr_w_latency;
  j["corr_rho_s"] = corr_rho_s ? ordered_json(*corr_rho_s) : ordered_json();
  j["peers"] = peers;
  j["direct_questions_per_day"] = direct_questions_per_day;
  j["indirect_questions_per_day"] = indirect_questions_per_day;
  j["indirect_reply_scale"] = indirect_reply_scale;
  j["keyword_post_probability"] = keyword_post_probability;
  j["retweet_min"] = retweet_min;
  j["retweet_span"] = retweet_span;
  j["train_fraction"] = train_fraction;
  j["solicitation_window_days"] = solicitation_window_days;
  j["solicitations_per_agent"] = solicitations_per_agent;
  j["live_hour"] = live_hour;
  j["response"] = {{"b0", response.b0},
                   {"b1", response.b1},
                   {"b2", response.b2},
                   {"b3", response.b3},
                   {"tau", response.tau}};
  j["keywords"] = keywords;
  return j.dump(2);
}

SimConfig SimConfig::FromJson(std::string_view text, const std::string& source) {
  SimConfig c;
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": expected a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "population") c.population = v.get<std::size_t>();
      else if (k == "days") c.days = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "start_time") c.start_time = v.get<Timestamp>();
      else if (k == "mean_activity") c.mean_activity = v.get<double>();
      else if (k == "activity_sigma") c.activity_sigma = v.get<double>();
      else if (k == "mean_latency") c.mean_latency = v.get<double>();
      else if (k == "latency_sigma") c.latency_sigma = v.get<double>();
      else if (k == "willingness_shape") c.willingness_shape = v.get<double>();
      else if (k == "mean_readiness_sensitivity") {
        c.mean_readiness_sensitivity = v.get<double>();
      } else if (k == "diurnal_concentration") {
        c.diurnal_concentration = v.get<double>();
      } else if (k == "weekday_concentration") {
        c.weekday_concentration = v.get<double>();
      } else if (k == "corr_w_rho") c.corr_w_rho = v.get<double>();
      else if (k == "corr_w_s") c.corr_w_s = v.get<double>();
      else if (k == "corr_w_activity") c.corr_w_activity = v.get<double>();
      else if (k == "corr_w_latency") c.corr_w_latency = v.get<double>();
      else if (k == "corr_rho_s") {
        if (!v.is_null()) c.corr_rho_s = v.get<double>();
      } else if (k == "peers") c.peers = v.get<std::size_t>();
      else if (k == "direct_questions_per_day") {
        c.direct_questions_per_day = v.get<double>();
      } else if (k == "indirect_questions_per_day") {
        c.indirect_questions_per_day = v.get<double>();
      } else if (k == "indirect_reply_scale") {
        c.indirect_reply_scale = v.get<double>();
      } else if (k == "keyword_post_probability") {
        c.keyword_post_probability = v.get<double>();
      } else if (k == "retweet_min") c.retweet_min = v.get<double>();
      else if (k == "retweet_span") c.retweet_span = v.get<double>();
      else if (k == "train_fraction") c.train_fraction = v.get<double>();
      else if (k == "solicitation_window_days") {
        c.solicitation_window_days = v.get<int>();
      } else if (k == "solicitations_per_agent") {
        c.solicitations_per_agent = v.get<int>();
      } else if (k == "live_hour") c.live_hour = v.get<int>();
      else if (k == "response") {
        c.response.b0 = v.value("b0", c.response.b0);
        c.response.b1 = v.value("b1", c.response.b1);
        c.response.b2 = v.value("b2", c.response.b2);
        c.response.b3 = v.value("b3", c.response.b3);
        c.response.tau = v.value("tau", c.response.tau);
      } else if (k == "keywords") {
        c.keywords = v.get<std::vector<std::string>>();
      } else {
        throw ConfigError(source + ": unknown sim config key '" + k + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source + ": bad sim config value: " + e.what());
  }
  c.Validate();
  return c;
}

std::string SimConfig::Digest() const { return HexDigest(Fnv1a64(ToJson())); }

double AgentSpec::HourlyIntensity(Timestamp t) const {
  return activity_rate * diurnal[UtcHour(t)] * 7.0 * weekday[UtcWeekday(t)] /
         static_cast<double>(kSecondsPerHour);
}

std::string AgentToJsonLine(const AgentSpec& a) {
  ordered_json j;
  j["agent_id"] = a.agent_id;
  j["screen_name"] = a.screen_name;
  j["activity_rate"] = a.activity_rate;
  j["diurnal"] = a.diurnal;
  j["weekday"] = a.weekday;
  j["responsiveness"] = a.responsiveness;
  j["latency_scale"] = a.latency_scale;
  j["retweet_propensity"] = a.retweet_propensity;
  j["sociability"] = a.sociability;
  j["willingness"] = a.willingness;
  j["readiness_sensitivity"] = a.readiness_sensitivity;
  return j.dump();
}

AgentSpec AgentFromJson(std::string_view line, const std::string& source,
                        std::size_t line_no) {
  AgentSpec a;
  try {
    const auto j = nlohmann::json::parse(line);
    a.agent_id = j.at("agent_id").get<std::string>();
    a.screen_name = j.at("screen_name").get<std::string>();
    a.activity_rate = j.at("activity_rate").get<double>();
    a.diurnal = j.at("diurnal").get<std::array<double, 24>>();
    a.weekday = j.at("weekday").get<std::array<double, 7>>();
    a.responsiveness = j.at("responsiveness").get<double>();
    a.latency_scale = j.at("latency_scale").get<double>();
    a.retweet_propensity = j.at("retweet_propensity").get<double>();
    a.sociability = j.at("sociability").get<double>();
    a.willingness = j.at("willingness").get<double>();
    a.readiness_sensitivity = j.at("readiness_sensitivity").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line_no, e.what());
  }
  return a;
}

std::vector<AgentSpec> ReadAgents(const std::string& path) {
  std::vector<AgentSpec> out;
  const std::vector<std::string> lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(AgentFromJson(lines[i], path, i + 1));
  }
  return out;
}

std::vector<AgentSpec> DrawAgents(const SimConfig& config) {
  config.Validate();
  const auto chol = CholeskyFactor(TraitCorrelation(config));
  std::vector<AgentSpec> agents;
  agents.reserve(config.population);
  for (std::size_t i = 0; i < config.population; ++i) {
    Rng rng(MixSeed(MixSeed(config.seed, kStreamAgents), i));
    double eps[5], z[5];
    for (double& e : eps) e = rng.Normal();
    for (int r = 0; r < 5; ++r) {
      z[r] = 0.0;
      for (int c = 0; c <= r; ++c) z[r] += chol[r][c] * eps[c];
    }
    AgentSpec a;
    a.agent_id = PaddedId("u", i + 1);
    a.screen_name = PaddedId("user", i + 1);
    a.willingness = std::pow(NormalCdf(z[0]), config.willingness_shape);
    a.responsiveness = NormalCdf(z[1]);
    a.sociability = NormalCdf(z[2]);
    const double sa = config.activity_sigma;
    a.activity_rate = config.mean_activity * std::exp(sa * z[3] - 0.5 * sa * sa);
    const double sl = config.latency_sigma;
    a.latency_scale = config.mean_latency * std::exp(sl * z[4] - 0.5 * sl * sl);
    a.retweet_propensity = config.retweet_min + config.retweet_span * rng.Uniform();
    a.readiness_sensitivity = rng.Exponential(config.mean_readiness_sensitivity);

    const double phase = 24.0 * rng.Uniform();
    double total = 0.0;
    for (int h = 0; h < 24; ++h) {
      const double angle = 2.0 * std::numbers::pi * (h + 0.5 - phase) / 24.0;
      a.diurnal[h] = std::exp(config.diurnal_concentration * std::cos(angle) +
                              0.3 * rng.Normal());
      total += a.diurnal[h];
    }
    for (double& d : a.diurnal) d /= total;
    total = 0.0;
    for (double& d : a.weekday) {
      d = rng.Gamma(config.weekday_concentration);
      total += d;
    }
    for (double& d : a.weekday) d /= total;
    agents.push_back(std::move(a));
  }
  return agents;
}

double ExpectedPostCount(const AgentSpec& agent, Timestamp from, Timestamp to) {
  double total = 0.0;
  for (Timestamp t = from; t < to; t += kSecondsPerHour) {
    total += agent.HourlyIntensity(t) * static_cast<double>(kSecondsPerHour);
  }
  return total;
}

double TrueResponseProbability(const AgentSpec& agent,
                               const ResponseModel& model, Timestamp t,
                               std::optional<Timestamp> last_post) {
  double recency = 0.0;
  if (last_post) {
    const double inactivity =
        static_cast<double>(std::max<Timestamp>(0, t - *last_post));
    recency = std::exp(-inactivity / model.tau);
  }
  const double peak = *std::max_element(agent.diurnal.begin(), agent.diurnal.end());
  const double hour_weight = peak > 0.0 ? agent.diurnal[UtcHour(t)] / peak : 0.0;
  return Sigmoid(model.b0 + model.b1 * agent.willingness +
                 model.b2 * agent.readiness_sensitivity * recency +
                 model.b3 * agent.readiness_sensitivity * hour_weight);
}

Vocabulary Vocabulary::FromJsonText(std::string_view text,
                                    const std::string& source) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": expected a JSON object");
  Vocabulary v;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::vector<std::string> words;
    if (!it.value().is_array()) {
      throw ConfigError(source + ": '" + it.key() + "' must map to an array");
    }
    for (const auto& w : it.value()) {
      if (!w.is_string() || w.get<std::string>().empty()) {
        throw ConfigError(source + ": '" + it.key() +
                          "' contains a non-string or empty word");
      }
      words.push_back(w.get<std::string>());
    }
    if (words.empty()) {
      throw ConfigError(source + ": category '" + it.key() + "' has no words");
    }
    v.categories.emplace_back(it.key(), std::move(words));
  }
  return v;
}

std::string Vocabulary::ToJson() const {
  ordered_json j = ordered_json::object();
  for (const auto& [name, words] : categories) j[name] = words;
  return j.dump(2);
}

Vocabulary LoadVocabulary(const std::string& path) {
  return Vocabulary::FromJsonText(ReadFile(path), path);
}

bool RuleFilter::Matches(std::string_view text) const {
  const std::string lower = ToLower(text);
  return std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
    return lower.find(k) != std::string::npos;
  });
}

RuleFilter RuleFilter::FromJsonText(std::string_view text,
                                    const std::string& source) {
  RuleFilter f;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& k : j.at("keywords")) {
      f.keywords.push_back(ToLower(k.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source + ": rules need a 'keywords' string array (" +
                      e.what() + ")");
  }
  if (f.keywords.empty()) throw ConfigError(source + ": no keywords");
  return f;
}

RuleFilter LoadRules(const std::string& path) {
  return RuleFilter::FromJsonText(ReadFile(path), path);
}

World::World(SimConfig config, Vocabulary vocabulary)
    : config_(std::move(config)),
      vocabulary_(std::move(vocabulary)),
      generated_until_(config_.start_time) {
  config_.Validate();
  static const std::set<std::string> kSocial = {"social", "communication",
                                                "friends", "family"};
  for (std::size_t c = 0; c < vocabulary_.categories.size(); ++c) {
    (kSocial.count(vocabulary_.categories[c].first) ? social_categories_
                                                    : other_categories_)
        .push_back(c);
  }
  if (social_categories_.empty() || other_categories_.empty()) {
    throw ConfigError(
        "vocabulary needs a 'social' category and at least one other");
  }
  agents_ = DrawAgents(config_);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const AgentSpec& a = agents_[i];
    agent_index_.emplace(a.agent_id, i);
    Rng profile_rng(MixSeed(config_.seed, Fnv1a64(a.agent_id)));
    users_.push_back({a.agent_id, a.screen_name,
                      RandomWords(profile_rng, a.sociability, 6),
                      config_.start_time - 365 * kSecondsPerDay});
  }
  for (std::size_t p = 0; p < config_.peers; ++p) {
    users_.push_back({PaddedId("p", p + 1), PaddedId("peer", p + 1),
                      "frequent traveller", config_.start_time -
                                                400 * kSecondsPerDay});
  }
  post_times_.resize(agents_.size());
  pending_.resize(agents_.size());
  exposures_.resize(agents_.size());
}

std::optional<std::size_t> World::AgentIndex(const std::string& id) const {
  auto it = agent_index_.find(id);
  if (it == agent_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<ExposureRecord> World::exposures() const {
  std::vector<ExposureRecord> out;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    out.push_back({agents_[i].agent_id, exposures_[i]});
  }
  return out;
}

std::string World::RandomWords(Rng& rng, double sociability, int count) const {
  std::string text;
  const double social_share = 0.05 + 0.35 * sociability;
  for (int w = 0; w < count; ++w) {
    const std::vector<std::size_t>& pool =
        rng.Bernoulli(social_share) ? social_categories_ : other_categories_;
    const auto& words = vocabulary_.categories[pool[rng.Below(pool.size())]].second;
    if (!text.empty()) text.push_back(' ');
    text += words[rng.Below(words.size())];
  }
  return text;
}

void World::AdvanceTo(Timestamp t) {
  while (generated_until_ < t) {
    GenerateHour((generated_until_ - config_.start_time) / kSecondsPerHour);
    generated_until_ += kSecondsPerHour;
  }
}

void World::GenerateHour(std::int64_t hour) {
  const Timestamp hour_start = config_.start_time + hour * kSecondsPerHour;
  const std::string hour_tag = "-h" + std::to_string(hour) + "-";
  const double direct_rate = config_.direct_questions_per_day / 24.0;
  const double indirect_rate = config_.indirect_questions_per_day / 24.0;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const AgentSpec& a = agents_[i];
    Rng rng(MixSeed(MixSeed(MixSeed(config_.seed, kStreamHour), i),
                    static_cast<std::uint64_t>(hour)));
    auto& pending = pending_[i];
    auto add_pending = [&](PendingReply p) {
      auto pos = std::upper_bound(
          pending.begin(), pending.end(), p.ready,
          [](Timestamp r, const PendingReply& q) { return r < q.ready; });
      pending.insert(pos, std::move(p));
    };

    // Questions first so that replies can land later in the same hour.
    const std::uint64_t n_direct = rng.Poisson(direct_rate);
    for (std::uint64_t k = 0; k < n_direct; ++k) {
      const std::size_t peer = config_.population + rng.Below(config_.peers);
      PostRecord q;
      q.post_id = "q-" + a.agent_id + hour_tag + std::to_string(k);
      q.author_id = users_[peer].user_id;
      q.timestamp = hour_start + static_cast<Timestamp>(rng.Below(3600));
      q.text = Format(Pick(kDirectTemplates, rng), a.screen_name,
                      config_.keywords[rng.Below(config_.keywords.size())]);
      q.mentions = {a.agent_id};
      if (rng.Bernoulli(a.responsiveness)) {
        add_pending({q.timestamp + static_cast<Timestamp>(std::llround(
                                       rng.Exponential(a.latency_scale))),
                     q.post_id, peer});
      }
      posts_.push_back(std::move(q));
    }
    const std::uint64_t n_indirect = rng.Poisson(indirect_rate);
    for (std::uint64_t k = 0; k < n_indirect; ++k) {
      const std::size_t peer = config_.population + rng.Below(config_.peers);
      PostRecord q;
      q.post_id = "x-" + a.agent_id + hour_tag + std::to_string(k);
      q.author_id = users_[peer].user_id;
      q.timestamp = hour_start + static_cast<Timestamp>(rng.Below(3600));
      q.text = Format(Pick(kIndirectTemplates, rng),
                      config_.keywords[rng.Below(config_.keywords.size())]);
      exposures_[i].push_back(q.post_id);
      if (rng.Bernoulli(config_.indirect_reply_scale * a.willingness)) {
        add_pending({q.timestamp + static_cast<Timestamp>(std::llround(
                                       rng.Exponential(a.latency_scale))),
                     q.post_id, peer});
      }
      posts_.push_back(std::move(q));
    }

    const std::uint64_t n_posts = rng.Poisson(
        a.HourlyIntensity(hour_start) * static_cast<double>(kSecondsPerHour));
    std::vector<Timestamp> times(n_posts);
    for (Timestamp& t : times) {
      t = hour_start + static_cast<Timestamp>(rng.Below(3600));
    }
    std::sort(times.begin(), times.end());
    for (std::uint64_t k = 0; k < n_posts; ++k) {
      PostRecord p;
      p.post_id = a.agent_id + hour_tag + std::to_string(k);
      p.author_id = a.agent_id;
      p.timestamp = times[k];
      const int n_words = 5 + static_cast<int>(rng.Below(8));
      std::string words = RandomWords(rng, a.sociability, n_words);
      if (rng.Bernoulli(config_.keyword_post_probability)) {
        words += " at the " +
                 config_.keywords[rng.Below(config_.keywords.size())];
      }
      const bool retweet = rng.Bernoulli(a.retweet_propensity);
      const std::size_t peer = config_.population + rng.Below(config_.peers);
      if (!pending.empty() && pending.front().ready <= p.timestamp) {
        // The agent's next post after the reply delay becomes the reply.
        const PendingReply r = pending.front();
        pending.erase(pending.begin());
        p.text = "@" + users_[r.peer].screen_name + " " + words;
        p.in_reply_to_post = r.question_id;
        p.mentions = {users_[r.peer].user_id};
      } else if (retweet) {
        p.is_retweet = true;
        p.text = "RT @" + users_[peer].screen_name + ": " + words;
      } else {
        p.text = std::move(words);
      }
      post_times_[i].push_back(p.timestamp);
      posts_.push_back(std::move(p));
    }
  }
}

std::optional<Timestamp> World::LastPostAtOrBefore(std::size_t agent,
                                                   Timestamp t) const {
  const auto& times = post_times_[agent];
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return std::nullopt;
  return *std::prev(it);
}

Corpus Population::BuildCorpus() const {
  return Corpus::Build(users, posts, solicitations, exposures);
}

Population GeneratePopulation(const SimConfig& config,
                              const Vocabulary& vocabulary) {
  World world(config, vocabulary);
  world.AdvanceTo(config.end_time());

  Population pop;
  pop.config = config;
  pop.vocabulary = vocabulary;
  pop.agents = world.agents();
  pop.users = world.users();
  pop.posts = world.posts();
  pop.exposures = world.exposures();

  const std::size_t n = config.population;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng split(MixSeed(config.seed, kStreamSplit));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[split.Below(i)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(config.train_fraction * static_cast<double>(n)));
  std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> held(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(held.begin(), held.end());

  const Timestamp window_end =
      config.start_time + (config.days - 1) * kSecondsPerDay;
  const Timestamp window =
      config.solicitation_window_days * kSecondsPerDay;
  // Send times are distinct per agent and sorted, so the rows of one agent
  // are ordered in time.
  for (std::size_t i : train) {
    const AgentSpec& a = pop.agents[i];
    Rng rng(MixSeed(MixSeed(config.seed, kStreamSolicit), i));
    std::vector<Timestamp> times;
    while (times.size() < static_cast<std::size_t>(config.solicitations_per_agent)) {
      const Timestamp t =
          window_end - window +
          static_cast<Timestamp>(rng.Below(static_cast<std::uint64_t>(window)));
      if (std::find(times.begin(), times.end(), t) == times.end()) {
        times.push_back(t);
      }
    }
    std::sort(times.begin(), times.end());
    for (Timestamp t : times) {
      SolicitationRecord s;
      s.target_user = a.agent_id;
      s.sent_at = t;
      s.question_text = Format(Pick(kDirectTemplates, rng), a.screen_name,
                               config.keywords[rng.Below(config.keywords.size())]);
      const double p = TrueResponseProbability(
          a, config.response, s.sent_at, world.LastPostAtOrBefore(i, s.sent_at));
      s.responded = rng.Bernoulli(p);
      if (s.responded) {
        s.response_at = s.sent_at + 1 +
                        static_cast<Timestamp>(
                            std::llround(rng.Exponential(a.latency_scale)));
        s.response_text = "it's about a 20 minute wait";
      }
      pop.solicitations.push_back(std::move(s));
    }
  }
  for (std::size_t i : held) pop.candidate_ids.push_back(pop.agents[i].agent_id);
  return pop;
}

std::vector<std::string> WritePopulation(const Population& pop,
                                         const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& body) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    WriteFile(path, body);
    written.push_back(path);
  };
  std::string buf;
  for (const auto& u : pop.users) buf += UserToJsonLine(u) + "\n";
  write("users.jsonl", buf);
  buf.clear();
  for (const auto& p : pop.posts) buf += PostToJsonLine(p) + "\n";
  write("posts.jsonl", buf);
  buf.clear();
  for (const auto& s : pop.solicitations) buf += SolicitationToJsonLine(s) + "\n";
  write("solicitations.jsonl", buf);
  buf.clear();
  for (const auto& e : pop.exposures) buf += ExposureToJsonLine(e) + "\n";
  write("exposures.jsonl", buf);
  buf.clear();
  for (const auto& a : pop.agents) buf += AgentToJsonLine(a) + "\n";
  write("agents.jsonl", buf);
  buf.clear();
  for (const auto& id : pop.candidate_ids) buf += id + "\n";
  write("candidates.txt", buf);
  write("sim_config.json", pop.config.ToJson() + "\n");
  write("vocabulary.json", pop.vocabulary.ToJson() + "\n");
  return written;
}

}  // namespace solicit
