#ifndef SOLICIT_SIMULATOR_H_
#define SOLICIT_SIMULATOR_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "solicit/corpus.h"
#include "solicit/stats.h"

namespace solicit {

// Ground-truth response model:
// p = sigmoid(b0 + b1 w + b2 a exp(-inactivity / tau) + b3 a d(hour) / max d).
struct ResponseModel {
  double b0 = -2.2;
  double b1 = 3.5;
  double b2 = 1.2;
  double b3 = 1.0;
  double tau = 21600.0;
};

struct SimConfig {
  std::size_t population = 1000;
  int days = 30;
  std::uint64_t seed = 42;
  Timestamp start_time = 1338768000;  // 2012-06-04 00:00 UTC, a Monday

  double mean_activity = 5.0;  // posts per day
  double activity_sigma = 0.5;
  double mean_latency = 1800.0;
  double latency_sigma = 0.8;
  // w = Phi(z)^shape; larger shapes skew willingness towards 0.
  double willingness_shape = 3.0;
  double mean_readiness_sensitivity = 0.4;
  double diurnal_concentration = 1.5;
  double weekday_concentration = 20.0;

  double corr_w_rho = 0.95;
  double corr_w_s = 0.5;
  double corr_w_activity = 0.3;
  double corr_w_latency = -0.5;
  // Defaults to corr_w_rho * corr_w_s (one-factor structure).
  std::optional<double> corr_rho_s;

  std::size_t peers = 50;
  double direct_questions_per_day = 2.0;
  double indirect_questions_per_day = 1.0;
  // Chance of answering an exposed indirect question is this times w.
  double indirect_reply_scale = 0.5;
  double keyword_post_probability = 0.05;
  double retweet_min = 0.05;
  double retweet_span = 0.4;

  double train_fraction = 0.5;
  int solicitation_window_days = 7;
  // Prior solicitations per training-pool agent, at distinct times.
  int solicitations_per_agent = 3;
  int live_hour = 14;
  ResponseModel response;

  std::vector<std::string> keywords = {"airport"};

  // Throws ConfigError for out-of-range knobs or a correlation matrix that is
  // not positive semidefinite.
  void Validate() const;
  Timestamp end_time() const { return start_time + days * kSecondsPerDay; }
  Timestamp live_time() const {
    return start_time + (days - 1) * kSecondsPerDay + live_hour * kSecondsPerHour;
  }
  std::string ToJson() const;
  static SimConfig FromJson(std::string_view text,
                            const std::string& source = "sim_config");
  std::string Digest() const;
};

// Correlation matrix over the latent normals (w, rho, s, activity, latency).
std::array<std::array<double, 5>, 5> TraitCorrelation(const SimConfig& config);

// Lower Cholesky factor; ConfigError if the matrix is not positive
// semidefinite.
std::array<std::array<double, 5>, 5> CholeskyFactor(
    const std::array<std::array<double, 5>, 5>& m);

struct AgentSpec {
  std::string agent_id;
  std::string screen_name;
  double activity_rate = 0.0;
  std::array<double, 24> diurnal{};
  std::array<double, 7> weekday{};  // 0 = Sunday
  double responsiveness = 0.0;
  double latency_scale = 0.0;
  double retweet_propensity = 0.0;
  double sociability = 0.0;
  double willingness = 0.0;
  double readiness_sensitivity = 0.0;

  // Expected posts per second during the hour starting at `t`.
  double HourlyIntensity(Timestamp t) const;
};

std::string AgentToJsonLine(const AgentSpec& a);
AgentSpec AgentFromJson(std::string_view line, const std::string& source,
                        std::size_t line_no);
std::vector<AgentSpec> ReadAgents(const std::string& path);

// Draws the agents of a population (deterministic in config.seed).
std::vector<AgentSpec> DrawAgents(const SimConfig& config);

// Expected number of organic posts in [from, to) for whole hours.
double ExpectedPostCount(const AgentSpec& agent, Timestamp from, Timestamp to);

double TrueResponseProbability(const AgentSpec& agent,
                               const ResponseModel& model, Timestamp t,
                               std::optional<Timestamp> last_post);

// Category-tagged vocabulary, in file order.
struct Vocabulary {
  std::vector<std::pair<std::string, std::vector<std::string>>> categories;

  static Vocabulary FromJsonText(std::string_view text,
                                 const std::string& source = "vocabulary");
  std::string ToJson() const;
};
Vocabulary LoadVocabulary(const std::string& path);

// Case-insensitive keyword filter standing in for domain rules.
struct RuleFilter {
  std::vector<std::string> keywords;
  bool Matches(std::string_view text) const;
  static RuleFilter FromJsonText(std::string_view text,
                                 const std::string& source = "rules");
};
RuleFilter LoadRules(const std::string& path);

// Hour-by-hour generator of a platform population. Every hour of every agent
// draws from its own seeded stream, so advancing in one step or many yields
// the same posts.
class World {
 public:
  World(SimConfig config, Vocabulary vocabulary);

  const SimConfig& config() const { return config_; }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  // Agents first, then the peer accounts that ask questions.
  const std::vector<UserRecord>& users() const { return users_; }
  const std::vector<PostRecord>& posts() const { return posts_; }
  std::vector<ExposureRecord> exposures() const;
  Timestamp generated_until() const { return generated_until_; }
  std::optional<std::size_t> AgentIndex(const std::string& id) const;

  // Generates every whole hour that starts before `t`.
  void AdvanceTo(Timestamp t);

  // Latest post time of the agent at or before t.
  std::optional<Timestamp> LastPostAtOrBefore(std::size_t agent,
                                              Timestamp t) const;

 private:
  struct PendingReply {
    Timestamp ready = 0;
    std::string question_id;
    std::size_t peer = 0;
  };

  void GenerateHour(std::int64_t hour);
  std::string RandomWords(Rng& rng, double sociability, int count) const;

  SimConfig config_;
  Vocabulary vocabulary_;
  std::vector<std::size_t> social_categories_;
  std::vector<std::size_t> other_categories_;
  std::vector<AgentSpec> agents_;
  std::vector<UserRecord> users_;
  std::unordered_map<std::string, std::size_t> agent_index_;
  std::vector<PostRecord> posts_;
  std::vector<std::vector<Timestamp>> post_times_;
  std::vector<std::vector<PendingReply>> pending_;
  std::vector<std::vector<std::string>> exposures_;
  Timestamp generated_until_;
};

struct Population {
  SimConfig config;
  Vocabulary vocabulary;
  std::vector<AgentSpec> agents;
  std::vector<UserRecord> users;
  std::vector<PostRecord> posts;
  std::vector<ExposureRecord> exposures;
  std::vector<SolicitationRecord> solicitations;
  std::vector<std::string> candidate_ids;

  Corpus BuildCorpus() const;
};

// Generates the timelines over the configured days, the prior solicitations
// of the training pool and the list of held-out candidates.
Population GeneratePopulation(const SimConfig& config,
                              const Vocabulary& vocabulary);

// users/posts/solicitations/exposures/agents .jsonl, candidates.txt,
// sim_config.json and vocabulary.json. Returns the written paths.
std::vector<std::string> WritePopulation(const Population& population,
                                         const std::string& dir);

}  // namespace solicit

#endif  // SOLICIT_SIMULATOR_H_
