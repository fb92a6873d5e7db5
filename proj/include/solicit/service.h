#ifndef SOLICIT_SERVICE_H_
#define SOLICIT_SERVICE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "solicit/corpus.h"
#include "solicit/features.h"
#include "solicit/model.h"
#include "solicit/recommend.h"
#include "solicit/simulator.h"

namespace solicit {

enum class OperatorMode { kManual, kAuto, kMixed };

const char* OperatorModeName(OperatorMode mode);
// Throws ServiceError(400) for anything but manual, auto or mixed.
OperatorMode ParseOperatorMode(const std::string& name);

// A request the session refuses; `status` is the HTTP status to report.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct SessionOptions {
  // Directory written by WritePopulation.
  std::string population_dir;
  OperatorMode mode = OperatorMode::kManual;
  // Questions sent per tick in auto mode.
  std::size_t auto_budget = 5;
  IntervalConstraints constraints;
  // Unanswered questions are closed as no-response after this long.
  Timestamp response_window = 48 * kSecondsPerHour;
  // Posts this recent feed the candidate list.
  Timestamp candidate_window = 48 * kSecondsPerHour;
  // Seeds the engagement outcomes.
  std::uint64_t seed = 42;
  // Appends one JSON line per session event when set.
  std::optional<std::string> log_path;
};

enum class EngagementStatus { kPending, kResponded, kNoResponse };

const char* EngagementStatusName(EngagementStatus status);

struct Engagement {
  std::size_t id = 0;
  std::string user_id;
  std::string question;
  Timestamp sent_at = 0;
  std::string source;  // "operator" or "auto"
  EngagementStatus status = EngagementStatus::kPending;
  // Drawn at send time; revealed once the clock reaches it.
  std::optional<Timestamp> response_at;
  std::optional<std::string> response_text;
  std::optional<Timestamp> closed_at;
};

// One simulated deployment driven by explicit clock ticks. Mutations are
// serialized; reads share a consistent snapshot and never change state.
class Session {
 public:
  // Regenerates the world from the population's sim_config.json and
  // vocabulary.json up to its end time, where the clock starts. Throws
  // ConfigError when the model's features are not produced by `extractor`.
  Session(SessionOptions options, TrainedModel model,
          FeatureExtractor extractor, RuleFilter rules);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Timestamp clock() const;
  OperatorMode mode() const;
  const std::string& id() const { return id_; }

  // Rule-matching posts by agents with since < timestamp <= clock, ascending,
  // at most `limit` (extended to the end of the last timestamp).
  nlohmann::json Stream(std::optional<Timestamp> since,
                        std::size_t limit = 200) const;
  // Rule-matching posts of the candidate window and their authors, ranked.
  nlohmann::json Candidates() const;
  // Throws ServiceError(404) for unknown users.
  nlohmann::json UserProfile(const std::string& user_id) const;
  nlohmann::json Engagements() const;
  nlohmann::json Report() const;

  // Ranks the current candidates and keeps the selection for mixed mode.
  nlohmann::json RecommendNow(std::optional<double> min_fraction,
                              std::optional<std::size_t> min_length);
  // Operator send. 409 in auto mode, for repeated users and, in mixed mode,
  // for users outside the current recommendation; 404 for unknown users; 400
  // for an empty question.
  nlohmann::json Engage(const std::string& user_id, const std::string& question);
  nlohmann::json SetMode(const std::string& mode);
  // Advances the clock, resolves due responses and, in auto mode, sends to
  // the recommended candidates. 400 for negative seconds.
  nlohmann::json Tick(std::int64_t seconds);

 private:
  struct Scored {
    std::string user_id;
    double probability = 0.0;
  };

  void RebuildCorpus();
  std::vector<const PostRecord*> FilteredPosts(Timestamp after,
                                               Timestamp until) const;
  std::vector<std::string> CandidateIds() const;
  double Score(const UserRecord& user) const;
  RankedList RankedCandidates() const;
  IntervalSelection SelectLocked(const IntervalConstraints& constraints) const;
  Engagement& SendLocked(const std::string& user_id, const std::string& question,
                         const std::string& source);
  std::size_t ResolveLocked();
  void Log(const nlohmann::json& event);
  nlohmann::json EngagementJson(const Engagement& e) const;

  mutable std::shared_mutex mutex_;
  SessionOptions options_;
  TrainedModel model_;
  FeatureExtractor extractor_;
  RuleFilter rules_;
  std::vector<std::size_t> model_columns_;
  std::string id_;
  std::unique_ptr<World> world_;
  std::vector<SolicitationRecord> prior_solicitations_;
  std::unique_ptr<Corpus> corpus_;
  RankedList training_ranked_;
  Timestamp clock_ = 0;
  OperatorMode mode_;
  std::vector<Engagement> engagements_;
  std::unordered_map<std::string, std::size_t> engaged_;
  std::vector<std::string> recommendation_;
  nlohmann::json mode_log_ = nlohmann::json::array();
};

// HTTP front end for a session. Routes: GET /api/stream, /api/candidates,
// /api/users/{id}, /api/engagements, /api/report; POST /api/recommend,
// /api/engage, /api/mode, /api/tick. Errors are {"error": message}.
class Server {
 public:
  explicit Server(Session& session);
  ~Server();

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws ConfigError when the port is taken.
  int Start(const std::string& host, int port);
  // Serves on the calling thread until Stop().
  void Run(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace solicit

#endif  // SOLICIT_SERVICE_H_
