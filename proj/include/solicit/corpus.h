#ifndef SOLICIT_CORPUS_H_
#define SOLICIT_CORPUS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "solicit/util.h"

namespace solicit {

struct UserRecord {
  std::string user_id;
  std::string screen_name;
  std::string profile_text;
  Timestamp account_created_at = 0;
};

struct PostRecord {
  std::string post_id;
  std::string author_id;
  Timestamp timestamp = 0;
  std::string text;
  bool is_retweet = false;
  std::optional<std::string> in_reply_to_post;
  std::vector<std::string> mentions;
};

// One question sent to a stranger and its outcome. `responded` holds iff
// `response_at` is set.
struct SolicitationRecord {
  std::string target_user;
  std::string question_text;
  Timestamp sent_at = 0;
  bool responded = false;
  std::optional<Timestamp> response_at;
  std::optional<std::string> response_text;
};

// Explicit list of indirect questions a user was exposed to.
struct ExposureRecord {
  std::string user_id;
  std::vector<std::string> exposed_post_ids;
};

struct InteractionSummary {
  std::size_t direct_questions_received = 0;
  std::size_t responses_to_direct = 0;
  // Seconds from question to the user's first reply, one per answered
  // direct question, in question order.
  std::vector<double> response_latencies;
  std::size_t indirect_questions_exposed = 0;
  std::size_t responses_to_indirect = 0;

  bool operator==(const InteractionSummary&) const = default;
};

enum class PostClass { kDirectQuestion, kIndirectQuestion, kNotQuestion };

const char* PostClassName(PostClass c);

// In-memory, immutable corpus. Posts are owned by the corpus and referenced by
// pointer from the per-user indexes, so the type is move-only.
class Corpus {
 public:
  // Validates and indexes the records. Throws IntegrityError on duplicate ids,
  // dangling author/target references or reply-order violations.
  static Corpus Build(std::vector<UserRecord> users,
                      std::vector<PostRecord> posts,
                      std::vector<SolicitationRecord> solicitations = {},
                      std::optional<std::vector<ExposureRecord>> exposures = {});

  Corpus(Corpus&&) = default;
  Corpus& operator=(Corpus&&) = default;
  Corpus(const Corpus&) = delete;
  Corpus& operator=(const Corpus&) = delete;

  const std::vector<UserRecord>& users() const { return users_; }
  const std::vector<PostRecord>& posts() const { return posts_; }
  const std::vector<SolicitationRecord>& solicitations() const {
    return solicitations_;
  }

  const UserRecord* FindUser(const std::string& user_id) const;
  const UserRecord* FindUserByScreenName(const std::string& screen_name) const;
  const PostRecord* FindPost(const std::string& post_id) const;

  // Posts authored by the user, ascending by timestamp (ties by post_id).
  std::span<const PostRecord* const> Timeline(const std::string& user_id) const;

  // Posts by other users that mention the user, via `mentions` or an
  // "@screen_name" handle in the text. Ascending by timestamp.
  std::span<const PostRecord* const> PostsAddressing(
      const std::string& user_id) const;

  // Replies (posts whose in_reply_to_post is `post_id`), ascending.
  std::span<const PostRecord* const> RepliesTo(const std::string& post_id) const;

  // Explicit exposure list for the user, if the corpus carries one.
  const std::vector<std::string>* Exposures(const std::string& user_id) const;

  Timestamp latest_timestamp() const { return latest_timestamp_; }

 private:
  Corpus() = default;

  std::vector<UserRecord> users_;
  std::vector<PostRecord> posts_;
  std::vector<SolicitationRecord> solicitations_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> screen_name_index_;
  std::unordered_map<std::string, std::size_t> post_index_;
  std::unordered_map<std::string, std::vector<const PostRecord*>> timelines_;
  std::unordered_map<std::string, std::vector<const PostRecord*>> addressing_;
  std::unordered_map<std::string, std::vector<const PostRecord*>> replies_;
  std::optional<std::unordered_map<std::string, std::vector<std::string>>>
      exposures_;
  Timestamp latest_timestamp_ = 0;
};

// Reads newline-delimited JSON files. Blank lines are skipped. Throws
// ParseError (with the 1-based line number) or IntegrityError.
Corpus LoadCorpus(const std::string& users_path, const std::string& posts_path,
                  const std::optional<std::string>& solicitations_path = {},
                  const std::optional<std::string>& exposures_path = {});

// Loads users.jsonl/posts.jsonl and, when present, solicitations.jsonl and
// exposures.jsonl from a directory.
Corpus LoadCorpusDir(const std::string& dir);

std::vector<UserRecord> ReadUsers(const std::string& path);
std::vector<PostRecord> ReadPosts(const std::string& path);
std::vector<SolicitationRecord> ReadSolicitations(const std::string& path);
std::vector<ExposureRecord> ReadExposures(const std::string& path);

std::string UserToJsonLine(const UserRecord& u);
std::string PostToJsonLine(const PostRecord& p);
std::string SolicitationToJsonLine(const SolicitationRecord& s);
std::string ExposureToJsonLine(const ExposureRecord& e);

// A post is a question iff it contains '?'. It is a direct question for the
// subject when it also mentions the subject (id in `mentions` or an
// "@screen_name" handle, case-insensitive, at a handle boundary).
PostClass ClassifyPost(const PostRecord& post, const UserRecord& subject);

// Derives the subject's question/answer history. When `as_of` is given only
// posts with timestamp <= as_of are considered. Replies are matched through
// in_reply_to_post only. Indirect exposure uses the corpus exposure list when
// it has one for the user, otherwise the question posts of the user's reply
// neighbourhood that do not address the user.
InteractionSummary DeriveInteractions(const Corpus& corpus,
                                      const UserRecord& user,
                                      std::optional<Timestamp> as_of = {});

}  // namespace solicit

#endif  // SOLICIT_CORPUS_H_
