#include "solicit/corpus.h"

#include <algorithm>
#include <filesystem>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "solicit/error.h"

namespace solicit {

using nlohmann::json;

namespace {

bool IsHandleChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// Lowercased "@handle" tokens appearing in text.
std::vector<std::string> ExtractHandles(std::string_view text) {
  std::vector<std::string> handles;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '@') continue;
    if (i > 0 && IsHandleChar(text[i - 1])) continue;
    std::size_t j = i + 1;
    while (j < text.size() && IsHandleChar(text[j])) ++j;
    if (j > i + 1) handles.push_back(ToLower(text.substr(i + 1, j - i - 1)));
    i = j - 1;
  }
  return handles;
}

bool Addresses(const PostRecord& post, const UserRecord& subject) {
  if (std::find(post.mentions.begin(), post.mentions.end(), subject.user_id) !=
      post.mentions.end()) {
    return true;
  }
  if (subject.screen_name.empty()) return false;
  const std::string handle = ToLower(subject.screen_name);
  for (const std::string& h : ExtractHandles(post.text)) {
    if (h == handle) return true;
  }
  return false;
}

template <typename T>
T Require(const json& j, const char* key, const std::string& src,
          std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw ParseError(src, line, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(src, line, std::string("bad type for field '") + key + "'");
  }
}

template <typename T>
std::optional<T> Optional(const json& j, const char* key,
                          const std::string& src, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(src, line, std::string("bad type for field '") + key + "'");
  }
}

// Calls fn(json, line) for every non-blank line of a JSONL file.
template <typename Fn>
void ForEachJsonLine(const std::string& path, Fn&& fn) {
  const std::vector<std::string> lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, i + 1, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(path, i + 1, "expected a JSON object");
    fn(j, i + 1);
  }
}

bool ByTime(const PostRecord* a, const PostRecord* b) {
  if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
  return a->post_id < b->post_id;
}

}  // namespace

const char* PostClassName(PostClass c) {
  switch (c) {
    case PostClass::kDirectQuestion:
      return "direct_question";
    case PostClass::kIndirectQuestion:
      return "indirect_question";
    case PostClass::kNotQuestion:
      return "not_question";
  }
  return "unknown";
}

Corpus Corpus::Build(std::vector<UserRecord> users,
                     std::vector<PostRecord> posts,
                     std::vector<SolicitationRecord> solicitations,
                     std::optional<std::vector<ExposureRecord>> exposures) {
  Corpus c;
  c.users_ = std::move(users);
  c.posts_ = std::move(posts);
  c.solicitations_ = std::move(solicitations);

  std::unordered_map<std::string, std::vector<std::size_t>> by_handle;
  for (std::size_t i = 0; i < c.users_.size(); ++i) {
    const UserRecord& u = c.users_[i];
    if (u.user_id.empty()) throw IntegrityError("user with empty user_id");
    if (u.screen_name.empty()) {
      throw IntegrityError("user " + u.user_id + " has empty screen_name");
    }
    if (!c.user_index_.emplace(u.user_id, i).second) {
      throw IntegrityError("duplicate user_id " + u.user_id);
    }
    const std::string handle = ToLower(u.screen_name);
    c.screen_name_index_.emplace(handle, i);
    by_handle[handle].push_back(i);
  }

  for (std::size_t i = 0; i < c.posts_.size(); ++i) {
    const PostRecord& p = c.posts_[i];
    if (!c.post_index_.emplace(p.post_id, i).second) {
      throw IntegrityError("duplicate post_id " + p.post_id);
    }
    if (!c.user_index_.count(p.author_id)) {
      throw IntegrityError("post " + p.post_id + " has unknown author_id " +
                           p.author_id);
    }
    if (p.timestamp <= 0) {
      throw IntegrityError("post " + p.post_id + " has non-positive timestamp");
    }
    c.latest_timestamp_ = std::max(c.latest_timestamp_, p.timestamp);
  }

  for (const PostRecord& p : c.posts_) {
    c.timelines_[p.author_id].push_back(&p);
    if (p.in_reply_to_post) {
      if (const PostRecord* parent = c.FindPost(*p.in_reply_to_post)) {
        if (parent->timestamp > p.timestamp) {
          throw IntegrityError("post " + p.post_id +
                               " replies to later post " + parent->post_id);
        }
      }
      c.replies_[*p.in_reply_to_post].push_back(&p);
    }
    std::set<std::string> addressed;
    for (const std::string& m : p.mentions) {
      if (c.user_index_.count(m)) addressed.insert(m);
    }
    for (const std::string& h : ExtractHandles(p.text)) {
      auto it = by_handle.find(h);
      if (it == by_handle.end()) continue;
      for (std::size_t ui : it->second) addressed.insert(c.users_[ui].user_id);
    }
    for (const std::string& uid : addressed) {
      if (uid != p.author_id) c.addressing_[uid].push_back(&p);
    }
  }
  for (auto* index : {&c.timelines_, &c.addressing_, &c.replies_}) {
    for (auto& [key, list] : *index) std::sort(list.begin(), list.end(), ByTime);
  }

  for (const SolicitationRecord& s : c.solicitations_) {
    if (!c.user_index_.count(s.target_user)) {
      throw IntegrityError("solicitation targets unknown user " +
                           s.target_user);
    }
    if (s.responded != s.response_at.has_value()) {
      throw IntegrityError("solicitation to " + s.target_user +
                           ": responded must be set iff response_at is set");
    }
    if (s.response_at && *s.response_at < s.sent_at) {
      throw IntegrityError("solicitation to " + s.target_user +
                           ": response precedes question");
    }
  }

  if (exposures) {
    c.exposures_.emplace();
    for (ExposureRecord& e : *exposures) {
      if (!c.user_index_.count(e.user_id)) {
        throw IntegrityError("exposure list for unknown user " + e.user_id);
      }
      for (const std::string& pid : e.exposed_post_ids) {
        if (!c.post_index_.count(pid)) {
          throw IntegrityError("exposure list for " + e.user_id +
                               " references unknown post " + pid);
        }
      }
      auto& dst = (*c.exposures_)[e.user_id];
      dst.insert(dst.end(), e.exposed_post_ids.begin(),
                 e.exposed_post_ids.end());
    }
  }
  return c;
}

const UserRecord* Corpus::FindUser(const std::string& user_id) const {
  auto it = user_index_.find(user_id);
  return it == user_index_.end() ? nullptr : &users_[it->second];
}

const UserRecord* Corpus::FindUserByScreenName(
    const std::string& screen_name) const {
  auto it = screen_name_index_.find(ToLower(screen_name));
  return it == screen_name_index_.end() ? nullptr : &users_[it->second];
}

const PostRecord* Corpus::FindPost(const std::string& post_id) const {
  auto it = post_index_.find(post_id);
  return it == post_index_.end() ? nullptr : &posts_[it->second];
}

std::span<const PostRecord* const> Corpus::Timeline(
    const std::string& user_id) const {
  auto it = timelines_.find(user_id);
  if (it == timelines_.end()) return {};
  return it->second;
}

std::span<const PostRecord* const> Corpus::PostsAddressing(
    const std::string& user_id) const {
  auto it = addressing_.find(user_id);
  if (it == addressing_.end()) return {};
  return it->second;
}

std::span<const PostRecord* const> Corpus::RepliesTo(
    const std::string& post_id) const {
  auto it = replies_.find(post_id);
  if (it == replies_.end()) return {};
  return it->second;
}

const std::vector<std::string>* Corpus::Exposures(
    const std::string& user_id) const {
  if (!exposures_) return nullptr;
  auto it = exposures_->find(user_id);
  return it == exposures_->end() ? nullptr : &it->second;
}

std::vector<UserRecord> ReadUsers(const std::string& path) {
  std::vector<UserRecord> out;
  ForEachJsonLine(path, [&](const json& j, std::size_t line) {
    UserRecord u;
    u.user_id = Require<std::string>(j, "user_id", path, line);
    u.screen_name = Require<std::string>(j, "screen_name", path, line);
    u.profile_text =
        Optional<std::string>(j, "profile_text", path, line).value_or("");
    u.account_created_at =
        Optional<Timestamp>(j, "account_created_at", path, line).value_or(0);
    out.push_back(std::move(u));
  });
  return out;
}

std::vector<PostRecord> ReadPosts(const std::string& path) {
  std::vector<PostRecord> out;
  ForEachJsonLine(path, [&](const json& j, std::size_t line) {
    PostRecord p;
    p.post_id = Require<std::string>(j, "post_id", path, line);
    p.author_id = Require<std::string>(j, "author_id", path, line);
    p.timestamp = Require<Timestamp>(j, "timestamp", path, line);
    p.text = Require<std::string>(j, "text", path, line);
    p.is_retweet = Optional<bool>(j, "is_retweet", path, line).value_or(false);
    p.in_reply_to_post =
        Optional<std::string>(j, "in_reply_to_post", path, line);
    p.mentions = Optional<std::vector<std::string>>(j, "mentions", path, line)
                     .value_or(std::vector<std::string>{});
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<SolicitationRecord> ReadSolicitations(const std::string& path) {
  std::vector<SolicitationRecord> out;
  ForEachJsonLine(path, [&](const json& j, std::size_t line) {
    SolicitationRecord s;
    s.target_user = Require<std::string>(j, "target_user", path, line);
    s.question_text =
        Optional<std::string>(j, "question_text", path, line).value_or("");
    s.sent_at = Require<Timestamp>(j, "sent_at", path, line);
    s.responded = Require<bool>(j, "responded", path, line);
    s.response_at = Optional<Timestamp>(j, "response_at", path, line);
    s.response_text = Optional<std::string>(j, "response_text", path, line);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<ExposureRecord> ReadExposures(const std::string& path) {
  std::vector<ExposureRecord> out;
  ForEachJsonLine(path, [&](const json& j, std::size_t line) {
    ExposureRecord e;
    e.user_id = Require<std::string>(j, "user_id", path, line);
    e.exposed_post_ids =
        Require<std::vector<std::string>>(j, "exposed_post_ids", path, line);
    out.push_back(std::move(e));
  });
  return out;
}

Corpus LoadCorpus(const std::string& users_path, const std::string& posts_path,
                  const std::optional<std::string>& solicitations_path,
                  const std::optional<std::string>& exposures_path) {
  auto users = ReadUsers(users_path);
  auto posts = ReadPosts(posts_path);
  std::vector<SolicitationRecord> solicitations;
  if (solicitations_path) solicitations = ReadSolicitations(*solicitations_path);
  std::optional<std::vector<ExposureRecord>> exposures;
  if (exposures_path) exposures = ReadExposures(*exposures_path);
  return Corpus::Build(std::move(users), std::move(posts),
                       std::move(solicitations), std::move(exposures));
}

Corpus LoadCorpusDir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  auto optional_file = [&](const char* name) -> std::optional<std::string> {
    const fs::path p = base / name;
    if (fs::exists(p)) return p.string();
    return std::nullopt;
  };
  return LoadCorpus((base / "users.jsonl").string(),
                    (base / "posts.jsonl").string(),
                    optional_file("solicitations.jsonl"),
                    optional_file("exposures.jsonl"));
}

std::string UserToJsonLine(const UserRecord& u) {
  json j;
  j["user_id"] = u.user_id;
  j["screen_name"] = u.screen_name;
  j["profile_text"] = u.profile_text;
  j["account_created_at"] = u.account_created_at;
  return j.dump();
}

std::string PostToJsonLine(const PostRecord& p) {
  json j;
  j["post_id"] = p.post_id;
  j["author_id"] = p.author_id;
  j["timestamp"] = p.timestamp;
  j["text"] = p.text;
  j["is_retweet"] = p.is_retweet;
  j["in_reply_to_post"] =
      p.in_reply_to_post ? json(*p.in_reply_to_post) : json(nullptr);
  j["mentions"] = p.mentions;
  return j.dump();
}

std::string SolicitationToJsonLine(const SolicitationRecord& s) {
  json j;
  j["target_user"] = s.target_user;
  j["question_text"] = s.question_text;
  j["sent_at"] = s.sent_at;
  j["responded"] = s.responded;
  j["response_at"] = s.response_at ? json(*s.response_at) : json(nullptr);
  j["response_text"] =
      s.response_text ? json(*s.response_text) : json(nullptr);
  return j.dump();
}

std::string ExposureToJsonLine(const ExposureRecord& e) {
  json j;
  j["user_id"] = e.user_id;
  j["exposed_post_ids"] = e.exposed_post_ids;
  return j.dump();
}

PostClass ClassifyPost(const PostRecord& post, const UserRecord& subject) {
  if (post.text.find('?') == std::string::npos) return PostClass::kNotQuestion;
  return Addresses(post, subject) ? PostClass::kDirectQuestion
                                  : PostClass::kIndirectQuestion;
}

InteractionSummary DeriveInteractions(const Corpus& corpus,
                                      const UserRecord& user,
                                      std::optional<Timestamp> as_of) {
  auto visible = [&](const PostRecord* p) {
    return !as_of || p->timestamp <= *as_of;
  };
  // Earliest reply by the user to the post, if any.
  auto user_reply = [&](const PostRecord& q) -> const PostRecord* {
    for (const PostRecord* r : corpus.RepliesTo(q.post_id)) {
      if (r->author_id == user.user_id && visible(r)) return r;
    }
    return nullptr;
  };

  InteractionSummary s;
  for (const PostRecord* q : corpus.PostsAddressing(user.user_id)) {
    if (!visible(q) || q->author_id == user.user_id) continue;
    if (ClassifyPost(*q, user) != PostClass::kDirectQuestion) continue;
    ++s.direct_questions_received;
    if (const PostRecord* r = user_reply(*q)) {
      ++s.responses_to_direct;
      s.response_latencies.push_back(
          static_cast<double>(r->timestamp - q->timestamp));
    }
  }

  auto count_indirect = [&](const PostRecord* q) {
    if (q->author_id == user.user_id || !visible(q)) return;
    if (ClassifyPost(*q, user) != PostClass::kIndirectQuestion) return;
    ++s.indirect_questions_exposed;
    if (user_reply(*q)) ++s.responses_to_indirect;
  };

  if (const std::vector<std::string>* listed =
          corpus.Exposures(user.user_id)) {
    std::unordered_set<std::string> seen;
    for (const std::string& id : *listed) {
      if (!seen.insert(id).second) continue;
      if (const PostRecord* q = corpus.FindPost(id)) count_indirect(q);
    }
    return s;
  }

  // Reply neighbourhood: authors the user replied to, and authors who
  // replied to the user.
  std::set<std::string> neighbours;
  for (const PostRecord* p : corpus.Timeline(user.user_id)) {
    if (!visible(p)) continue;
    if (p->in_reply_to_post) {
      if (const PostRecord* parent = corpus.FindPost(*p->in_reply_to_post)) {
        if (parent->author_id != user.user_id) {
          neighbours.insert(parent->author_id);
        }
      }
    }
    for (const PostRecord* r : corpus.RepliesTo(p->post_id)) {
      if (r->author_id != user.user_id && visible(r)) {
        neighbours.insert(r->author_id);
      }
    }
  }
  for (const std::string& author : neighbours) {
    for (const PostRecord* q : corpus.Timeline(author)) count_indirect(q);
  }
  return s;
}

}  // namespace solicit
