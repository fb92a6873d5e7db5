#include "solicit/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "solicit/error.h"
#include "test_support.h"

namespace solicit {
namespace {

using ::solicit::testing::Gen;
using ::solicit::testing::TempDir;

UserRecord User(const std::string& id, const std::string& screen) {
  return UserRecord{id, screen, "", 0};
}

PostRecord Post(const std::string& id, const std::string& author, Timestamp t,
                const std::string& text,
                std::optional<std::string> reply_to = std::nullopt,
                std::vector<std::string> mentions = {}) {
  PostRecord p;
  p.post_id = id;
  p.author_id = author;
  p.timestamp = t;
  p.text = text;
  p.in_reply_to_post = std::move(reply_to);
  p.mentions = std::move(mentions);
  return p;
}

TEST(CorpusTest, TimelinesAreGroupedPerAuthor) {
  std::vector<UserRecord> users = {User("a", "alice"), User("b", "bob")};
  std::vector<PostRecord> posts = {
      Post("p1", "a", 30, "one"), Post("p2", "b", 10, "two"),
      Post("p3", "a", 10, "three"), Post("p4", "a", 20, "four"),
      Post("p5", "b", 5, "five")};
  const Corpus corpus = Corpus::Build(users, posts);
  ASSERT_EQ(corpus.Timeline("a").size(), 3u);
  ASSERT_EQ(corpus.Timeline("b").size(), 2u);
  EXPECT_EQ(corpus.Timeline("a")[0]->post_id, "p3");
  EXPECT_EQ(corpus.Timeline("a")[2]->post_id, "p1");
  EXPECT_TRUE(corpus.solicitations().empty());
}

TEST(CorpusTest, DuplicatePostIdNamesTheId) {
  std::vector<UserRecord> users = {User("a", "alice")};
  std::vector<PostRecord> posts = {Post("dup-7", "a", 1, "x"),
                                   Post("dup-7", "a", 2, "y")};
  try {
    Corpus::Build(users, posts);
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("dup-7"), std::string::npos);
  }
}

TEST(CorpusTest, DanglingAuthorIsRejected) {
  EXPECT_THROW(Corpus::Build({User("a", "alice")}, {Post("p", "zz", 1, "x")}),
               IntegrityError);
}

TEST(CorpusTest, LoadsJsonlAndReportsLineOfBadRecord) {
  TempDir dir;
  WriteFile(dir.File("users.jsonl"),
            UserToJsonLine(User("a", "alice")) + "\n\n" +
                UserToJsonLine(User("b", "bob")) + "\n");
  WriteFile(dir.File("posts.jsonl"),
            PostToJsonLine(Post("p1", "a", 1, "hi")) + "\n" +
                PostToJsonLine(Post("p2", "b", 2, "yo")) + "\n");
  const Corpus corpus = LoadCorpus(dir.File("users.jsonl"), dir.File("posts.jsonl"));
  EXPECT_EQ(corpus.users().size(), 2u);
  EXPECT_EQ(corpus.posts().size(), 2u);
  EXPECT_TRUE(corpus.solicitations().empty());

  WriteFile(dir.File("bad.jsonl"),
            PostToJsonLine(Post("p1", "a", 1, "hi")) + "\n{not json\n");
  try {
    ReadPosts(dir.File("bad.jsonl"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CorpusTest, JsonlRoundTrip) {
  PostRecord p = Post("p1", "a", 42, "@bob how long?", std::string("q0"), {"b"});
  p.is_retweet = true;
  TempDir dir;
  WriteFile(dir.File("posts.jsonl"), PostToJsonLine(p) + "\n");
  const auto back = ReadPosts(dir.File("posts.jsonl"));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].post_id, "p1");
  EXPECT_EQ(back[0].timestamp, 42);
  EXPECT_TRUE(back[0].is_retweet);
  EXPECT_EQ(back[0].in_reply_to_post, std::optional<std::string>("q0"));
  EXPECT_EQ(back[0].mentions, std::vector<std::string>{"b"});

  SolicitationRecord s;
  s.target_user = "a";
  s.question_text = "?";
  s.sent_at = 10;
  s.responded = true;
  s.response_at = 20;
  s.response_text = "ok";
  WriteFile(dir.File("s.jsonl"), SolicitationToJsonLine(s) + "\n");
  const auto sb = ReadSolicitations(dir.File("s.jsonl"));
  ASSERT_EQ(sb.size(), 1u);
  EXPECT_EQ(sb[0].response_at, std::optional<Timestamp>(20));
}

TEST(ClassifyPostTest, Examples) {
  const UserRecord bob = User("b", "bob");
  EXPECT_EQ(ClassifyPost(Post("1", "a", 0, "@bob how long is the line?"), bob),
            PostClass::kDirectQuestion);
  EXPECT_EQ(ClassifyPost(Post("2", "a", 0, "anyone know the wait at JFK?"), bob),
            PostClass::kIndirectQuestion);
  EXPECT_EQ(ClassifyPost(Post("3", "a", 0, "boarding now!"), bob),
            PostClass::kNotQuestion);
  EXPECT_EQ(ClassifyPost(Post("4", "a", 0, "any news?", std::nullopt, {"b"}), bob),
            PostClass::kDirectQuestion);
  // A longer handle that merely starts with the screen name does not count.
  EXPECT_EQ(ClassifyPost(Post("5", "a", 0, "@bobby are you there?"), bob),
            PostClass::kIndirectQuestion);
}

TEST(DeriveInteractionsTest, CountsDirectQuestionsAndLatencies) {
  std::vector<UserRecord> users = {User("a", "alice"), User("b", "bob")};
  std::vector<PostRecord> posts;
  const Timestamp lat[] = {120, 240, 240};
  for (int i = 0; i < 6; ++i) {
    const std::string q = "q" + std::to_string(i);
    posts.push_back(Post(q, "a", 1000 * (i + 1), "@bob question " + q + "?"));
    if (i < 3) {
      posts.push_back(Post("r" + std::to_string(i), "b", 1000 * (i + 1) + lat[i],
                           "answer", q));
    }
  }
  const Corpus corpus = Corpus::Build(users, posts);
  const InteractionSummary s = DeriveInteractions(corpus, users[1]);
  EXPECT_EQ(s.direct_questions_received, 6u);
  EXPECT_EQ(s.responses_to_direct, 3u);
  EXPECT_EQ(s.response_latencies, (std::vector<double>{120, 240, 240}));

  // Only questions and replies visible at `as_of` count.
  const InteractionSummary early = DeriveInteractions(corpus, users[1], 2100);
  EXPECT_EQ(early.direct_questions_received, 2u);
  EXPECT_EQ(early.responses_to_direct, 1u);
}

TEST(DeriveInteractionsTest, EmptyHistory) {
  std::vector<UserRecord> users = {User("a", "alice"), User("b", "bob")};
  const Corpus corpus = Corpus::Build(users, {Post("p", "a", 1, "hello")});
  EXPECT_EQ(DeriveInteractions(corpus, users[1]), InteractionSummary{});
}

TEST(DeriveInteractionsTest, ExplicitExposureList) {
  std::vector<UserRecord> users = {User("a", "alice"), User("b", "bob")};
  std::vector<PostRecord> posts = {
      Post("x1", "a", 1, "wait at the gate?"), Post("x2", "a", 2, "delays?"),
      Post("x3", "a", 3, "security line?"), Post("x4", "a", 4, "lounge open?"),
      Post("r1", "b", 9, "20 min", std::string("x2"))};
  const Corpus corpus = Corpus::Build(
      users, posts, {},
      std::vector<ExposureRecord>{{"b", {"x1", "x2", "x3", "x4"}}});
  const InteractionSummary s = DeriveInteractions(corpus, users[1]);
  EXPECT_EQ(s.indirect_questions_exposed, 4u);
  EXPECT_EQ(s.responses_to_indirect, 1u);
}

TEST(DeriveInteractionsTest, NeighbourhoodExposureWithoutList) {
  std::vector<UserRecord> users = {User("a", "alice"), User("b", "bob"),
                                   User("c", "carol")};
  std::vector<PostRecord> posts = {
      Post("a1", "a", 1, "hello"), Post("b1", "b", 2, "hi", std::string("a1")),
      Post("a2", "a", 3, "anyone at JFK?"), Post("c1", "c", 4, "anyone at LAX?")};
  const Corpus corpus = Corpus::Build(users, posts);
  const InteractionSummary s = DeriveInteractions(corpus, users[1]);
  EXPECT_EQ(s.indirect_questions_exposed, 1u);  // only alice is a neighbour
  EXPECT_EQ(s.responses_to_indirect, 0u);
}

// Property: on random reply graphs every latency equals reply time minus
// question time, and each (post, subject) pair gets exactly one class.
TEST(DeriveInteractionsTest, RandomLatenciesMatchRejoinedIds) {
  Gen gen(7);
  for (int round = 0; round < 30; ++round) {
    std::vector<UserRecord> users = {User("a", "alice"), User("b", "bob")};
    std::vector<PostRecord> posts;
    std::vector<double> expected;
    const int nq = gen.Int(0, 12);
    for (int i = 0; i < nq; ++i) {
      const Timestamp t = 10000 * (i + 1);
      const std::string q = "q" + std::to_string(i);
      posts.push_back(Post(q, "a", t, "@bob anything " + std::to_string(i) + "?"));
      if (gen.Coin()) {
        const Timestamp lat = gen.Int(1, 9000);
        posts.push_back(Post("r" + std::to_string(i), "b", t + lat, "sure", q));
        expected.push_back(static_cast<double>(lat));
      }
    }
    const Corpus corpus = Corpus::Build(users, posts);
    const InteractionSummary s = DeriveInteractions(corpus, users[1]);
    EXPECT_EQ(s.direct_questions_received, static_cast<std::size_t>(nq));
    EXPECT_EQ(s.response_latencies, expected);
    EXPECT_EQ(DeriveInteractions(corpus, users[1]), s);
    for (const auto& p : corpus.posts()) {
      const PostClass c = ClassifyPost(p, users[1]);
      const int count = (c == PostClass::kDirectQuestion) +
                        (c == PostClass::kIndirectQuestion) +
                        (c == PostClass::kNotQuestion);
      EXPECT_EQ(count, 1);
    }
    for (const auto& u : users) {
      const auto tl = corpus.Timeline(u.user_id);
      EXPECT_TRUE(std::is_sorted(tl.begin(), tl.end(),
                                 [](const PostRecord* x, const PostRecord* y) {
                                   return x->timestamp < y->timestamp;
                                 }));
    }
  }
}

}  // namespace
}  // namespace solicit
