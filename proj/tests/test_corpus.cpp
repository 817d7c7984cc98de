#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ipop/corpus.hpp"
#include "ipop/rng.hpp"
#include "support/oracles.hpp"

using namespace ipop;

namespace {

Post make_post(std::string id, std::int64_t likes, std::int64_t age_days, std::int64_t ref = 1'700'000'000) {
  Post p;
  p.post_id = std::move(id);
  p.user_id = "u";
  p.likes = likes;
  p.upload_time = ref - age_days * kSecondsPerDay;
  return p;
}

}  // namespace

TEST(Corpus, ParsesRecordsAndReportsBadLines) {
  std::istringstream in(
      R"({"post_id":"p1","user_id":"u1","upload_time":100,"likes":341,"caption":"hi #Cat","media_count":1,"is_video":false})"
      "\n\n"
      R"({"post_id":"p2","user_id":"u1","upload_time":"soon","likes":3,"caption":"","media_count":1,"is_video":false})"
      "\n"
      "not json\n"
      R"({"post_id":"p1","user_id":"u2","upload_time":5,"likes":3,"caption":"","media_count":1,"is_video":false})"
      "\n"
      R"({"post_id":"p3","user_id":"u1","upload_time":5,"likes":-1,"caption":"","media_count":1,"is_video":false})"
      "\n");
  const ParseResult r = parse_posts(in);
  ASSERT_EQ(r.posts.size(), 1u);
  EXPECT_EQ(r.posts[0].post_id, "p1");
  EXPECT_EQ(r.posts[0].likes, 341);
  ASSERT_EQ(r.diagnostics.size(), 4u);
  EXPECT_EQ(r.diagnostics[0].line, 3u);
  EXPECT_EQ(r.diagnostics[1].line, 4u);
  EXPECT_EQ(r.diagnostics[2].line, 5u);
  EXPECT_NE(r.diagnostics[2].message.find("duplicate"), std::string::npos);
  EXPECT_EQ(r.diagnostics[3].line, 6u);
}

TEST(Corpus, MissingFieldIsDiagnosed) {
  std::istringstream in(R"({"post_id":"p1","user_id":"u1","upload_time":1,"likes":1,"caption":"","media_count":1})");
  const ParseResult r = parse_posts(in);
  EXPECT_TRUE(r.posts.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_NE(r.diagnostics[0].message.find("is_video"), std::string::npos);
}

TEST(Corpus, WriteThenParseRoundTrips) {
  std::vector<Post> posts;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Post p = make_post("p" + std::to_string(i), static_cast<std::int64_t>(rng.index(100000)), rng.index(400));
    p.caption = i % 3 ? "caf\xC3\xA9 \"quoted\" \\ #Tag @Who \xF0\x9F\x99\x82" : "";
    p.media_count = 1 + static_cast<std::int64_t>(rng.index(3));
    p.is_video = rng.bernoulli(0.2);
    posts.push_back(p);
  }
  std::stringstream buf;
  write_posts(buf, posts);
  const ParseResult r = parse_posts(buf);
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_EQ(r.posts, posts);
}

TEST(Corpus, CaptionExamples) {
  const CaptionInfo a = analyze_caption("Sunset at the beach #Travel @Anna");
  EXPECT_EQ(a.word_count, 4);
  EXPECT_EQ(a.hashtags, (std::multiset<std::string>{"#travel"}));
  EXPECT_EQ(a.mentions, (std::multiset<std::string>{"@anna"}));

  const CaptionInfo b = analyze_caption("  #a #A\t#b\n");
  EXPECT_EQ(b.word_count, 0);
  EXPECT_EQ(b.hashtags, (std::multiset<std::string>{"#a", "#a", "#b"}));

  EXPECT_EQ(analyze_caption("").word_count, 0);
  EXPECT_EQ(analyze_caption("one\xC2\xA0two\xE3\x80\x80three").word_count, 3);  // NBSP, ideographic space
  EXPECT_EQ(analyze_caption("#\xC3\x89T\xC3\x89").hashtags, (std::multiset<std::string>{"#\xC3\xA9t\xC3\xA9"}));
  EXPECT_EQ(analyze_caption("#\xCE\xA3\xCE\x9F\xCE\xA6").hashtags,
            analyze_caption("#\xCF\x83\xCE\xBF\xCF\x86").hashtags);  // Greek
  EXPECT_EQ(analyze_caption("@\xD0\x9C\xD0\xB8\xD1\x80").mentions,
            analyze_caption("@\xD0\xBC\xD0\xB8\xD1\x80").mentions);  // Cyrillic
}

TEST(Corpus, LatinExtendedLowercase) {
  EXPECT_EQ(detail::simple_lower(U'Ā'), U'ā');
  EXPECT_EQ(detail::simple_lower(U'ā'), U'ā');
  EXPECT_EQ(detail::simple_lower(U'Ĺ'), U'ĺ');
  EXPECT_EQ(detail::simple_lower(U'Ł'), U'ł');
  EXPECT_EQ(detail::simple_lower(U'Ÿ'), U'ÿ');
  EXPECT_EQ(detail::simple_lower(U'Ž'), U'ž');
  EXPECT_EQ(detail::simple_lower(U'×'), U'×');  // multiplication sign
}

TEST(Corpus, Utf8RoundTrip) {
  const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x99\x82";
  const auto cps = detail::decode_utf8(s);
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[3], U'\U0001F642');
  EXPECT_EQ(detail::encode_utf8(cps), s);
}

TEST(Corpus, CandidateFilterBoundaries) {
  const std::int64_t ref = 1'700'000'000;
  EXPECT_TRUE(is_candidate(make_post("a", 50, 30), ref));
  EXPECT_FALSE(is_candidate(make_post("a", 49, 30), ref));
  Post young = make_post("a", 500, 30);
  young.upload_time += 1;
  EXPECT_FALSE(is_candidate(young, ref));
  Post video = make_post("a", 500, 40);
  video.is_video = true;
  EXPECT_FALSE(is_candidate(video, ref));
  Post album = make_post("a", 500, 40);
  album.media_count = 2;
  EXPECT_FALSE(is_candidate(album, ref));
}

TEST(Corpus, FilterMatchesBruteForce) {
  Rng rng(11);
  const std::int64_t ref = 1'700'000'000;
  std::vector<Post> posts;
  for (int i = 0; i < 2000; ++i) {
    Post p = make_post("p" + std::to_string(i), static_cast<std::int64_t>(rng.index(120)), 0, ref);
    p.upload_time = ref - static_cast<std::int64_t>(rng.index(60 * kSecondsPerDay));
    p.media_count = rng.bernoulli(0.1) ? 2 : 1;
    p.is_video = rng.bernoulli(0.1);
    posts.push_back(p);
  }
  std::vector<Post> expected;
  for (const auto& p : posts)
    if (oracle::candidate(p, ref)) expected.push_back(p);
  EXPECT_EQ(filter_candidates(posts, ref), expected);
  EXPECT_GT(expected.size(), 100u);
}

TEST(Corpus, LogLikes) {
  EXPECT_NEAR(log_likes(341), 5.8348, 1e-4);
  EXPECT_EQ(log_likes(0), 0.0);
  EXPECT_THROW(log_likes(-1), std::invalid_argument);
  for (std::int64_t l = 0; l < 1000; ++l) EXPECT_LT(log_likes(l), log_likes(l + 1));
}

TEST(Corpus, StatsOnSmallCorpus) {
  std::vector<Post> posts = {make_post("a", 100, 40), make_post("b", 300, 40), make_post("c", 200, 40)};
  posts[0].caption = "#x hello";
  posts[1].caption = "@y";
  posts[2].user_id = "v";
  const CorpusStats s = corpus_stats(posts);
  EXPECT_EQ(s.n_posts, 3u);
  EXPECT_EQ(s.n_users, 2u);
  EXPECT_DOUBLE_EQ(s.mean_likes, 200.0);
  EXPECT_DOUBLE_EQ(s.proportion_no_hashtag, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.proportion_no_mention, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.proportion_no_caption, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.mean_caption_words, 1.0 / 3.0);
  EXPECT_THROW(corpus_stats({}), std::invalid_argument);
}
