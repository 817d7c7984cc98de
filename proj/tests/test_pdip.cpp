#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ipop/pdip.hpp"
#include "ipop/rng.hpp"
#include "ipop/synthgen.hpp"
#include "support/oracles.hpp"

using namespace ipop;

namespace {

constexpr std::int64_t kRef = 1'700'000'000;

Post post(std::string id, std::string user, std::int64_t likes, double day, std::string caption = "") {
  Post p;
  p.post_id = std::move(id);
  p.user_id = std::move(user);
  p.likes = likes;
  p.upload_time = kRef - 100 * kSecondsPerDay + static_cast<std::int64_t>(day * kSecondsPerDay);
  p.caption = std::move(caption);
  return p;
}

MinerConfig config() {
  MinerConfig c;
  c.reference_time = kRef;
  return c;
}

}  // namespace

TEST(Kernel, NormalCdfMatchesSeriesOracle) {
  double worst = 0.0;
  for (int i = 0; i <= 16000; ++i) {
    const double z = -8.0 + i * 1e-3;
    worst = std::max(worst, std::abs(normal_cdf(z) - static_cast<double>(oracle::phi(z))));
  }
  EXPECT_LE(worst, 1e-7);
}

TEST(Kernel, NormalCdfProperties) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.6449), 0.95, 1e-4);
  EXPECT_EQ(normal_cdf(-60.0), 0.0);
  EXPECT_EQ(normal_cdf(60.0), 1.0);
  for (double z = -6; z < 6; z += 0.37) {
    EXPECT_NEAR(normal_cdf(z) + normal_cdf(-z), 1.0, 1e-15);
    EXPECT_LT(normal_cdf(z), normal_cdf(z + 0.01));
  }
  EXPECT_THROW(normal_cdf(std::nan("")), std::invalid_argument);
  EXPECT_THROW(normal_cdf(INFINITY), std::invalid_argument);
}

TEST(Kernel, PdipProbabilityExamples) {
  EXPECT_NEAR(pdip_probability(0.6979, 0.0, 0.3), 0.95, 1e-3);
  EXPECT_GE(pdip_probability(std::log(1001.0), std::log(101.0), 0.3), 0.9999);
  EXPECT_DOUBLE_EQ(pdip_probability(2.0, 2.0, 0.3), 0.5);
  EXPECT_THROW(pdip_probability(1.0, 0.0, 0.0), std::invalid_argument);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(0, 12), b = rng.uniform(0, 12);
    EXPECT_NEAR(pdip_probability(a, b, 0.3) + pdip_probability(b, a, 0.3), 1.0, 1e-12);
    const double p = pdip_probability(a, b, 0.3);
    EXPECT_NEAR(pdip_probability(a + 1.5, b + 1.5, 0.3), p, 1e-10 * p);  // shift invariance up to rounding
  }
}

TEST(Miner, CaptionCompatibility) {
  const auto c = [](const char* s) { return analyze_caption(s); };
  EXPECT_TRUE(captions_compatible(c("#Cat nice"), c("#cat"), 6));
  EXPECT_FALSE(captions_compatible(c("#cat"), c("#dog"), 6));
  EXPECT_FALSE(captions_compatible(c("#cat #cat"), c("#cat"), 6));
  EXPECT_FALSE(captions_compatible(c("@a"), c(""), 6));
  EXPECT_FALSE(captions_compatible(c("one two three four five six seven"), c(""), 6));
  EXPECT_TRUE(captions_compatible(c("one two three four five six"), c(""), 6));
}

TEST(Miner, HandBuiltUser) {
  // Two high/low pairs inside the window, one partner too far away, one with
  // a different hashtag, and a near-tie that never reaches the threshold.
  const std::vector<Post> posts = {
      post("a", "u", 1000, 0),   post("b", "u", 100, 3),  post("c", "u", 2000, 5, "#x"),
      post("d", "u", 90, 6, "#x"), post("e", "u", 5000, 30), post("f", "u", 110, 31),
      post("g", "v", 80, 0),     post("h", "v", 70, 1),   post("i", "u", 60, 60),
      post("j", "u", 55, 71)};
  const auto pairs = mine_pairs(posts, config());
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].id_a, "a");
  EXPECT_EQ(pairs[0].id_b, "b");
  EXPECT_EQ(pairs[1].id_a, "c");
  EXPECT_EQ(pairs[1].id_b, "d");
  EXPECT_EQ(pairs[2].id_a, "e");
  EXPECT_EQ(pairs[2].id_b, "f");
  for (const auto& p : pairs) {
    EXPECT_EQ(p.user_id, "u");
    EXPECT_GT(p.delta_s, 0.0);
    EXPECT_GE(p.prob, 0.95);
  }
}

TEST(Miner, WindowIsInclusive) {
  std::vector<Post> posts = {post("a", "u", 1000, 0), post("b", "u", 100, 10)};
  EXPECT_EQ(mine_pairs(posts, config()).size(), 1u);
  posts[1].upload_time += 1;
  EXPECT_TRUE(mine_pairs(posts, config()).empty());
}

TEST(Miner, GreedyPrefersHighestProbability) {
  // b can pair with a (higher prob) or c; a-b wins and c stays single.
  const std::vector<Post> posts = {post("a", "u", 10000, 0), post("b", "u", 100, 1), post("c", "u", 1000, 2)};
  const auto pairs = mine_pairs(posts, config());
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].id_a, "a");
  EXPECT_EQ(pairs[0].id_b, "b");
}

TEST(Miner, FeatureRestriction) {
  const std::vector<Post> posts = {post("a", "u", 1000, 0), post("b", "u", 100, 1), post("c", "u", 90, 2)};
  const auto pairs = mine_pairs(posts, {"a", "c"}, config());
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].id_b, "c");
}

TEST(Miner, MatchesGreedyOracleOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<Post> posts;
    const char* captions[] = {"", "#a", "#a nice", "@b", "#A @b", "w1 w2 w3 w4 w5 w6 w7"};
    for (int i = 0; i < 120; ++i) {
      posts.push_back(post("p" + std::to_string(i), "u" + std::to_string(rng.index(4)),
                           50 + static_cast<std::int64_t>(std::exp(rng.uniform(0, 8))), rng.uniform(0, 60),
                           captions[rng.index(6)]));
    }
    MinerConfig c = config();
    c.threshold = 0.9 + 0.09 * rng.uniform();
    c.max_interval_days = 1 + static_cast<int>(rng.index(15));
    std::vector<std::pair<std::string, std::string>> got;
    for (const auto& p : mine_pairs(posts, c)) got.emplace_back(p.id_a, p.id_b);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, oracle::greedy_pairs(posts, c.threshold, c.sigma, c.max_interval_days, c.max_caption_words))
        << "seed " << seed;
  }
}

TEST(Miner, OutputIsSortedAndDeterministic) {
  SynthConfig sc;
  sc.n_users = 30;
  const auto corpus = generate_corpus(sc);
  MinerConfig c = config();
  c.reference_time = sc.reference_time;
  const auto cands = filter_candidates(corpus.posts, c.reference_time);
  const auto pairs = mine_pairs(cands, c);
  ASSERT_FALSE(pairs.empty());
  for (std::size_t i = 1; i < pairs.size(); ++i)
    EXPECT_LE(std::tie(pairs[i - 1].user_id, pairs[i - 1].id_a), std::tie(pairs[i].user_id, pairs[i].id_a));
  std::vector<Post> reversed(cands.rbegin(), cands.rend());
  EXPECT_EQ(mine_pairs(reversed, c), pairs);
  EXPECT_TRUE(audit_pairs(pairs, corpus.posts, c).empty());
  EXPECT_TRUE(oracle::audit(pairs, corpus.posts, c.threshold, c.sigma, 10, 6, c.reference_time).empty());
}

TEST(Miner, RaisingThresholdNeverAddsBadPairs) {
  SynthConfig sc;
  sc.n_users = 40;
  const auto corpus = generate_corpus(sc);
  const auto cands = filter_candidates(corpus.posts, sc.reference_time);
  MinerConfig c = config();
  c.reference_time = sc.reference_time;
  for (double t : {0.8, 0.9, 0.95, 0.99}) {
    c.threshold = t;
    for (const auto& p : mine_pairs(cands, c)) EXPECT_GE(p.prob, t);
  }
}

TEST(Audit, DetectsEachViolation) {
  const std::vector<Post> posts = {post("a", "u", 1000, 0), post("b", "u", 100, 3), post("c", "v", 100, 3),
                                   post("d", "u", 900, 30),  post("e", "u", 40, 4), post("f", "u", 100, 4, "#z")};
  const MinerConfig c = config();
  auto kinds = [&](const std::vector<Pdip>& pairs) {
    std::set<std::string> out;
    for (const auto& v : audit_pairs(pairs, posts, c)) out.insert(v.constraint);
    return out;
  };
  EXPECT_TRUE(kinds({{"a", "b", "u", 0.99, 1}}).empty());
  EXPECT_TRUE(kinds({{"a", "c", "u", 0.99, 1}}).count("same_user"));
  EXPECT_TRUE(kinds({{"d", "b", "u", 0.99, 1}}).count("interval"));
  EXPECT_TRUE(kinds({{"a", "e", "u", 0.99, 1}}).count("candidate"));
  EXPECT_TRUE(kinds({{"a", "f", "u", 0.99, 1}}).count("caption"));
  EXPECT_TRUE(kinds({{"b", "a", "u", 0.99, 1}}).count("probability"));
  EXPECT_TRUE(kinds({{"a", "zz", "u", 0.99, 1}}).count("resolvable"));
  EXPECT_TRUE(kinds({{"a", "b", "u", 0.99, 1}, {"a", "f", "u", 0.99, 1}}).count("one_pair_per_image"));
  const std::unordered_set<std::string> present = {"a"};
  EXPECT_EQ(audit_pairs({{"a", "b", "u", 0.99, 1}}, posts, c, &present).at(0).constraint, "features");
}

TEST(PairStats, MeansAndEmptyInput) {
  const std::vector<Post> posts = {post("a", "u", 1000, 0), post("b", "u", 100, 3), post("c", "v", 400, 0),
                                   post("d", "v", 20, 1)};
  const std::vector<Pdip> pairs = {{"a", "b", "u", 0.99, 0}, {"c", "d", "v", 0.97, 0}};
  const PairStats s = pair_stats(pairs, posts);
  EXPECT_EQ(s.n_pairs, 2u);
  EXPECT_EQ(s.n_users, 2u);
  EXPECT_DOUBLE_EQ(s.mean_prob, 0.98);
  EXPECT_DOUBLE_EQ(s.mean_interval_days, 2.0);
  EXPECT_DOUBLE_EQ(s.mean_likes, 380.0);
  const PairStats e = pair_stats({}, posts);
  EXPECT_EQ(e.n_pairs, 0u);
  EXPECT_TRUE(std::isnan(e.mean_prob));
  EXPECT_THROW(pair_stats({{"a", "x", "u", 1, 1}}, posts), std::invalid_argument);
}

TEST(PairsFile, RoundTrip) {
  const std::vector<Pdip> pairs = {{"a", "b", "u", 0.987654, 1.0 / 3.0}, {"c", "d", "v", 1.0, 2.2937}};
  std::stringstream buf;
  write_pairs(buf, pairs);
  EXPECT_EQ(read_pairs(buf), pairs);
  std::stringstream bad("id_a,id_b,user_id,prob,delta_s\na,b,u,0.9\n");
  EXPECT_THROW(read_pairs(bad), std::invalid_argument);
  std::stringstream out;
  EXPECT_THROW(write_pairs(out, {{"a,x", "b", "u", 1, 1}}), std::invalid_argument);
}

TEST(MinerConfig, Validation) {
  MinerConfig c;
  c.threshold = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = MinerConfig{};
  c.sigma = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = MinerConfig{};
  c.max_interval_days = 0;
  EXPECT_THROW(mine_pairs({}, c), std::invalid_argument);
}
