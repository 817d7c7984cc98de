#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ipop/synthgen.hpp"

using namespace ipop;

namespace {

SynthConfig small(std::uint64_t seed = 0) {
  SynthConfig c;
  c.n_users = 40;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Synth, ShapesAndDeterminism) {
  const SynthConfig c = small();
  const SynthCorpus a = generate_corpus(c);
  ASSERT_EQ(a.posts.size(), 40u * 60u);
  EXPECT_EQ(a.features.size(), a.posts.size());
  EXPECT_EQ(a.features.dim(), c.feature_dim);
  EXPECT_EQ(a.latent_mu.size(), a.posts.size());
  EXPECT_EQ(a.nonvisual.size(), a.posts.size());
  const SynthCorpus b = generate_corpus(c);
  EXPECT_EQ(a.posts, b.posts);
  EXPECT_EQ(a.latent_mu, b.latent_mu);
  EXPECT_FALSE(generate_corpus(small(1)).posts == a.posts);
  for (const auto& p : a.posts) {
    EXPECT_GE(p.likes, 0);
    EXPECT_LE(p.upload_time, c.reference_time);
    EXPECT_GE(p.upload_time, c.reference_time - c.time_span_days * kSecondsPerDay);
  }
}

TEST(Synth, LatentMeanWithinThreeStandardErrors) {
  SynthConfig c = small(3);
  c.n_users = 200;
  const SynthCorpus corpus = generate_corpus(c);
  double sum = 0;
  for (const auto& [id, mu] : corpus.latent_mu) sum += mu;
  const double n = static_cast<double>(corpus.latent_mu.size());
  EXPECT_NEAR(sum / n, c.mu_mean, 3.0 * c.mu_std / std::sqrt(n));
  // Observed log-likes sit sigma_true around the latent mean (rounding adds a little).
  double resid = 0, resid2 = 0;
  for (const auto& p : corpus.posts) {
    const double r = log_likes(p.likes) - corpus.latent_mu.at(p.post_id);
    resid += r;
    resid2 += r * r;
  }
  const double m = resid / n;
  EXPECT_NEAR(m, 0.0, 3.0 * c.sigma_true / std::sqrt(n) + 0.01);
  EXPECT_NEAR(std::sqrt(resid2 / n - m * m), c.sigma_true, 0.02);
}

TEST(Synth, InformativeFeaturesTrackLatent) {
  const SynthCorpus corpus = generate_corpus(small(4));
  std::vector<double> mu, f0, flast;
  for (const auto& p : corpus.posts) {
    mu.push_back(corpus.latent_mu.at(p.post_id));
    f0.push_back(corpus.features.vector(p.post_id)(0));
    flast.push_back(corpus.features.vector(p.post_id)(corpus.features.dim() - 1));
  }
  EXPECT_GT(std::abs(pearson(mu, f0)), 0.8);
  EXPECT_LT(std::abs(pearson(mu, flast)), 0.1);
}

TEST(Synth, LatentConsistencyRisesWithThreshold) {
  const SynthConfig c = small(5);
  const SynthCorpus corpus = generate_corpus(c);
  const auto cands = filter_candidates(corpus.posts, c.reference_time);
  MinerConfig m;
  m.reference_time = c.reference_time;
  double previous = 0.0;
  for (double t : {0.6, 0.8, 0.95, 0.99}) {
    m.threshold = t;
    const auto pairs = mine_pairs(cands, m);
    ASSERT_GT(pairs.size(), 50u);
    const double lc = latent_consistency(pairs, corpus.latent_mu);
    EXPECT_GE(lc, previous - 0.01) << "T=" << t;
    previous = lc;
  }
  EXPECT_GE(previous, 0.95);
}

TEST(Synth, OracleLabel) {
  const LatentMap latent = {{"a", 2.0}, {"b", 1.0}, {"c", 2.0}};
  EXPECT_TRUE(oracle_label({"a", "b", "u", 1, 1}, latent));
  EXPECT_FALSE(oracle_label({"b", "a", "u", 1, 1}, latent));
  EXPECT_FALSE(oracle_label({"a", "c", "u", 1, 1}, latent));
  EXPECT_DOUBLE_EQ(latent_consistency({{"a", "b", "u", 1, 1}, {"b", "a", "u", 1, 1}}, latent), 0.5);
  EXPECT_THROW(latent_consistency({}, latent), std::invalid_argument);
  EXPECT_THROW(oracle_label({"a", "z", "u", 1, 1}, latent), std::invalid_argument);
}

TEST(Synth, ConfoundedPresetMovesUserLevel) {
  SynthConfig c = SynthConfig::confounded();
  c.n_users = 60;
  const SynthCorpus corpus = generate_corpus(c);
  // Per-user mean log-likes spread far more than under the default config.
  auto user_spread = [](const SynthCorpus& sc) {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& p : sc.posts) {
      acc[p.user_id].first += log_likes(p.likes);
      acc[p.user_id].second += 1;
    }
    std::vector<double> means;
    for (const auto& [u, s] : acc) means.push_back(s.first / s.second);
    return fit_gaussian(means).std;
  };
  SynthConfig plain;
  plain.n_users = 60;
  EXPECT_GT(user_spread(corpus), 1.5);
  EXPECT_LT(user_spread(generate_corpus(plain)), 0.5);
}

TEST(Synth, LatentFileRoundTrip) {
  const LatentMap latent = {{"a", 1.0 / 7.0}, {"b", -3.25}};
  std::stringstream buf;
  write_latent(buf, latent);
  EXPECT_EQ(read_latent(buf), latent);
}

TEST(Synth, ValidationRejectsBadConfig) {
  SynthConfig c;
  c.n_informative = 20;
  EXPECT_THROW(generate_corpus(c), std::invalid_argument);
  c = SynthConfig{};
  c.n_users = 0;
  EXPECT_THROW(generate_corpus(c), std::invalid_argument);
}
