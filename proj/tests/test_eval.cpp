#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ipop/eval.hpp"
#include "ipop/rng.hpp"

using namespace ipop;

TEST(Accuracy, SmallExample) {
  const ScoreMap scores = {{"a", 3}, {"b", 1}, {"c", 2}, {"d", 5}};
  const std::vector<Pdip> pairs = {{"a", "b", "u", 1, 1}, {"c", "b", "u", 1, 1}, {"c", "d", "u", 1, 1}};
  const EvalResult r = pairwise_accuracy(scores, pairs);
  EXPECT_EQ(r.n_pairs, 3u);
  EXPECT_EQ(r.n_correct, 2u);
  EXPECT_DOUBLE_EQ(r.accuracy, 2.0 / 3.0);
}

TEST(Accuracy, TiesCountAsWrong) {
  const ScoreMap scores = {{"a", 1}, {"b", 1}};
  const EvalResult r = pairwise_accuracy(scores, {{"a", "b", "u", 1, 1}});
  EXPECT_EQ(r.n_ties, 1u);
  EXPECT_EQ(r.accuracy, 0.0);
}

TEST(Accuracy, ErrorsOnMissingOrEmpty) {
  EXPECT_THROW(pairwise_accuracy(ScoreMap{{"a", 1}}, {{"a", "b", "u", 1, 1}}), std::invalid_argument);
  EXPECT_THROW(pairwise_accuracy(ScoreMap{{"a", 1}}, {}), std::invalid_argument);
}

TEST(Accuracy, InvariantUnderMonotoneTransforms) {
  Rng rng(9);
  ScoreMap scores;
  std::vector<Pdip> pairs;
  for (int i = 0; i < 300; ++i) scores["p" + std::to_string(i)] = rng.normal();
  for (int i = 0; i < 500; ++i)
    pairs.push_back({"p" + std::to_string(rng.index(300)), "p" + std::to_string(rng.index(300)), "u", 1, 1});
  const EvalResult base = pairwise_accuracy(scores, pairs);
  for (auto f : {+[](double s) { return std::exp(s); }, +[](double s) { return 3.0 * s - 7.0; },
                 +[](double s) { return std::atan(s); }, +[](double s) { return s * s * s; }}) {
    ScoreMap t;
    for (const auto& [id, s] : scores) t[id] = f(s);
    const EvalResult r = pairwise_accuracy(t, pairs);
    EXPECT_EQ(r.n_correct, base.n_correct);
    EXPECT_EQ(r.n_ties, base.n_ties);
  }
}

TEST(Flip, CountAndInvolution) {
  std::vector<Pdip> pairs;
  for (int i = 0; i < 1000; ++i) pairs.push_back({"a" + std::to_string(i), "b" + std::to_string(i), "u", 0.99, 1.5});
  const auto flipped = flip_labels(pairs, 0.3, 4);
  std::size_t swapped = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (flipped[i].id_a != pairs[i].id_a) {
      ++swapped;
      EXPECT_EQ(flipped[i].id_a, pairs[i].id_b);
      EXPECT_EQ(flipped[i].delta_s, -1.5);
    }
  }
  EXPECT_EQ(swapped, 300u);
  EXPECT_EQ(flip_labels(pairs, 0.0, 4), pairs);
  EXPECT_EQ(flip_labels(pairs, 0.3, 4), flipped);
  EXPECT_NE(flip_labels(pairs, 0.3, 5), flipped);
  EXPECT_THROW(flip_labels(pairs, 1.5, 0), std::invalid_argument);
  // Perfect scores score exactly 1 - q on flipped labels.
  ScoreMap scores;
  for (int i = 0; i < 1000; ++i) {
    scores["a" + std::to_string(i)] = 1;
    scores["b" + std::to_string(i)] = 0;
  }
  EXPECT_DOUBLE_EQ(pairwise_accuracy(scores, flipped).accuracy, 0.7);
}

TEST(Gaussian, MomentFit) {
  const std::vector<double> xs = {1, 2, 3};
  const GaussianFit g = fit_gaussian(xs);
  EXPECT_DOUBLE_EQ(g.mean, 2.0);
  EXPECT_DOUBLE_EQ(g.std, 1.0);
  EXPECT_THROW(fit_gaussian(std::vector<double>{1.0}), std::invalid_argument);
  Rng rng(1);
  std::vector<double> big;
  for (int i = 0; i < 200000; ++i) big.push_back(rng.normal(3.0, 2.0));
  const GaussianFit h = fit_gaussian(big);
  EXPECT_NEAR(h.mean, 3.0, 0.02);
  EXPECT_NEAR(h.std, 2.0, 0.02);
}

TEST(Levels, EqualWidthBands) {
  EXPECT_EQ(level_for(4.2, 0, 5), PopularityLevel::excellent);
  EXPECT_EQ(level_for(0.0, 0, 5), PopularityLevel::poor);
  EXPECT_EQ(level_for(1.0, 0, 5), PopularityLevel::bad);
  EXPECT_EQ(level_for(2.5, 0, 5), PopularityLevel::fair);
  EXPECT_EQ(level_for(3.99, 0, 5), PopularityLevel::good);
  EXPECT_EQ(level_for(5.0, 0, 5), PopularityLevel::excellent);
  EXPECT_EQ(level_for(7.0, 7, 7), PopularityLevel::excellent);
  EXPECT_EQ(to_string(PopularityLevel::fair), "fair");
  const auto levels = popularity_levels({{"lo", -1}, {"mid", 0.5}, {"hi", 2}});
  EXPECT_EQ(levels.at("lo"), PopularityLevel::poor);
  EXPECT_EQ(levels.at("mid"), PopularityLevel::fair);
  EXPECT_EQ(levels.at("hi"), PopularityLevel::excellent);
}

TEST(Rescale, MapsOntoRange) {
  const std::vector<double> xs = {2, 3, 4};
  EXPECT_EQ(rescale_for_display(xs, 100), (std::vector<double>{0, 50, 100}));
  const std::vector<double> flat = {5, 5};
  EXPECT_EQ(rescale_for_display(flat, 10), (std::vector<double>{10, 10}));
  const ScoreMap m = rescale_for_display(ScoreMap{{"x", -1}, {"y", 1}}, 5);
  EXPECT_EQ(m.at("x"), 0.0);
  EXPECT_EQ(m.at("y"), 5.0);
}

TEST(Histogram, UniformGrid) {
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(i / 99.0);
  const Histogram h = histogram(xs, 10);
  ASSERT_EQ(h.mass.size(), 10u);
  for (std::size_t b = 0; b < 10; ++b) {
    EXPECT_NEAR(h.mass[b], 0.1, 1e-12);
    EXPECT_NEAR(h.density[b], 1.0, 1e-9);
  }
  EXPECT_EQ(h.left.front(), 0.0);
  EXPECT_EQ(h.right.back(), 1.0);
}

TEST(Histogram, MassSumsToOne) {
  Rng rng(2);
  std::vector<double> xs;
  for (int i = 0; i < 1234; ++i) xs.push_back(rng.normal());
  for (int bins : {1, 7, 50}) {
    const Histogram h = histogram(xs, bins);
    EXPECT_NEAR(std::accumulate(h.mass.begin(), h.mass.end(), 0.0), 1.0, 1e-12);
    double area = 0;
    for (int b = 0; b < bins; ++b) area += h.density[b] * (h.right[b] - h.left[b]);
    EXPECT_NEAR(area, 1.0, 1e-9);
  }
  const Histogram one = histogram(std::vector<double>{3, 3, 3}, 4);
  EXPECT_EQ(one.mass[0], 1.0);
  EXPECT_THROW(histogram(xs, 0), std::invalid_argument);
}

TEST(Writers, CsvLayouts) {
  std::ostringstream e;
  write_eval_csv(e, {3, 2, 0, 2.0 / 3.0});
  EXPECT_EQ(e.str(), "n_pairs,n_correct,n_ties,accuracy\n3,2,0,0.66666666666666663\n");
  std::ostringstream s;
  write_scores_csv(s, {{"b", 0.5}, {"a", -2}});
  EXPECT_EQ(s.str(), "post_id,score\na,-2\nb,0.5\n");
}
