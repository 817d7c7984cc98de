#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipop/pdip.hpp"
#include "ipop/ranker.hpp"

namespace ipop {

struct EvalResult {
  std::size_t n_pairs = 0;
  std::size_t n_correct = 0;
  std::size_t n_ties = 0;
  double accuracy = 0.0;
};

/// A pair is correct iff score(id_a) > score(id_b); exact ties count as
/// incorrect and are tallied separately.
EvalResult pairwise_accuracy(const ScoreMap& scores, const std::vector<Pdip>& pairs);
EvalResult pairwise_accuracy(std::span<const double> score_a, std::span<const double> score_b);

void write_eval_csv(std::ostream& out, const EvalResult& result);

/// Swaps the orientation of exactly floor(q * n) pairs chosen uniformly
/// without replacement.
std::vector<Pdip> flip_labels(const std::vector<Pdip>& pairs, double q, std::uint64_t seed);

struct NoiseRow {
  double q = 0.0;
  double test_accuracy = 0.0;
  std::size_t n_test = 0;
  int selected_epoch = 0;
};

/// For each noise level, flips that fraction of the training pairs, retrains
/// from the same initialization and scores the untouched test pairs.
std::vector<NoiseRow> noise_ablation(const std::vector<Pdip>& pairs, const FeatureSet& features,
                                     const PairSplit& split, const std::vector<int>& layer_dims,
                                     const TrainConfig& config, const std::vector<double>& noise_levels);

void write_noise_table_csv(std::ostream& out, const std::vector<NoiseRow>& rows);

struct GaussianFit {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator
};

/// Moment matching. Throws for fewer than two scores.
GaussianFit fit_gaussian(std::span<const double> scores);

enum class PopularityLevel { poor = 0, bad, fair, good, excellent };

std::string_view to_string(PopularityLevel level);

/// Five equal-width bins over [lo, hi]; hi itself, and any degenerate range,
/// maps to excellent.
PopularityLevel level_for(double score, double lo, double hi);

std::map<std::string, PopularityLevel> popularity_levels(const ScoreMap& scores);

/// Affine map with min -> 0 and max -> new_max; a degenerate range maps
/// everything to new_max.
std::vector<double> rescale_for_display(std::span<const double> scores, double new_max);
ScoreMap rescale_for_display(const ScoreMap& scores, double new_max);

struct Histogram {
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> mass;     // fraction of scores per bin, sums to 1
  std::vector<double> density;  // mass / bin width (mass itself for a zero-width range)
};

Histogram histogram(std::span<const double> scores, int n_bins);

/// Columns bin_left, bin_right, density.
void write_histogram_csv(std::ostream& out, const Histogram& h);

void write_scores_csv(std::ostream& out, const ScoreMap& scores);
void write_levels_csv(std::ostream& out, const ScoreMap& scores, const std::map<std::string, PopularityLevel>& levels);

}  // namespace ipop
