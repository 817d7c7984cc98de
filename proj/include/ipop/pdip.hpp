#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "ipop/corpus.hpp"

namespace ipop {

struct MinerConfig {
  double threshold = 0.95;  // T
  double sigma = 0.3;       // std of S around the latent mean
  int max_interval_days = 10;
  int max_caption_words = 6;
  std::int64_t reference_time = 0;

  void validate() const;
};

/// A popularity-discriminable image pair. `id_a` is always the post with the
/// higher log-likes, so the implied label is "A beats B".
struct Pdip {
  std::string id_a;
  std::string id_b;
  std::string user_id;
  double prob = 0.0;
  double delta_s = 0.0;

  bool operator==(const Pdip&) const = default;
};

struct PairStats {
  std::size_t n_pairs = 0;
  std::size_t n_users = 0;
  double mean_prob = 0.0;
  double mean_interval_days = 0.0;
  double mean_likes = 0.0;  // over the images that made it into pairs
};

/// Standard normal CDF. Throws std::invalid_argument for non-finite input.
double normal_cdf(double z);

/// Probability that A is intrinsically more popular than B given their
/// log-likes: Phi((s_a - s_b) / (sqrt(2) * sigma)).
double pdip_probability(double s_a, double s_b, double sigma);

bool captions_compatible(const CaptionInfo& a, const CaptionInfo& b, int max_words);

/// Greedy maximum-probability matching within each user. Inputs are expected
/// to have passed filter_candidates. The result is ordered by (user_id, id_a).
std::vector<Pdip> mine_pairs(const std::vector<Post>& posts, const MinerConfig& config);
std::vector<Pdip> mine_pairs(const std::vector<Post>& posts,
                             const std::unordered_set<std::string>& features_present,
                             const MinerConfig& config);

/// Throws std::invalid_argument naming the first id missing from `posts`.
PairStats pair_stats(const std::vector<Pdip>& pairs, const std::vector<Post>& posts);

struct AuditViolation {
  std::size_t pair_index = 0;
  std::string constraint;
  std::string detail;
};

/// Re-checks every mining constraint on every pair from the raw posts.
/// `features_present`, when given, must contain both ids of each pair.
std::vector<AuditViolation> audit_pairs(const std::vector<Pdip>& pairs, const std::vector<Post>& posts,
                                        const MinerConfig& config,
                                        const std::unordered_set<std::string>* features_present = nullptr);

void write_pair_stats_csv(std::ostream& out, const PairStats& stats);

/// CSV with header `id_a,id_b,user_id,prob,delta_s`; prob has 6 decimals.
void write_pairs(std::ostream& out, const std::vector<Pdip>& pairs);
std::vector<Pdip> read_pairs(std::istream& in);
std::vector<Pdip> load_pairs(const std::filesystem::path& path);

}  // namespace ipop
