#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ipop/baseline.hpp"
#include "ipop/corpus.hpp"
#include "ipop/pdip.hpp"
#include "ipop/ranker.hpp"

namespace ipop {

using LatentMap = std::map<std::string, double>;

/// Generator settings. Log-likes follow S = mu + u_user + N(0, sigma_true) with
/// mu ~ N(mu_mean, mu_std) per post; u_user is a per-user offset that pair
/// mining cancels but an absolute regressor has to explain.
struct SynthConfig {
  int n_users = 300;
  int posts_per_user = 60;
  double mu_mean = 6.0;
  double mu_std = 1.0;
  double sigma_true = 0.3;
  int feature_dim = 16;
  int n_informative = 4;
  double feature_noise_std = 0.25;
  int hashtag_vocab = 6;
  int mention_vocab = 6;
  int word_vocab = 200;
  int time_span_days = 180;
  std::int64_t reference_time = 1700000000;
  std::uint64_t seed = 0;

  // User-level confounding, off by default.
  double user_effect_std = 0.0;
  int n_user_style = 0;  // feature dims carrying u_user instead of mu
  double user_style_noise_std = 0.25;
  double follower_noise_std = 0.5;

  void validate() const;

  /// Large per-user offset, one noisy feature dim that tracks it, and a
  /// follower count that only weakly reveals it. Pair mining is unaffected;
  /// an absolute regressor learns to lean on the user cue.
  static SynthConfig confounded() {
    SynthConfig c;
    c.user_effect_std = 2.0;
    c.n_user_style = 1;
    c.user_style_noise_std = 1.0;
    c.follower_noise_std = 3.0;
    return c;
  }
};

struct SynthCorpus {
  std::vector<Post> posts;
  FeatureSet features;
  LatentMap latent_mu;
  NonVisualTable nonvisual;
};

/// Fully determined by `config.seed`. Informative dims are
/// a_k * (mu - mu_mean) + noise with per-corpus coefficients a_k.
SynthCorpus generate_corpus(const SynthConfig& config);

/// True iff mu(id_a) > mu(id_b).
bool oracle_label(const Pdip& pair, const LatentMap& latent);

/// Fraction of pairs whose orientation agrees with the latent means.
double latent_consistency(const std::vector<Pdip>& pairs, const LatentMap& latent);

/// Regression samples (target ln(1 + likes)) for posts that have non-visual rows.
std::vector<BaselineSample> make_baseline_samples(const std::vector<Post>& posts, const NonVisualTable& nonvisual);

void write_latent(std::ostream& out, const LatentMap& latent);
LatentMap read_latent(std::istream& in);

}  // namespace ipop
