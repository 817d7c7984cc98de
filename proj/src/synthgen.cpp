#include "ipop/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ipop/rng.hpp"
#include "ipop/text.hpp"

namespace ipop {

void SynthConfig::validate() const {
  if (n_users < 1 || posts_per_user < 1) throw std::invalid_argument("n_users and posts_per_user must be positive");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be positive");
  if (n_informative < 0 || n_user_style < 0 || n_informative + n_user_style > feature_dim)
    throw std::invalid_argument("n_informative + n_user_style must not exceed feature_dim");
  if (mu_std < 0 || sigma_true < 0 || feature_noise_std < 0 || user_effect_std < 0 || user_style_noise_std < 0 ||
      follower_noise_std < 0)
    throw std::invalid_argument("standard deviations must be non-negative");
  if (hashtag_vocab < 1 || mention_vocab < 1 || word_vocab < 1) throw std::invalid_argument("vocabularies must be non-empty");
  if (time_span_days < 1) throw std::invalid_argument("time_span_days must be positive");
}

namespace {

std::string numbered(const char* prefix, int width, long value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*ld", prefix, width, value);
  return buf;
}

std::string maybe_capitalize(std::string token, Rng& rng) {
  // Exercises case folding; the prefix character ('#', '@') is left alone.
  const std::size_t pos = (token[0] == '#' || token[0] == '@') ? 1 : 0;
  if (pos < token.size() && rng.bernoulli(0.2) && token[pos] >= 'a' && token[pos] <= 'z') token[pos] -= 0x20;
  return token;
}

std::string make_caption(const SynthConfig& c, Rng& rng) {
  std::vector<std::string> tokens;
  auto words = [&](int lo, int hi) {
    const int n = lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo + 1)));
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(0.05))
        tokens.emplace_back("\xF0\x9F\x99\x82");  // emoji, counts as a word
      else
        tokens.push_back(numbered("word", 0, static_cast<long>(rng.index(static_cast<std::uint64_t>(c.word_vocab)))));
    }
  };
  auto hashtag = [&] { tokens.push_back(numbered("#tag", 0, static_cast<long>(rng.index(static_cast<std::uint64_t>(c.hashtag_vocab))))); };
  auto mention = [&] { tokens.push_back(numbered("@friend", 0, static_cast<long>(rng.index(static_cast<std::uint64_t>(c.mention_vocab))))); };

  const double r = rng.uniform();
  if (r < 0.35) {
    // no caption
  } else if (r < 0.55) {
    words(1, 6);
  } else if (r < 0.72) {
    hashtag();
    words(0, 3);
  } else if (r < 0.82) {
    mention();
    words(0, 3);
  } else if (r < 0.88) {
    hashtag();
    mention();
    words(0, 2);
  } else if (r < 0.94) {
    hashtag();
    hashtag();
  } else {
    words(7, 12);
  }
  rng.shuffle(tokens);
  std::string caption;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) caption += rng.bernoulli(0.1) ? "  " : " ";
    caption += maybe_capitalize(tokens[i], rng);
  }
  return caption;
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& c) {
  c.validate();
  const Rng root(c.seed);

  // Per-corpus linear maps from latent quantities to feature dims.
  Rng coef_rng = root.split("coefficients");
  auto draw_coef = [&] { return (coef_rng.bernoulli(0.5) ? 1.0 : -1.0) * coef_rng.uniform(0.5, 1.5); };
  std::vector<double> mu_coef(static_cast<std::size_t>(c.n_informative));
  for (auto& a : mu_coef) a = draw_coef();
  std::vector<double> style_coef(static_cast<std::size_t>(c.n_user_style));
  for (auto& b : style_coef) b = draw_coef();

  SynthCorpus corpus{{}, FeatureSet(c.feature_dim), {}, {}};
  const std::int64_t span = static_cast<std::int64_t>(c.time_span_days) * kSecondsPerDay;
  Eigen::VectorXd x(c.feature_dim);

  for (int u = 0; u < c.n_users; ++u) {
    Rng rng = root.split("user").split(static_cast<std::uint64_t>(u));
    const std::string user_id = numbered("u", 4, u);
    const double user_effect = rng.normal(0.0, c.user_effect_std);
    const double followers = std::round(std::exp(7.0 + user_effect + rng.normal(0.0, c.follower_noise_std)));
    const double followings = std::round(std::exp(rng.normal(6.0, 0.8)));

    for (int k = 0; k < c.posts_per_user; ++k) {
      Post p;
      p.post_id = user_id + numbered("_p", 3, k);
      p.user_id = user_id;
      p.upload_time = c.reference_time - static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(span) + 1));
      const double mu = rng.normal(c.mu_mean, c.mu_std);
      const double s = mu + user_effect + rng.normal(0.0, c.sigma_true);
      p.likes = std::max<std::int64_t>(0, std::llround(std::exp(s) - 1.0));
      p.caption = make_caption(c, rng);
      p.is_video = rng.bernoulli(0.05);
      p.media_count = rng.bernoulli(0.05) ? 2 + static_cast<std::int64_t>(rng.index(4)) : 1;

      int d = 0;
      for (double a : mu_coef) x(d++) = a * (mu - c.mu_mean) + rng.normal(0.0, c.feature_noise_std);
      for (double b : style_coef) x(d++) = b * user_effect + rng.normal(0.0, c.user_style_noise_std);
      while (d < c.feature_dim) x(d++) = rng.normal();
      corpus.features.add(p.post_id, x);

      const CaptionInfo info = analyze_caption(p.caption);
      corpus.nonvisual.emplace(p.post_id, NonVisualFeatures{followers, followings,
                                                            static_cast<double>(c.posts_per_user),
                                                            static_cast<double>(info.hashtags.size()),
                                                            static_cast<double>(info.mentions.size()),
                                                            static_cast<double>(info.word_count)});
      corpus.latent_mu.emplace(p.post_id, mu);
      corpus.posts.push_back(std::move(p));
    }
  }
  return corpus;
}

bool oracle_label(const Pdip& pair, const LatentMap& latent) {
  auto find = [&](const std::string& id) {
    auto it = latent.find(id);
    if (it == latent.end()) throw std::invalid_argument("no latent value for '" + id + "'");
    return it->second;
  };
  return find(pair.id_a) > find(pair.id_b);
}

double latent_consistency(const std::vector<Pdip>& pairs, const LatentMap& latent) {
  if (pairs.empty()) throw std::invalid_argument("latent_consistency: no pairs");
  std::size_t agree = 0;
  for (const auto& p : pairs) agree += oracle_label(p, latent);
  return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

std::vector<BaselineSample> make_baseline_samples(const std::vector<Post>& posts, const NonVisualTable& nonvisual) {
  std::vector<BaselineSample> out;
  for (const auto& p : posts) {
    auto it = nonvisual.find(p.post_id);
    if (it == nonvisual.end()) continue;
    out.push_back({p.post_id, it->second, log_likes(p.likes)});
  }
  return out;
}

void write_latent(std::ostream& out, const LatentMap& latent) {
  out << "post_id,mu\n";
  for (const auto& [id, mu] : latent) out << id << ',' << text::format_general(mu) << '\n';
}

LatentMap read_latent(std::istream& in) {
  LatentMap latent;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || (line_no == 1 && line.starts_with("post_id"))) continue;
    const auto f = text::split_csv(line);
    if (f.size() != 2) throw std::invalid_argument("latent line " + std::to_string(line_no) + ": expected 2 fields");
    latent.emplace(std::string(f[0]), text::parse_double(f[1]));
  }
  return latent;
}

}  // namespace ipop
