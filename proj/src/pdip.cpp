#include "ipop/pdip.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "ipop/text.hpp"

namespace ipop {

void MinerConfig::validate() const {
  if (!(threshold > 0.5 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0.5, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (max_interval_days <= 0) throw std::invalid_argument("max_interval_days must be positive");
  if (max_caption_words < 0) throw std::invalid_argument("max_caption_words must be non-negative");
}

double normal_cdf(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("normal_cdf: non-finite argument");
  // erfc keeps full relative precision in the lower tail.
  const double p = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::clamp(p, 0.0, 1.0);
}

double pdip_probability(double s_a, double s_b, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("pdip_probability: sigma must be positive");
  return normal_cdf((s_a - s_b) / (std::numbers::sqrt2 * sigma));
}

bool captions_compatible(const CaptionInfo& a, const CaptionInfo& b, int max_words) {
  return a.word_count <= max_words && b.word_count <= max_words && a.hashtags == b.hashtags &&
         a.mentions == b.mentions;
}

namespace {

struct MinedPost {
  const Post* post;
  double s;
  CaptionInfo caption;
};

struct Candidate {
  std::size_t a;
  std::size_t b;
  double prob;
};

void mine_user(std::vector<MinedPost>& posts, const MinerConfig& config, std::vector<Pdip>& out) {
  std::sort(posts.begin(), posts.end(), [](const MinedPost& x, const MinedPost& y) {
    if (x.post->upload_time != y.post->upload_time) return x.post->upload_time < y.post->upload_time;
    return x.post->post_id < y.post->post_id;
  });
  const std::int64_t window = static_cast<std::int64_t>(config.max_interval_days) * kSecondsPerDay;

  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    for (std::size_t j = i + 1; j < posts.size(); ++j) {
      if (posts[j].post->upload_time - posts[i].post->upload_time > window) break;
      if (posts[i].s == posts[j].s) continue;
      if (!captions_compatible(posts[i].caption, posts[j].caption, config.max_caption_words)) continue;
      const std::size_t a = posts[i].s > posts[j].s ? i : j;
      const std::size_t b = a == i ? j : i;
      const double prob = pdip_probability(posts[a].s, posts[b].s, config.sigma);
      if (prob >= config.threshold) candidates.push_back({a, b, prob});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
    if (x.prob != y.prob) return x.prob > y.prob;
    const auto& xa = posts[x.a].post->post_id;
    const auto& ya = posts[y.a].post->post_id;
    if (xa != ya) return xa < ya;
    return posts[x.b].post->post_id < posts[y.b].post->post_id;
  });

  std::vector<bool> used(posts.size(), false);
  for (const auto& c : candidates) {
    if (used[c.a] || used[c.b]) continue;
    used[c.a] = used[c.b] = true;
    const Post& pa = *posts[c.a].post;
    const Post& pb = *posts[c.b].post;
    out.push_back({pa.post_id, pb.post_id, pa.user_id, c.prob, posts[c.a].s - posts[c.b].s});
  }
}

std::vector<Pdip> mine_impl(const std::vector<Post>& posts, const std::unordered_set<std::string>* present,
                            const MinerConfig& config) {
  config.validate();
  std::map<std::string, std::vector<MinedPost>> by_user;
  for (const auto& p : posts) {
    if (present && !present->contains(p.post_id)) continue;
    by_user[p.user_id].push_back({&p, log_likes(p.likes), analyze_caption(p.caption)});
  }
  std::vector<Pdip> out;
  for (auto& [user, user_posts] : by_user) mine_user(user_posts, config, out);
  std::stable_sort(out.begin(), out.end(), [](const Pdip& x, const Pdip& y) {
    if (x.user_id != y.user_id) return x.user_id < y.user_id;
    return x.id_a < y.id_a;
  });
  return out;
}

}  // namespace

std::vector<Pdip> mine_pairs(const std::vector<Post>& posts, const MinerConfig& config) {
  return mine_impl(posts, nullptr, config);
}

std::vector<Pdip> mine_pairs(const std::vector<Post>& posts,
                             const std::unordered_set<std::string>& features_present,
                             const MinerConfig& config) {
  return mine_impl(posts, &features_present, config);
}

PairStats pair_stats(const std::vector<Pdip>& pairs, const std::vector<Post>& posts) {
  std::unordered_map<std::string_view, const Post*> index;
  for (const auto& p : posts) index.emplace(p.post_id, &p);
  auto lookup = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw std::invalid_argument("pair_stats: unknown post id '" + id + "'");
    return it->second;
  };

  PairStats s;
  s.n_pairs = pairs.size();
  if (pairs.empty()) {
    s.mean_prob = s.mean_interval_days = s.mean_likes = std::nan("");
    return s;
  }
  std::unordered_set<std::string_view> users;
  double prob = 0.0, interval = 0.0, likes = 0.0;
  for (const auto& pair : pairs) {
    const Post* a = lookup(pair.id_a);
    const Post* b = lookup(pair.id_b);
    users.insert(a->user_id);
    prob += pair.prob;
    interval += static_cast<double>(std::llabs(a->upload_time - b->upload_time)) / kSecondsPerDay;
    likes += static_cast<double>(a->likes + b->likes);
  }
  const auto n = static_cast<double>(pairs.size());
  s.n_users = users.size();
  s.mean_prob = prob / n;
  s.mean_interval_days = interval / n;
  s.mean_likes = likes / (2.0 * n);
  return s;
}

std::vector<AuditViolation> audit_pairs(const std::vector<Pdip>& pairs, const std::vector<Post>& posts,
                                        const MinerConfig& config,
                                        const std::unordered_set<std::string>* features_present) {
  std::unordered_map<std::string_view, const Post*> index;
  for (const auto& p : posts) index.emplace(p.post_id, &p);
  std::unordered_map<std::string_view, std::size_t> uses;
  std::vector<AuditViolation> out;
  const std::int64_t window = static_cast<std::int64_t>(config.max_interval_days) * kSecondsPerDay;

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pdip& pair = pairs[i];
    auto flag = [&](std::string constraint, std::string detail) {
      out.push_back({i, std::move(constraint), std::move(detail)});
    };
    const auto ia = index.find(pair.id_a);
    const auto ib = index.find(pair.id_b);
    if (ia == index.end() || ib == index.end()) {
      flag("resolvable", "unknown post id");
      continue;
    }
    const Post& a = *ia->second;
    const Post& b = *ib->second;
    if (pair.id_a == pair.id_b) flag("distinct", pair.id_a);
    if (a.user_id != b.user_id || a.user_id != pair.user_id) flag("same_user", a.user_id + " vs " + b.user_id);
    for (const Post* p : {&a, &b})
      if (!is_candidate(*p, config.reference_time)) flag("candidate", p->post_id);
    if (std::llabs(a.upload_time - b.upload_time) > window) flag("interval", pair.id_a + "/" + pair.id_b);
    if (!captions_compatible(analyze_caption(a.caption), analyze_caption(b.caption), config.max_caption_words))
      flag("caption", pair.id_a + "/" + pair.id_b);
    const double prob = pdip_probability(log_likes(a.likes), log_likes(b.likes), config.sigma);
    if (prob < config.threshold) flag("probability", text::format_general(prob, 9));
    if (features_present && (!features_present->contains(a.post_id) || !features_present->contains(b.post_id)))
      flag("features", pair.id_a + "/" + pair.id_b);
    for (const auto& id : {std::string_view(pair.id_a), std::string_view(pair.id_b)})
      if (++uses[id] == 2) flag("one_pair_per_image", std::string(id));
  }
  return out;
}

void write_pair_stats_csv(std::ostream& out, const PairStats& s) {
  out << "name,value\n";
  out << "n_pairs," << s.n_pairs << '\n';
  out << "n_users," << s.n_users << '\n';
  out << "mean_prob," << text::format_general(s.mean_prob) << '\n';
  out << "mean_interval_days," << text::format_general(s.mean_interval_days) << '\n';
  out << "mean_likes," << text::format_general(s.mean_likes) << '\n';
}

void write_pairs(std::ostream& out, const std::vector<Pdip>& pairs) {
  out << "id_a,id_b,user_id,prob,delta_s\n";
  for (const auto& p : pairs) {
    text::require_csv_safe(p.id_a);
    text::require_csv_safe(p.id_b);
    text::require_csv_safe(p.user_id);
    out << p.id_a << ',' << p.id_b << ',' << p.user_id << ',' << text::format_fixed(p.prob, 6) << ','
        << text::format_general(p.delta_s) << '\n';
  }
}

std::vector<Pdip> read_pairs(std::istream& in) {
  std::vector<Pdip> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    if (line_no == 1 && text::trim(line).starts_with("id_a")) continue;
    const auto fields = text::split_csv(line);
    if (fields.size() != 5)
      throw std::invalid_argument("pairs line " + std::to_string(line_no) + ": expected 5 fields");
    try {
      pairs.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                       text::parse_double(fields[3]), text::parse_double(fields[4])});
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<Pdip> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pairs file: " + path.string());
  return read_pairs(in);
}

}  // namespace ipop
