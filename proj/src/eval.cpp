#include "ipop/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ipop/text.hpp"

namespace ipop {

EvalResult pairwise_accuracy(std::span<const double> score_a, std::span<const double> score_b) {
  if (score_a.size() != score_b.size()) throw std::invalid_argument("pairwise_accuracy: score lists differ in length");
  if (score_a.empty()) throw std::invalid_argument("pairwise_accuracy: no pairs");
  EvalResult r;
  r.n_pairs = score_a.size();
  for (std::size_t i = 0; i < score_a.size(); ++i) {
    if (score_a[i] > score_b[i])
      ++r.n_correct;
    else if (score_a[i] == score_b[i])
      ++r.n_ties;
  }
  r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_pairs);
  return r;
}

EvalResult pairwise_accuracy(const ScoreMap& scores, const std::vector<Pdip>& pairs) {
  auto lookup = [&](const std::string& id) {
    auto it = scores.find(id);
    if (it == scores.end()) throw std::invalid_argument("pairwise_accuracy: no score for '" + id + "'");
    return it->second;
  };
  std::vector<double> a, b;
  a.reserve(pairs.size());
  b.reserve(pairs.size());
  for (const auto& p : pairs) {
    a.push_back(lookup(p.id_a));
    b.push_back(lookup(p.id_b));
  }
  return pairwise_accuracy(a, b);
}

void write_eval_csv(std::ostream& out, const EvalResult& r) {
  out << "n_pairs,n_correct,n_ties,accuracy\n";
  out << r.n_pairs << ',' << r.n_correct << ',' << r.n_ties << ',' << text::format_general(r.accuracy) << '\n';
}

std::vector<Pdip> flip_labels(const std::vector<Pdip>& pairs, double q, std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("flip_labels: q must lie in [0, 1]");
  const auto n = pairs.size();
  // The epsilon absorbs representation error such as 0.3 * 1000 = 299.999...
  const auto k = std::min(n, static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng(seed).split("flip-labels").shuffle(order);
  std::vector<Pdip> out = pairs;
  for (std::size_t i = 0; i < k; ++i) {
    Pdip& p = out[order[i]];
    std::swap(p.id_a, p.id_b);
    p.delta_s = -p.delta_s;
  }
  return out;
}

std::vector<NoiseRow> noise_ablation(const std::vector<Pdip>& pairs, const FeatureSet& features,
                                     const PairSplit& split, const std::vector<int>& layer_dims,
                                     const TrainConfig& config, const std::vector<double>& noise_levels) {
  for (double q : noise_levels)
    if (!(q >= 0.0 && q < 0.5)) throw std::invalid_argument("noise levels must lie in [0, 0.5)");
  std::vector<NoiseRow> rows;
  if (noise_levels.empty()) return rows;
  if (split.test.empty()) throw std::invalid_argument("noise_ablation: no test pairs");

  const MlpModel initial = init_model(layer_dims, config.seed);
  const std::vector<Pdip> train_pairs = select(pairs, split.train);
  const std::vector<Pdip> test_pairs = select(pairs, split.test);
  const std::uint64_t flip_seed = Rng(config.seed).split("label-noise").next_u64();

  for (double q : noise_levels) {
    const auto flipped = flip_labels(train_pairs, q, flip_seed);
    std::vector<Pdip> noisy = pairs;
    for (std::size_t k = 0; k < split.train.size(); ++k) noisy[split.train[k]] = flipped[k];
    const TrainReport report = train(initial, noisy, features, split, config);
    const EvalResult r = pairwise_accuracy(score_batch(report.model, features), test_pairs);
    rows.push_back({q, r.accuracy, r.n_pairs, report.selected_epoch});
  }
  return rows;
}

void write_noise_table_csv(std::ostream& out, const std::vector<NoiseRow>& rows) {
  out << "q,test_accuracy,n_test,selected_epoch\n";
  for (const auto& r : rows)
    out << text::format_general(r.q) << ',' << text::format_general(r.test_accuracy) << ',' << r.n_test << ','
        << r.selected_epoch << '\n';
}

GaussianFit fit_gaussian(std::span<const double> scores) {
  if (scores.size() < 2) throw std::invalid_argument("fit_gaussian: need at least two scores");
  const auto n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::string_view to_string(PopularityLevel level) {
  switch (level) {
    case PopularityLevel::poor: return "poor";
    case PopularityLevel::bad: return "bad";
    case PopularityLevel::fair: return "fair";
    case PopularityLevel::good: return "good";
    case PopularityLevel::excellent: return "excellent";
  }
  return "unknown";
}

PopularityLevel level_for(double score, double lo, double hi) {
  if (!(hi > lo)) return PopularityLevel::excellent;
  const double width = (hi - lo) / 5.0;
  const double bin = std::floor((score - lo) / width);
  return static_cast<PopularityLevel>(static_cast<int>(std::clamp(bin, 0.0, 4.0)));
}

std::map<std::string, PopularityLevel> popularity_levels(const ScoreMap& scores) {
  if (scores.empty()) throw std::invalid_argument("popularity_levels: no scores");
  double lo = scores.begin()->second, hi = lo;
  for (const auto& [id, s] : scores) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  std::map<std::string, PopularityLevel> out;
  for (const auto& [id, s] : scores) out.emplace(id, level_for(s, lo, hi));
  return out;
}

std::vector<double> rescale_for_display(std::span<const double> scores, double new_max) {
  if (scores.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(hi > lo ? (s - lo) / (hi - lo) * new_max : new_max);
  return out;
}

ScoreMap rescale_for_display(const ScoreMap& scores, double new_max) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& [id, s] : scores) values.push_back(s);
  const auto scaled = rescale_for_display(values, new_max);
  ScoreMap out;
  std::size_t i = 0;
  for (const auto& [id, s] : scores) out.emplace(id, scaled[i++]);
  return out;
}

Histogram histogram(std::span<const double> scores, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("histogram: n_bins must be positive");
  if (scores.empty()) throw std::invalid_argument("histogram: no scores");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / n_bins;
  Histogram h;
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
  for (double s : scores) {
    std::size_t bin = 0;
    if (width > 0) {
      const double raw = std::floor((s - lo) / width);
      bin = static_cast<std::size_t>(std::clamp(raw, 0.0, static_cast<double>(n_bins - 1)));
    }
    ++counts[bin];
  }
  const auto n = static_cast<double>(scores.size());
  for (int b = 0; b < n_bins; ++b) {
    const double left = lo + width * b;
    const double right = b + 1 == n_bins ? hi : lo + width * (b + 1);
    const double mass = static_cast<double>(counts[static_cast<std::size_t>(b)]) / n;
    h.left.push_back(left);
    h.right.push_back(right);
    h.mass.push_back(mass);
    h.density.push_back(width > 0 ? mass / width : mass);
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_left,bin_right,density\n";
  for (std::size_t b = 0; b < h.left.size(); ++b)
    out << text::format_general(h.left[b]) << ',' << text::format_general(h.right[b]) << ','
        << text::format_general(h.density[b]) << '\n';
}

void write_scores_csv(std::ostream& out, const ScoreMap& scores) {
  out << "post_id,score\n";
  for (const auto& [id, s] : scores) {
    text::require_csv_safe(id);
    out << id << ',' << text::format_general(s) << '\n';
  }
}

void write_levels_csv(std::ostream& out, const ScoreMap& scores, const std::map<std::string, PopularityLevel>& levels) {
  out << "post_id,score,level\n";
  for (const auto& [id, s] : scores) out << id << ',' << text::format_general(s) << ',' << to_string(levels.at(id)) << '\n';
}

}  // namespace ipop
