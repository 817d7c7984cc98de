#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipop/baseline.hpp"
#include "ipop/corpus.hpp"
#include "ipop/eval.hpp"
#include "ipop/text.hpp"

namespace ipop {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthConfig, n_users, posts_per_user, mu_mean, mu_std, sigma_true,
                                                feature_dim, n_informative, feature_noise_std, hashtag_vocab,
                                                mention_vocab, word_vocab, time_span_days, reference_time, seed,
                                                user_effect_std, n_user_style, user_style_noise_std,
                                                follower_noise_std)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MinerConfig, threshold, sigma, max_interval_days, max_caption_words,
                                                reference_time)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AdamHyper, beta1, beta2, eps)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, learning_rate, l2_penalty, batch_size, epochs,
                                                lr_decay_per_epoch, seed, adam)
}  // namespace ipop

namespace ipop::cli {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthOptions, seed, out_dir, synth)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MineOptions, seed, out_dir, posts, features, miner)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainOptions, seed, out_dir, pairs, features, train, hidden,
                                                val_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalOptions, seed, out_dir, checkpoint, pairs, features)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScoreOptions, seed, out_dir, checkpoint, features, rescale_max,
                                                histogram_bins)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AblateOptions, seed, out_dir, pairs, features, train, hidden,
                                                val_fraction, test_fraction, levels)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(StatsOptions, seed, out_dir, posts)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AuditOptions, seed, out_dir, posts, pairs, features, miner)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BaselineOptions, seed, out_dir, posts, pairs, features, nonvisual,
                                                train, val_fraction, test_fraction)

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Collects input/output digests and writes the run manifest.
class Run {
 public:
  Run(std::string command, Json config, const std::string& out_dir)
      : command_(std::move(command)), config_(std::move(config)), out_dir_(out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec || !fs::is_directory(out_dir_)) throw std::runtime_error("cannot create output directory: " + out_dir);
  }

  fs::path input(const std::string& path) {
    if (!fs::exists(path)) throw std::runtime_error("input file not found: " + path);
    inputs_.push_back({{"path", path}, {"fnv1a64", file_digest(path)}});
    return path;
  }

  void output(const std::string& name, const std::function<void(std::ostream&)>& write) {
    const fs::path path = out_dir_ / name;
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write output file: " + path.string());
      write(out);
      if (!out) throw std::runtime_error("error while writing: " + path.string());
    }
    outputs_.push_back({{"path", name}, {"fnv1a64", file_digest(path)}});
  }

  void finish() {
    Json manifest = {{"tool", "ipop"}, {"version", kVersion}, {"command", command_},
                     {"config", config_},  {"inputs", inputs_},  {"outputs", outputs_}};
    const fs::path path = out_dir_ / (command_ + ".manifest.json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << manifest.dump(2) << '\n';
  }

 private:
  std::string command_;
  Json config_;
  fs::path out_dir_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
};

std::vector<Post> load_posts_reporting(const std::string& path) {
  ParseResult parsed = load_posts(path);
  for (const auto& d : parsed.diagnostics) std::cerr << path << ':' << d.line << ": " << d.message << '\n';
  return std::move(parsed.posts);
}

std::unordered_set<std::string> id_set(const FeatureSet& features) {
  return {features.ids().begin(), features.ids().end()};
}

void write_name_values(std::ostream& out, const std::vector<std::pair<std::string, double>>& rows) {
  out << "name,value\n";
  for (const auto& [name, value] : rows) out << name << ',' << text::format_general(value) << '\n';
}

}  // namespace

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run_synth(const SynthOptions& o) {
  SynthConfig config = o.synth;
  config.seed = o.seed;
  SynthOptions resolved = o;
  resolved.synth = config;
  Run run("synth", resolved, o.out_dir);
  const SynthCorpus corpus = generate_corpus(config);
  run.output("posts.jsonl", [&](std::ostream& out) { write_posts(out, corpus.posts); });
  run.output("features.csv", [&](std::ostream& out) { write_features(out, corpus.features); });
  run.output("latent.csv", [&](std::ostream& out) { write_latent(out, corpus.latent_mu); });
  run.output("nonvisual.csv", [&](std::ostream& out) { write_nonvisual(out, corpus.nonvisual); });
  run.finish();
  std::cout << "synth: " << corpus.posts.size() << " posts from " << config.n_users << " users, feature dim "
            << config.feature_dim << " -> " << o.out_dir << '\n';
  return 0;
}

int run_mine(const MineOptions& o) {
  Run run("mine", o, o.out_dir);
  const auto posts = load_posts_reporting(run.input(o.posts));
  const auto candidates = filter_candidates(posts, o.miner.reference_time);
  std::vector<Pdip> pairs;
  if (o.features.empty()) {
    pairs = mine_pairs(candidates, o.miner);
  } else {
    const FeatureSet features = load_features(run.input(o.features));
    pairs = mine_pairs(candidates, id_set(features), o.miner);
  }
  const PairStats stats = pair_stats(pairs, posts);
  run.output("pairs.csv", [&](std::ostream& out) { write_pairs(out, pairs); });
  run.output("pair_stats.csv", [&](std::ostream& out) { write_pair_stats_csv(out, stats); });
  run.finish();
  std::cout << "mine: " << posts.size() << " posts, " << candidates.size() << " candidates, " << pairs.size()
            << " pairs";
  if (!pairs.empty())
    std::cout << " (mean prob " << text::format_fixed(stats.mean_prob, 4) << ", mean interval "
              << text::format_fixed(stats.mean_interval_days, 2) << " days)";
  std::cout << '\n';
  return 0;
}

int run_train(const TrainOptions& o) {
  TrainOptions resolved = o;
  resolved.train.seed = o.seed;
  Run run("train", resolved, o.out_dir);
  const auto pairs = load_pairs(run.input(o.pairs));
  const FeatureSet features = load_features(run.input(o.features));
  for (const auto& p : pairs) {
    features.index_of(p.id_a);
    features.index_of(p.id_b);
  }
  std::vector<int> dims = {features.dim()};
  dims.insert(dims.end(), o.hidden.begin(), o.hidden.end());
  dims.push_back(1);
  const PairSplit split = split_pairs(pairs.size(), o.val_fraction, 0.0, o.seed);
  const MlpModel initial = init_model(dims, Rng(o.seed).split("init").next_u64());
  const TrainReport report = train(initial, pairs, features, split, resolved.train);
  run.output("model.ckpt", [&](std::ostream& out) { write_checkpoint(out, report.model); });
  run.output("train_report.csv", [&](std::ostream& out) { write_train_report_csv(out, report); });
  run.finish();
  const auto& best = report.epochs[static_cast<std::size_t>(report.selected_epoch - 1)];
  std::cout << "train: " << split.train.size() << " train / " << split.val.size() << " val pairs, selected epoch "
            << report.selected_epoch << " (val accuracy " << text::format_fixed(best.val_metric, 4) << ")\n";
  return 0;
}

int run_eval(const EvalOptions& o) {
  Run run("eval", o, o.out_dir);
  const MlpModel model = load_checkpoint(run.input(o.checkpoint));
  const auto pairs = load_pairs(run.input(o.pairs));
  const FeatureSet features = load_features(run.input(o.features));
  const EvalResult r = pairwise_accuracy(score_batch(model, features), pairs);
  run.output("eval.csv", [&](std::ostream& out) { write_eval_csv(out, r); });
  run.finish();
  std::cout << "eval: pairwise accuracy " << text::format_fixed(r.accuracy, 4) << " over " << r.n_pairs
            << " pairs (" << r.n_ties << " ties)\n";
  return 0;
}

int run_score(const ScoreOptions& o) {
  Run run("score", o, o.out_dir);
  const MlpModel model = load_checkpoint(run.input(o.checkpoint));
  const FeatureSet features = load_features(run.input(o.features));
  const ScoreMap scores = score_batch(model, features);
  if (scores.empty()) throw std::runtime_error("feature file has no vectors to score");
  std::vector<double> raw;
  for (const auto& [id, s] : scores) raw.push_back(s);
  const ScoreMap emitted = o.rescale_max > 0 ? rescale_for_display(scores, o.rescale_max) : scores;
  run.output("scores.csv", [&](std::ostream& out) { write_scores_csv(out, emitted); });
  run.output("levels.csv", [&](std::ostream& out) { write_levels_csv(out, scores, popularity_levels(scores)); });
  run.output("histogram.csv", [&](std::ostream& out) { write_histogram_csv(out, histogram(raw, o.histogram_bins)); });
  if (raw.size() >= 2) {
    const GaussianFit fit = fit_gaussian(raw);
    run.output("gaussian.csv", [&](std::ostream& out) { write_name_values(out, {{"mean", fit.mean}, {"std", fit.std}}); });
    std::cout << "score: " << raw.size() << " images, mean " << text::format_fixed(fit.mean, 4) << ", std "
              << text::format_fixed(fit.std, 4) << '\n';
  } else {
    std::cout << "score: 1 image\n";
  }
  run.finish();
  return 0;
}

int run_ablate(const AblateOptions& o) {
  AblateOptions resolved = o;
  resolved.train.seed = o.seed;
  Run run("ablate", resolved, o.out_dir);
  const auto pairs = load_pairs(run.input(o.pairs));
  const FeatureSet features = load_features(run.input(o.features));
  std::vector<int> dims = {features.dim()};
  dims.insert(dims.end(), o.hidden.begin(), o.hidden.end());
  dims.push_back(1);
  const PairSplit split = split_pairs(pairs.size(), o.val_fraction, o.test_fraction, o.seed);
  const auto rows = noise_ablation(pairs, features, split, dims, resolved.train, o.levels);
  run.output("ablation.csv", [&](std::ostream& out) { write_noise_table_csv(out, rows); });
  run.finish();
  for (const auto& r : rows)
    std::cout << "ablate: q=" << text::format_fixed(r.q, 2) << " test accuracy " << text::format_fixed(r.test_accuracy, 4)
              << '\n';
  return 0;
}

int run_stats(const StatsOptions& o) {
  Run run("stats", o, o.out_dir);
  const auto posts = load_posts_reporting(run.input(o.posts));
  if (posts.empty()) throw std::runtime_error("corpus is empty: " + o.posts);
  const CorpusStats s = corpus_stats(posts);
  run.output("stats.csv", [&](std::ostream& out) { write_stats_csv(out, s); });
  run.finish();
  std::cout << "stats: " << s.n_posts << " posts, " << s.n_users << " users, mean likes "
            << text::format_fixed(s.mean_likes, 1) << '\n';
  return 0;
}

int run_audit(const AuditOptions& o) {
  Run run("audit", o, o.out_dir);
  const auto posts = load_posts_reporting(run.input(o.posts));
  const auto pairs = load_pairs(run.input(o.pairs));
  std::optional<std::unordered_set<std::string>> present;
  if (!o.features.empty()) present = id_set(load_features(run.input(o.features)));
  const auto violations = audit_pairs(pairs, posts, o.miner, present ? &*present : nullptr);
  run.output("audit.csv", [&](std::ostream& out) {
    out << "pair_index,constraint,detail\n";
    for (const auto& v : violations) out << v.pair_index << ',' << v.constraint << ',' << v.detail << '\n';
  });
  run.finish();
  std::cout << "audit: " << pairs.size() << " pairs, " << violations.size() << " violations\n";
  return violations.empty() ? 0 : 1;
}

int run_baseline(const BaselineOptions& o) {
  BaselineOptions resolved = o;
  resolved.train.seed = o.seed;
  Run run("baseline", resolved, o.out_dir);
  const auto posts = load_posts_reporting(run.input(o.posts));
  const auto pairs = load_pairs(run.input(o.pairs));
  const FeatureSet features = load_features(run.input(o.features));
  const NonVisualTable nonvisual = load_nonvisual(run.input(o.nonvisual));

  // Regress on the images behind the training pairs; rank the held-out pairs.
  const PairSplit pair_split = split_pairs(pairs.size(), 0.0, o.test_fraction, o.seed);
  std::unordered_set<std::string> train_ids;
  for (auto i : pair_split.train) {
    train_ids.insert(pairs[i].id_a);
    train_ids.insert(pairs[i].id_b);
  }
  std::vector<Post> train_posts;
  for (const auto& p : posts)
    if (train_ids.contains(p.post_id)) train_posts.push_back(p);
  const auto samples = make_baseline_samples(train_posts, nonvisual);
  const PairSplit sample_split = split_pairs(samples.size(), o.val_fraction, 0.0, o.seed);

  const AbsolutePopModel initial = init_baseline(features.dim(), Rng(o.seed).split("init").next_u64());
  const BaselineReport report = train_baseline(initial, samples, features, sample_split, resolved.train);
  std::vector<double> targets;
  for (const auto& s : samples) targets.push_back(s.target);
  const double r_train = pearson(baseline_predict(report.model, samples, features), targets);
  const auto test_pairs = select(pairs, pair_split.test);
  const EvalResult intrinsic = eval_baseline_as_intrinsic(report.model, test_pairs, features, nonvisual);

  run.output("baseline.ckpt", [&](std::ostream& out) { write_baseline_checkpoint(out, report.model); });
  run.output("baseline_report.csv", [&](std::ostream& out) { write_baseline_report_csv(out, report); });
  run.output("baseline_eval.csv", [&](std::ostream& out) {
    write_name_values(out, {{"train_pearson", r_train},
                            {"intrinsic_accuracy", intrinsic.accuracy},
                            {"n_test_pairs", static_cast<double>(intrinsic.n_pairs)}});
  });
  run.finish();
  std::cout << "baseline: train Pearson " << text::format_fixed(r_train, 4) << ", intrinsic accuracy "
            << text::format_fixed(intrinsic.accuracy, 4) << " on " << intrinsic.n_pairs << " test pairs\n";
  return 0;
}

int run_manifest(const fs::path& manifest_path, const std::optional<std::string>& out_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  Json manifest = Json::parse(in);
  const std::string command = manifest.at("command").get<std::string>();
  Json config = manifest.at("config");
  if (out_dir) config["out_dir"] = *out_dir;
  if (command == "synth") return run_synth(config.get<SynthOptions>());
  if (command == "mine") return run_mine(config.get<MineOptions>());
  if (command == "train") return run_train(config.get<TrainOptions>());
  if (command == "eval") return run_eval(config.get<EvalOptions>());
  if (command == "score") return run_score(config.get<ScoreOptions>());
  if (command == "ablate") return run_ablate(config.get<AblateOptions>());
  if (command == "stats") return run_stats(config.get<StatsOptions>());
  if (command == "audit") return run_audit(config.get<AuditOptions>());
  if (command == "baseline") return run_baseline(config.get<BaselineOptions>());
  throw std::runtime_error("manifest names an unknown command: " + command);
}

namespace {

void add_common(CLI::App* sub, std::uint64_t& seed, std::string& out_dir) {
  sub->add_option("--seed", seed, "Global seed for every random stream")->capture_default_str();
  sub->add_option("--out-dir", out_dir, "Directory for outputs and the run manifest")->capture_default_str();
}

void add_miner(CLI::App* sub, MinerConfig& m, bool require_reference) {
  sub->add_option("--threshold", m.threshold, "Minimum discriminability probability T")->capture_default_str();
  sub->add_option("--sigma", m.sigma, "Std of log-likes around the latent mean")->capture_default_str();
  sub->add_option("--max-interval-days", m.max_interval_days, "Maximum upload gap within a pair")
      ->capture_default_str();
  sub->add_option("--max-caption-words", m.max_caption_words, "Maximum descriptive words per caption")
      ->capture_default_str();
  auto* ref = sub->add_option("--reference-time", m.reference_time, "Epoch seconds the like counts were observed");
  if (require_reference) ref->required();
}

void add_training(CLI::App* sub, TrainConfig& t) {
  sub->add_option("--lr", t.learning_rate, "Initial learning rate")->capture_default_str();
  sub->add_option("--l2", t.l2_penalty, "L2 penalty multiplier")->capture_default_str();
  sub->add_option("--batch-size", t.batch_size, "Minibatch size")->capture_default_str();
  sub->add_option("--epochs", t.epochs, "Number of epochs")->capture_default_str();
  sub->add_option("--lr-decay", t.lr_decay_per_epoch, "Learning-rate factor applied after each epoch")
      ->capture_default_str();
}

}  // namespace

int main_entry(int argc, const char* const* argv) {
  CLI::App app{"Intrinsic image popularity: pair mining, pairwise ranking and evaluation"};
  app.require_subcommand(1);
  std::optional<std::string> rerun_out;

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus with known latent popularity");
  add_common(s, synth.seed, synth.out_dir);
  s->add_option("--users", synth.synth.n_users, "Number of users")->capture_default_str();
  s->add_option("--posts-per-user", synth.synth.posts_per_user, "Posts per user")->capture_default_str();
  s->add_option("--mu-mean", synth.synth.mu_mean, "Mean latent log-popularity")->capture_default_str();
  s->add_option("--mu-std", synth.synth.mu_std, "Std of latent log-popularity")->capture_default_str();
  s->add_option("--sigma-true", synth.synth.sigma_true, "Std of log-likes around the latent mean")
      ->capture_default_str();
  s->add_option("--feature-dim", synth.synth.feature_dim, "Feature dimension")->capture_default_str();
  s->add_option("--informative", synth.synth.n_informative, "Feature dims carrying the latent signal")
      ->capture_default_str();
  s->add_option("--feature-noise", synth.synth.feature_noise_std, "Noise std on informative dims")
      ->capture_default_str();
  s->add_option("--time-span-days", synth.synth.time_span_days, "Upload times span this many days")
      ->capture_default_str();
  s->add_option("--reference-time", synth.synth.reference_time, "Observation time in epoch seconds")
      ->capture_default_str();
  s->add_option("--user-effect", synth.synth.user_effect_std, "Std of the per-user log-likes offset")
      ->capture_default_str();
  s->add_option("--user-style-dims", synth.synth.n_user_style, "Feature dims tracking the user offset")
      ->capture_default_str();
  s->add_option("--user-style-noise", synth.synth.user_style_noise_std, "Noise std on user-style dims")
      ->capture_default_str();
  s->add_option("--follower-noise", synth.synth.follower_noise_std, "Noise std of log followers")
      ->capture_default_str();
  bool confounded = false;
  s->add_flag("--confounded", confounded, "Start from the user-confounded preset");

  MineOptions mine;
  auto* m = app.add_subcommand("mine", "Filter candidates and mine popularity-discriminable pairs");
  add_common(m, mine.seed, mine.out_dir);
  m->add_option("--posts", mine.posts, "Line-delimited post records")->required();
  m->add_option("--features", mine.features, "Only pair posts that have feature vectors");
  add_miner(m, mine.miner, true);

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train the pairwise ranker");
  add_common(t, tr.seed, tr.out_dir);
  t->add_option("--pairs", tr.pairs, "Pairs CSV")->required();
  t->add_option("--features", tr.features, "Feature CSV")->required();
  add_training(t, tr.train);
  t->add_option("--hidden", tr.hidden, "Hidden layer widths")->capture_default_str();
  t->add_option("--val-fraction", tr.val_fraction, "Fraction of pairs held out for model selection")
      ->capture_default_str();

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Pairwise accuracy of a checkpoint");
  add_common(e, ev.seed, ev.out_dir);
  e->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  e->add_option("--pairs", ev.pairs, "Pairs CSV")->required();
  e->add_option("--features", ev.features, "Feature CSV")->required();

  ScoreOptions sc;
  auto* c = app.add_subcommand("score", "Score images, with histogram, Gaussian fit and levels");
  add_common(c, sc.seed, sc.out_dir);
  c->add_option("--checkpoint", sc.checkpoint, "Model checkpoint")->required();
  c->add_option("--features", sc.features, "Feature CSV")->required();
  c->add_option("--rescale-max", sc.rescale_max, "Map emitted scores affinely onto [0, value]");
  c->add_option("--bins", sc.histogram_bins, "Histogram bins")->capture_default_str();

  AblateOptions ab;
  auto* a = app.add_subcommand("ablate", "Retrain under simulated label noise");
  add_common(a, ab.seed, ab.out_dir);
  a->add_option("--pairs", ab.pairs, "Pairs CSV")->required();
  a->add_option("--features", ab.features, "Feature CSV")->required();
  add_training(a, ab.train);
  a->add_option("--hidden", ab.hidden, "Hidden layer widths")->capture_default_str();
  a->add_option("--levels", ab.levels, "Noise levels q in [0, 0.5)")->capture_default_str();
  a->add_option("--val-fraction", ab.val_fraction, "Validation fraction")->capture_default_str();
  a->add_option("--test-fraction", ab.test_fraction, "Test fraction")->capture_default_str();

  StatsOptions st;
  auto* x = app.add_subcommand("stats", "Corpus statistics");
  add_common(x, st.seed, st.out_dir);
  x->add_option("--posts", st.posts, "Line-delimited post records")->required();

  AuditOptions au;
  auto* u = app.add_subcommand("audit", "Re-check every mining constraint on a pairs file");
  add_common(u, au.seed, au.out_dir);
  u->add_option("--posts", au.posts, "Line-delimited post records")->required();
  u->add_option("--pairs", au.pairs, "Pairs CSV")->required();
  u->add_option("--features", au.features, "Also require feature vectors for both images");
  add_miner(u, au.miner, true);

  BaselineOptions bl;
  auto* b = app.add_subcommand("baseline", "Train the absolute-popularity baseline and rank held-out pairs");
  add_common(b, bl.seed, bl.out_dir);
  b->add_option("--posts", bl.posts, "Line-delimited post records")->required();
  b->add_option("--pairs", bl.pairs, "Pairs CSV")->required();
  b->add_option("--features", bl.features, "Feature CSV")->required();
  b->add_option("--nonvisual", bl.nonvisual, "Non-visual features CSV")->required();
  add_training(b, bl.train);
  b->add_option("--val-fraction", bl.val_fraction, "Validation fraction")->capture_default_str();
  b->add_option("--test-fraction", bl.test_fraction, "Fraction of pairs held out for ranking")
      ->capture_default_str();

  std::string manifest_path;
  auto* r = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  r->add_option("manifest", manifest_path, "Manifest JSON")->required();
  r->add_option("--out-dir", rerun_out, "Write outputs here instead of the recorded directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*s) {
      if (confounded) {
        SynthConfig preset = SynthConfig::confounded();
        // Explicit flags still win over the preset.
        if (s->count("--user-effect") == 0) synth.synth.user_effect_std = preset.user_effect_std;
        if (s->count("--user-style-dims") == 0) synth.synth.n_user_style = preset.n_user_style;
        if (s->count("--user-style-noise") == 0) synth.synth.user_style_noise_std = preset.user_style_noise_std;
        if (s->count("--follower-noise") == 0) synth.synth.follower_noise_std = preset.follower_noise_std;
      }
      return run_synth(synth);
    }
    if (*m) return run_mine(mine);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*c) return run_score(sc);
    if (*a) return run_ablate(ab);
    if (*x) return run_stats(st);
    if (*u) return run_audit(au);
    if (*b) return run_baseline(bl);
    if (*r) return run_manifest(manifest_path, rerun_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}

int main_entry(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("ipop");
  for (const auto& a : args) argv.push_back(a.c_str());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ipop::cli
