#include "ipop/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ipop/text.hpp"

namespace ipop {

Eigen::Matrix<double, NonVisualFeatures::kDim, 1> NonVisualFeatures::transformed() const {
  Eigen::Matrix<double, kDim, 1> v;
  v << followers, followings, n_posts, n_hashtags, n_mentions, caption_length;
  if (!v.allFinite() || (v.array() < 0.0).any())
    throw std::invalid_argument("non-visual counts must be finite and non-negative");
  return v.array().log1p();
}

namespace {
constexpr const char* kNonVisualHeader = "post_id,followers,followings,n_posts,n_hashtags,n_mentions,caption_length";
}

NonVisualTable read_nonvisual(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kNonVisualHeader)
    throw std::invalid_argument(std::string("non-visual file header must be '") + kNonVisualHeader + "'");
  NonVisualTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv(line);
    try {
      if (f.size() != 7) throw std::invalid_argument("expected 7 fields");
      NonVisualFeatures nv{text::parse_double(f[1]), text::parse_double(f[2]), text::parse_double(f[3]),
                           text::parse_double(f[4]), text::parse_double(f[5]), text::parse_double(f[6])};
      (void)nv.transformed();
      if (!table.emplace(std::string(f[0]), nv).second) throw std::invalid_argument("duplicate post_id");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("non-visual line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

NonVisualTable load_nonvisual(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open non-visual file: " + path.string());
  return read_nonvisual(in);
}

void write_nonvisual(std::ostream& out, const NonVisualTable& table) {
  out << kNonVisualHeader << '\n';
  for (const auto& [id, nv] : table) {
    text::require_csv_safe(id);
    out << id << ',' << text::format_general(nv.followers) << ',' << text::format_general(nv.followings) << ','
        << text::format_general(nv.n_posts) << ',' << text::format_general(nv.n_hashtags) << ','
        << text::format_general(nv.n_mentions) << ',' << text::format_general(nv.caption_length) << '\n';
  }
}

AbsolutePopModel init_baseline(const std::vector<int>& visual_dims, const std::vector<int>& head_dims,
                               std::uint64_t seed) {
  if (head_dims.empty() || head_dims.front() != 1 + NonVisualFeatures::kDim)
    throw std::invalid_argument("baseline head must take exactly 7 inputs");
  const Rng root(seed);
  return {init_model(visual_dims, root.split("visual").next_u64()),
          init_model(head_dims, root.split("head").next_u64())};
}

AbsolutePopModel init_baseline(int feature_dim, std::uint64_t seed) {
  return init_baseline(default_ranker_dims(feature_dim), kBaselineHeadDims, seed);
}

namespace {

Eigen::MatrixXd head_input(const AbsolutePopModel& model, const Eigen::MatrixXd& visual,
                           const Eigen::MatrixXd& nonvisual, ForwardCache<double>* visual_cache) {
  if (nonvisual.rows() != NonVisualFeatures::kDim || nonvisual.cols() != visual.cols())
    throw std::invalid_argument("non-visual batch must be 6 x batch and match the visual batch");
  Eigen::MatrixXd h(1 + NonVisualFeatures::kDim, visual.cols());
  h.row(0) = forward_batch(model.visual, visual, visual_cache);
  h.bottomRows(NonVisualFeatures::kDim) = nonvisual;
  return h;
}

}  // namespace

Eigen::RowVectorXd baseline_forward_batch(const AbsolutePopModel& model, const Eigen::MatrixXd& visual,
                                          const Eigen::MatrixXd& nonvisual) {
  return forward_batch(model.head, head_input(model, visual, nonvisual, nullptr));
}

double baseline_forward(const AbsolutePopModel& model, const Eigen::Ref<const Eigen::VectorXd>& x_visual,
                        const NonVisualFeatures& nv) {
  const Eigen::MatrixXd v = x_visual;
  const Eigen::MatrixXd n = nv.transformed();
  return baseline_forward_batch(model, v, n)(0);
}

BaselineBatchResult baseline_batch_grad(const AbsolutePopModel& model, const Eigen::MatrixXd& visual,
                                        const Eigen::MatrixXd& nonvisual, const Eigen::VectorXd& targets) {
  const Eigen::Index batch = visual.cols();
  if (batch == 0 || targets.size() != batch) throw std::invalid_argument("baseline_batch_grad: bad batch shape");
  ForwardCache<double> visual_cache, head_cache;
  const Eigen::MatrixXd h = head_input(model, visual, nonvisual, &visual_cache);
  const Eigen::RowVectorXd pred = forward_batch(model.head, h, &head_cache);
  const Eigen::RowVectorXd resid = pred - targets.transpose();

  BaselineBatchResult r;
  r.mean_loss = resid.squaredNorm() / static_cast<double>(batch);
  const Eigen::RowVectorXd upstream = resid * (2.0 / static_cast<double>(batch));
  Eigen::MatrixXd head_input_grad;
  r.grad.head = backward_batch(model.head, head_cache, upstream, &head_input_grad);
  r.grad.visual = backward_batch(model.visual, visual_cache, Eigen::RowVectorXd(head_input_grad.row(0)));
  return r;
}

double mse_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) throw std::invalid_argument("mse_loss: length mismatch");
  if (preds.empty()) throw std::invalid_argument("mse_loss: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  return s / static_cast<double>(preds.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least two values");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

struct ResolvedSamples {
  std::vector<std::size_t> feature_index;
  Eigen::MatrixXd nonvisual;  // transformed, 6 x n
  Eigen::VectorXd targets;
};

ResolvedSamples resolve(const std::vector<BaselineSample>& samples, const std::vector<std::size_t>& which,
                        const FeatureSet& features) {
  ResolvedSamples r;
  r.nonvisual.resize(NonVisualFeatures::kDim, static_cast<Eigen::Index>(which.size()));
  r.targets.resize(static_cast<Eigen::Index>(which.size()));
  for (std::size_t k = 0; k < which.size(); ++k) {
    const auto& s = samples.at(which[k]);
    r.feature_index.push_back(features.index_of(s.post_id));
    r.nonvisual.col(static_cast<Eigen::Index>(k)) = s.nonvisual.transformed();
    r.targets(static_cast<Eigen::Index>(k)) = s.target;
  }
  return r;
}

}  // namespace

BaselineReport train_baseline(const AbsolutePopModel& initial, const std::vector<BaselineSample>& samples,
                              const FeatureSet& features, const PairSplit& split, const TrainConfig& config) {
  config.validate();
  if (split.train.empty()) throw std::invalid_argument("no training samples");
  if (split.val.empty()) throw std::invalid_argument("no validation samples");
  if (initial.visual.input_dim() != features.dim())
    throw std::invalid_argument("visual scorer input dimension does not match feature dimension");
  const ResolvedSamples tr = resolve(samples, split.train, features);
  const ResolvedSamples va = resolve(samples, split.val, features);
  const Eigen::MatrixXd val_visual = features.gather(va.feature_index);

  BaselineReport report;
  AbsolutePopModel model = initial;
  auto visual_state = AdamState<double>::for_model(model.visual);
  auto head_state = AdamState<double>::for_model(model.head);
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  const Rng root(config.seed);
  const std::size_t n = split.train.size();
  const auto batch_cap = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    root.split("epoch").split(static_cast<std::uint64_t>(epoch)).split("shuffle").shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_cap) {
      const std::size_t count = std::min(batch_cap, n - start);
      std::vector<std::size_t> cols(count);
      Eigen::MatrixXd nv(NonVisualFeatures::kDim, static_cast<Eigen::Index>(count));
      Eigen::VectorXd y(static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        const auto i = order[start + k];
        cols[k] = tr.feature_index[i];
        nv.col(static_cast<Eigen::Index>(k)) = tr.nonvisual.col(static_cast<Eigen::Index>(i));
        y(static_cast<Eigen::Index>(k)) = tr.targets(static_cast<Eigen::Index>(i));
      }
      const auto step = baseline_batch_grad(model, features.gather(cols), nv, y);
      loss_sum += step.mean_loss * static_cast<double>(count);
      adam_step(visual_state, model.visual, step.grad.visual, lr, config.l2_penalty, config.adam);
      adam_step(head_state, model.head, step.grad.head, lr, config.l2_penalty, config.adam);
    }
    const Eigen::RowVectorXd pred = baseline_forward_batch(model, val_visual, va.nonvisual);
    const double val_mse = (pred - va.targets.transpose()).squaredNorm() / static_cast<double>(pred.size());
    report.epochs.push_back({epoch, loss_sum / static_cast<double>(n), val_mse, lr});
    if (val_mse < best) {
      best = val_mse;
      report.selected_epoch = epoch;
      report.model = model;
    }
    lr *= config.lr_decay_per_epoch;
  }
  if (report.selected_epoch == 0) {
    // Every epoch produced a non-finite validation loss.
    report.selected_epoch = config.epochs;
    report.model = model;
  }
  return report;
}

void write_baseline_report_csv(std::ostream& out, const BaselineReport& report) {
  out << "epoch,train_loss,val_mse,learning_rate,selected\n";
  for (const auto& e : report.epochs)
    out << e.epoch << ',' << text::format_general(e.train_loss) << ',' << text::format_general(e.val_metric) << ','
        << text::format_general(e.learning_rate) << ',' << (e.epoch == report.selected_epoch ? 1 : 0) << '\n';
}

std::vector<double> baseline_predict(const AbsolutePopModel& model, const std::vector<BaselineSample>& samples,
                                     const FeatureSet& features) {
  if (samples.empty()) return {};
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const ResolvedSamples r = resolve(samples, all, features);
  const Eigen::RowVectorXd pred = baseline_forward_batch(model, features.gather(r.feature_index), r.nonvisual);
  return {pred.data(), pred.data() + pred.size()};
}

EvalResult eval_baseline_as_intrinsic(const AbsolutePopModel& model, const std::vector<Pdip>& pairs,
                                      const FeatureSet& features, const NonVisualTable& nonvisual) {
  if (pairs.empty()) throw std::invalid_argument("eval_baseline_as_intrinsic: no pairs");
  auto context = [&](const std::string& id) {
    auto it = nonvisual.find(id);
    if (it == nonvisual.end()) throw std::invalid_argument("no non-visual features for '" + id + "'");
    return it->second.transformed();
  };
  std::vector<std::size_t> a, b;
  Eigen::MatrixXd shared(NonVisualFeatures::kDim, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    a.push_back(features.index_of(pairs[k].id_a));
    b.push_back(features.index_of(pairs[k].id_b));
    shared.col(static_cast<Eigen::Index>(k)) = 0.5 * (context(pairs[k].id_a) + context(pairs[k].id_b));
  }
  const Eigen::RowVectorXd qa = baseline_forward_batch(model, features.gather(a), shared);
  const Eigen::RowVectorXd qb = baseline_forward_batch(model, features.gather(b), shared);
  return pairwise_accuracy(std::span<const double>(qa.data(), static_cast<std::size_t>(qa.size())),
                           std::span<const double>(qb.data(), static_cast<std::size_t>(qb.size())));
}

namespace {
constexpr std::string_view kBaselineTag = "ipop-baseline v1";
}

void write_baseline_checkpoint(std::ostream& out, const AbsolutePopModel& model) {
  out << kBaselineTag << '\n';
  out << "section visual\n";
  detail::write_mlp_block(out, model.visual);
  out << "section head\n";
  detail::write_mlp_block(out, model.head);
}

AbsolutePopModel read_baseline_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kBaselineTag)
    throw std::invalid_argument("not a baseline checkpoint");
  AbsolutePopModel m;
  if (!std::getline(in, line) || text::trim(line) != "section visual")
    throw std::invalid_argument("baseline checkpoint: expected 'section visual'");
  m.visual = detail::read_mlp_block(in);
  if (!std::getline(in, line) || text::trim(line) != "section head")
    throw std::invalid_argument("baseline checkpoint: expected 'section head'");
  m.head = detail::read_mlp_block(in);
  if (m.head.input_dim() != 1 + NonVisualFeatures::kDim)
    throw std::invalid_argument("baseline checkpoint: head must take 7 inputs");
  return m;
}

}  // namespace ipop
