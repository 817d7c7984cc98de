#include "ipop/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ipop/eval.hpp"
#include "ipop/text.hpp"

namespace ipop {

FeatureSet::FeatureSet(int dim) : dim_(dim) {
  if (dim < 0) throw std::invalid_argument("feature dimension must be non-negative");
}

void FeatureSet::add(std::string post_id, const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() != dim_)
    throw std::invalid_argument("feature vector '" + post_id + "' has dimension " + std::to_string(values.size()) +
                                ", expected " + std::to_string(dim_));
  if (!values.allFinite()) throw std::invalid_argument("feature vector '" + post_id + "' has non-finite values");
  if (index_.contains(post_id)) throw std::invalid_argument("duplicate feature vector for '" + post_id + "'");
  index_.emplace(post_id, ids_.size());
  ids_.push_back(std::move(post_id));
  data_.insert(data_.end(), values.data(), values.data() + values.size());
}

bool FeatureSet::contains(std::string_view post_id) const { return index_.contains(std::string(post_id)); }

std::size_t FeatureSet::index_of(std::string_view post_id) const {
  auto it = index_.find(std::string(post_id));
  if (it == index_.end()) throw std::invalid_argument("no feature vector for '" + std::string(post_id) + "'");
  return it->second;
}

Eigen::Map<const Eigen::VectorXd> FeatureSet::vector(std::size_t index) const {
  if (index >= ids_.size()) throw std::out_of_range("feature index out of range");
  return Eigen::Map<const Eigen::VectorXd>(data_.data() + index * static_cast<std::size_t>(dim_), dim_);
}

Eigen::MatrixXd FeatureSet::gather(const std::vector<std::size_t>& indices) const {
  Eigen::MatrixXd out(dim_, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vector(indices[k]);
  return out;
}

FeatureSet read_features(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("feature file is empty");
  const auto header = text::split_csv(line);
  if (header.size() != 2 || header[0] != "post_id" || !header[1].starts_with("dim="))
    throw std::invalid_argument("feature file header must be 'post_id,dim=D'");
  const auto dim = text::parse_int(header[1].substr(4));
  if (dim < 1) throw std::invalid_argument("feature dimension must be positive");
  FeatureSet set(static_cast<int>(dim));
  Eigen::VectorXd values(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split_csv(line);
    try {
      if (fields.size() != static_cast<std::size_t>(dim) + 1)
        throw std::invalid_argument("expected " + std::to_string(dim + 1) + " fields, got " +
                                    std::to_string(fields.size()));
      for (Eigen::Index k = 0; k < dim; ++k) values(k) = text::parse_double(fields[static_cast<std::size_t>(k) + 1]);
      set.add(std::string(fields[0]), values);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("feature line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

FeatureSet load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file: " + path.string());
  return read_features(in);
}

void write_features(std::ostream& out, const FeatureSet& features) {
  out << "post_id,dim=" << features.dim() << '\n';
  for (std::size_t i = 0; i < features.size(); ++i) {
    text::require_csv_safe(features.ids()[i]);
    out << features.ids()[i];
    const auto v = features.vector(i);
    for (Eigen::Index k = 0; k < v.size(); ++k) out << ',' << text::format_general(v(k));
    out << '\n';
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be non-negative");
  if (!(l2_penalty >= 0.0)) throw std::invalid_argument("l2_penalty must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (!(lr_decay_per_epoch > 0.0 && lr_decay_per_epoch <= 1.0))
    throw std::invalid_argument("lr_decay_per_epoch must lie in (0, 1]");
}

void write_train_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,train_loss,val_accuracy,learning_rate,selected\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << text::format_general(e.train_loss) << ',' << text::format_general(e.val_metric) << ','
        << text::format_general(e.learning_rate) << ',' << (e.epoch == report.selected_epoch ? 1 : 0) << '\n';
  }
}

PairSplit split_pairs(std::size_t n, double val_fraction, double test_fraction, std::uint64_t seed) {
  if (val_fraction < 0 || test_fraction < 0 || val_fraction + test_fraction > 1)
    throw std::invalid_argument("split fractions must be non-negative and sum to at most 1");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng(seed).split("pair-split").shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n) + 0.5));
  const auto n_test = std::min(n - n_val, static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 0.5)));
  PairSplit s;
  s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), order.end());
  return s;
}

std::vector<int> default_ranker_dims(int feature_dim) { return {feature_dim, 64, 32, 1}; }

namespace {

struct ResolvedPairs {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

ResolvedPairs resolve(const std::vector<Pdip>& pairs, const std::vector<std::size_t>& which,
                      const FeatureSet& features) {
  ResolvedPairs r;
  for (auto i : which) {
    const Pdip& p = pairs.at(i);
    r.a.push_back(features.index_of(p.id_a));
    r.b.push_back(features.index_of(p.id_b));
  }
  return r;
}

void check_disjoint(const PairSplit& split, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (auto i : *part) {
      if (i >= n) throw std::invalid_argument("split index out of range");
      if (seen[i]++) throw std::invalid_argument("train/validation/test splits overlap");
    }
  }
}

}  // namespace

TrainReport train(const MlpModel& initial, const std::vector<Pdip>& pairs, const FeatureSet& features,
                  const PairSplit& split, const TrainConfig& config) {
  config.validate();
  check_disjoint(split, pairs.size());
  if (split.train.empty()) throw std::invalid_argument("no training pairs");
  if (split.val.empty()) throw std::invalid_argument("no validation pairs");
  if (initial.input_dim() != features.dim())
    throw std::invalid_argument("model input dimension does not match feature dimension");

  const ResolvedPairs train_set = resolve(pairs, split.train, features);
  const ResolvedPairs val_set = resolve(pairs, split.val, features);
  const Eigen::MatrixXd val_a = features.gather(val_set.a);
  const Eigen::MatrixXd val_b = features.gather(val_set.b);

  TrainReport report;
  MlpModel model = initial;
  auto state = AdamState<double>::for_model(model);
  double lr = config.learning_rate;
  double best = -std::numeric_limits<double>::infinity();
  const Rng root(config.seed);
  const std::size_t n = split.train.size();
  const auto batch_cap = static_cast<std::size_t>(config.batch_size);

  std::vector<std::size_t> order(n);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const Rng epoch_rng = root.split("epoch").split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    epoch_rng.split("shuffle").shuffle(order);
    Rng augment = epoch_rng.split("augment");

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_cap) {
      const std::size_t count = std::min(batch_cap, n - start);
      std::vector<std::size_t> first(count), second(count);
      Eigen::VectorXd labels(static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t p = order[start + k];
        if (augment.bernoulli(0.5)) {
          first[k] = train_set.b[p];
          second[k] = train_set.a[p];
          labels(static_cast<Eigen::Index>(k)) = 0.0;
        } else {
          first[k] = train_set.a[p];
          second[k] = train_set.b[p];
          labels(static_cast<Eigen::Index>(k)) = 1.0;
        }
      }
      const auto step = pair_batch_grad(model, features.gather(first), features.gather(second), labels);
      loss_sum += step.mean_loss * static_cast<double>(count);
      adam_step(state, model, step.grad, lr, config.l2_penalty, config.adam);
    }

    const Eigen::RowVectorXd qa = forward_batch(model, val_a);
    const Eigen::RowVectorXd qb = forward_batch(model, val_b);
    const double val_acc =
        pairwise_accuracy(std::span<const double>(qa.data(), static_cast<std::size_t>(qa.size())),
                          std::span<const double>(qb.data(), static_cast<std::size_t>(qb.size())))
            .accuracy;
    report.epochs.push_back({epoch, loss_sum / static_cast<double>(n), val_acc, lr});
    if (val_acc > best) {
      best = val_acc;
      report.selected_epoch = epoch;
      report.model = model;
    }
    lr *= config.lr_decay_per_epoch;
  }
  return report;
}

Eigen::RowVectorXd score_all(const MlpModel& model, const FeatureSet& features) {
  if (features.empty()) return Eigen::RowVectorXd();
  if (features.dim() != model.input_dim())
    throw std::invalid_argument("feature vector '" + features.ids().front() + "' has dimension " +
                                std::to_string(features.dim()) + ", model expects " +
                                std::to_string(model.input_dim()));
  std::vector<std::size_t> all(features.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return forward_batch(model, features.gather(all));
}

ScoreMap score_batch(const MlpModel& model, const FeatureSet& features) {
  const Eigen::RowVectorXd q = score_all(model, features);
  ScoreMap out;
  for (std::size_t i = 0; i < features.size(); ++i) out.emplace(features.ids()[i], q(static_cast<Eigen::Index>(i)));
  return out;
}

namespace detail {

void write_mlp_block(std::ostream& out, const MlpModel& model) {
  out << "layer_dims";
  for (int d : model.dims) out << ' ' << d;
  out << '\n';
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto& w = model.weights[l];
    out << "weights " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << (c ? " " : "") << text::format_general(w(r, c));
      out << '\n';
    }
    const auto& b = model.biases[l];
    out << "biases " << l << ' ' << b.size() << '\n';
    for (Eigen::Index r = 0; r < b.size(); ++r) out << (r ? " " : "") << text::format_general(b(r));
    out << '\n';
  }
}

namespace {

std::string expect_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("checkpoint truncated: expected " + std::string(what));
  return line;
}

std::vector<double> parse_row(const std::string& line, Eigen::Index expected) {
  std::istringstream ss(line);
  std::vector<double> row;
  std::string tok;
  while (ss >> tok) row.push_back(text::parse_double(tok));
  if (static_cast<Eigen::Index>(row.size()) != expected)
    throw std::invalid_argument("checkpoint row has " + std::to_string(row.size()) + " values, expected " +
                                std::to_string(expected));
  return row;
}

void expect_header(const std::string& line, const std::string& tag, std::size_t layer, Eigen::Index a,
                   Eigen::Index b = -1) {
  std::ostringstream want;
  want << tag << ' ' << layer << ' ' << a;
  if (b >= 0) want << ' ' << b;
  if (text::trim(line) != want.str())
    throw std::invalid_argument("checkpoint: expected '" + want.str() + "', got '" + line + "'");
}

}  // namespace

MlpModel read_mlp_block(std::istream& in) {
  std::istringstream dims_line(expect_line(in, "layer_dims"));
  std::string tag;
  dims_line >> tag;
  if (tag != "layer_dims") throw std::invalid_argument("checkpoint: expected layer_dims");
  std::vector<int> dims;
  int d;
  while (dims_line >> d) dims.push_back(d);
  MlpModel model = MlpModel::zeros(dims);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    auto& w = model.weights[l];
    expect_header(expect_line(in, "weights"), "weights", l, w.rows(), w.cols());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const auto row = parse_row(expect_line(in, "weight row"), w.cols());
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[static_cast<std::size_t>(c)];
    }
    auto& b = model.biases[l];
    expect_header(expect_line(in, "biases"), "biases", l, b.size());
    const auto row = parse_row(expect_line(in, "bias row"), b.size());
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = row[static_cast<std::size_t>(r)];
  }
  if (!model.all_finite()) throw std::invalid_argument("checkpoint contains non-finite parameters");
  return model;
}

}  // namespace detail

namespace {
constexpr std::string_view kCheckpointTag = "ipop-mlp v1";
}

void write_checkpoint(std::ostream& out, const MlpModel& model) {
  out << kCheckpointTag << '\n';
  detail::write_mlp_block(out, model);
}

MlpModel read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kCheckpointTag)
    throw std::invalid_argument("not an ipop model checkpoint (missing '" + std::string(kCheckpointTag) + "')");
  return detail::read_mlp_block(in);
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  write_checkpoint(out, model);
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

}  // namespace ipop
