#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ipop/mlp.hpp"
#include "ipop/pdip.hpp"

namespace ipop {

struct FeatureVector {
  std::string post_id;
  Eigen::VectorXd values;
};

/// Fixed-dimension feature vectors keyed by post id, stored column-wise.
class FeatureSet {
 public:
  explicit FeatureSet(int dim = 0);

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }

  /// Throws on a duplicate id, a dimension mismatch or a non-finite value.
  void add(std::string post_id, const Eigen::Ref<const Eigen::VectorXd>& values);
  void add(const FeatureVector& fv) { add(fv.post_id, fv.values); }

  bool contains(std::string_view post_id) const;
  /// Throws std::invalid_argument naming the id when it is absent.
  std::size_t index_of(std::string_view post_id) const;

  Eigen::Map<const Eigen::VectorXd> vector(std::size_t index) const;
  Eigen::Map<const Eigen::VectorXd> vector(std::string_view post_id) const { return vector(index_of(post_id)); }
  FeatureVector at(std::size_t index) const { return {ids_[index], vector(index)}; }

  /// Columns for the given ids, in order.
  Eigen::MatrixXd gather(const std::vector<std::size_t>& indices) const;

 private:
  int dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Header `post_id,dim=D`, then one `id,v1,...,vD` row per vector.
FeatureSet read_features(std::istream& in);
FeatureSet load_features(const std::filesystem::path& path);
void write_features(std::ostream& out, const FeatureSet& features);

struct TrainConfig {
  double learning_rate = 1e-4;
  double l2_penalty = 1e-4;
  int batch_size = 64;
  int epochs = 50;
  double lr_decay_per_epoch = 0.95;
  std::uint64_t seed = 0;
  AdamHyper adam;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_metric = 0.0;  // pairwise accuracy for the ranker
  double learning_rate = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;
  MlpModel model;  // snapshot from the selected epoch
};

void write_train_report_csv(std::ostream& out, const TrainReport& report);

struct PairSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n) cut into validation, test and training parts.
PairSplit split_pairs(std::size_t n, double val_fraction, double test_fraction, std::uint64_t seed);

template <typename T>
std::vector<T> select(const std::vector<T>& items, const std::vector<std::size_t>& indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items.at(i));
  return out;
}

/// Default scorer shape: D -> 64 -> 32 -> 1.
std::vector<int> default_ranker_dims(int feature_dim);

/// Pairwise learning-to-rank with symmetric swap augmentation. Every epoch is
/// a seeded shuffle of `split.train`; the learning rate is multiplied by
/// `lr_decay_per_epoch` after each epoch and the snapshot with the best
/// validation accuracy (earliest on ties) is returned.
TrainReport train(const MlpModel& initial, const std::vector<Pdip>& pairs, const FeatureSet& features,
                  const PairSplit& split, const TrainConfig& config);

using ScoreMap = std::map<std::string, double>;

/// Throws std::invalid_argument naming the id of a mis-sized vector.
ScoreMap score_batch(const MlpModel& model, const FeatureSet& features);

/// Scores for the columns of `features`, in storage order.
Eigen::RowVectorXd score_all(const MlpModel& model, const FeatureSet& features);

// Checkpoints are plain text: a version tag, layer_dims, then per-layer
// row-major weights and biases with 17 significant digits.
void write_checkpoint(std::ostream& out, const MlpModel& model);
MlpModel read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_checkpoint(const std::filesystem::path& path);

namespace detail {
void write_mlp_block(std::ostream& out, const MlpModel& model);
MlpModel read_mlp_block(std::istream& in);
}  // namespace detail

}  // namespace ipop
