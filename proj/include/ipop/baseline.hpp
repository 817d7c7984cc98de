#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipop/eval.hpp"
#include "ipop/mlp.hpp"
#include "ipop/pdip.hpp"
#include "ipop/ranker.hpp"

namespace ipop {

/// Social and textual context of a post. Raw counts; the model sees ln(1 + x).
struct NonVisualFeatures {
  double followers = 0;
  double followings = 0;
  double n_posts = 0;
  double n_hashtags = 0;
  double n_mentions = 0;
  double caption_length = 0;

  static constexpr int kDim = 6;

  Eigen::Matrix<double, kDim, 1> transformed() const;
  bool operator==(const NonVisualFeatures&) const = default;
};

using NonVisualTable = std::map<std::string, NonVisualFeatures>;

/// Header post_id,followers,followings,n_posts,n_hashtags,n_mentions,caption_length.
NonVisualTable read_nonvisual(std::istream& in);
NonVisualTable load_nonvisual(const std::filesystem::path& path);
void write_nonvisual(std::ostream& out, const NonVisualTable& table);

/// Absolute-popularity regressor: a visual scorer reduces the image to one
/// scalar, which is concatenated with the six transformed non-visual counts
/// and fed to a 7-256-128-64-1 head.
struct AbsolutePopModel {
  MlpModel visual;
  MlpModel head;

  bool operator==(const AbsolutePopModel&) const = default;
};

inline const std::vector<int> kBaselineHeadDims = {1 + NonVisualFeatures::kDim, 256, 128, 64, 1};

AbsolutePopModel init_baseline(int feature_dim, std::uint64_t seed);
AbsolutePopModel init_baseline(const std::vector<int>& visual_dims, const std::vector<int>& head_dims,
                               std::uint64_t seed);

double baseline_forward(const AbsolutePopModel& model, const Eigen::Ref<const Eigen::VectorXd>& x_visual,
                        const NonVisualFeatures& nv);

/// `nonvisual` holds transformed counts, one column per sample.
Eigen::RowVectorXd baseline_forward_batch(const AbsolutePopModel& model, const Eigen::MatrixXd& visual,
                                          const Eigen::MatrixXd& nonvisual);

struct BaselineBatchResult {
  double mean_loss = 0.0;
  AbsolutePopModel grad;
};

/// MSE over the batch and its gradient through head and visual scorer.
BaselineBatchResult baseline_batch_grad(const AbsolutePopModel& model, const Eigen::MatrixXd& visual,
                                        const Eigen::MatrixXd& nonvisual, const Eigen::VectorXd& targets);

double mse_loss(std::span<const double> preds, std::span<const double> targets);

/// Sample Pearson correlation. Throws on fewer than two values or zero variance.
double pearson(std::span<const double> preds, std::span<const double> targets);

struct BaselineSample {
  std::string post_id;
  NonVisualFeatures nonvisual;
  double target = 0.0;  // ln(1 + likes)
};

struct BaselineReport {
  std::vector<EpochRecord> epochs;  // val_metric is validation MSE
  int selected_epoch = 0;
  AbsolutePopModel model;
};

/// Same schedule as the ranker (seeded shuffle, Adam with coupled L2,
/// per-epoch decay) with an MSE objective; keeps the lowest-validation-MSE
/// snapshot. `split` indexes `samples`; its test part is ignored.
BaselineReport train_baseline(const AbsolutePopModel& initial, const std::vector<BaselineSample>& samples,
                              const FeatureSet& features, const PairSplit& split, const TrainConfig& config);

void write_baseline_report_csv(std::ostream& out, const BaselineReport& report);

/// Predictions for every sample, in order.
std::vector<double> baseline_predict(const AbsolutePopModel& model, const std::vector<BaselineSample>& samples,
                                     const FeatureSet& features);

/// Ranks pairs with the full model while holding the non-visual input fixed:
/// both members of a pair are scored under the element-wise mean of their
/// transformed non-visual vectors, so only the image can separate them.
EvalResult eval_baseline_as_intrinsic(const AbsolutePopModel& model, const std::vector<Pdip>& pairs,
                                      const FeatureSet& features, const NonVisualTable& nonvisual);

void write_baseline_checkpoint(std::ostream& out, const AbsolutePopModel& model);
AbsolutePopModel read_baseline_checkpoint(std::istream& in);

}  // namespace ipop
