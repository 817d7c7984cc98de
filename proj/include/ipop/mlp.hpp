#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipop/rng.hpp"

namespace ipop {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

inline void validate_layer_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("layer_dims needs an input and an output size");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("layer_dims entries must be positive");
  if (dims.back() != 1) throw std::invalid_argument("the last layer must have a single output");
}

/// Fully connected scorer: ReLU on hidden layers, identity on the output.
/// `weights[l]` maps layer l (dims[l]) to layer l + 1 (dims[l + 1]).
///
/// The same type doubles as the container for gradients and optimizer moments,
/// since those share the parameter layout exactly.
template <typename Scalar>
struct Mlp {
  std::vector<int> dims;
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;

  static Mlp zeros(const std::vector<int>& layer_dims) {
    validate_layer_dims(layer_dims);
    Mlp m;
    m.dims = layer_dims;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
      m.weights.push_back(MatrixX<Scalar>::Zero(layer_dims[l + 1], layer_dims[l]));
      m.biases.push_back(VectorX<Scalar>::Zero(layer_dims[l + 1]));
    }
    return m;
  }

  Mlp zeros_like() const { return zeros(dims); }

  std::size_t num_layers() const { return weights.size(); }
  int input_dim() const { return dims.front(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  bool same_shape(const Mlp& other) const { return dims == other.dims; }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
  }

  /// Visits every parameter block of this and `others...` in a fixed order.
  template <typename F, typename... Others>
  void zip_blocks(F&& f, Others&... others) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      f(weights[l], others.weights[l]...);
      f(biases[l], others.biases[l]...);
    }
  }

  Scalar& parameter(std::size_t flat_index);
  Scalar parameter(std::size_t flat_index) const { return const_cast<Mlp*>(this)->parameter(flat_index); }

  Mlp& operator+=(const Mlp& o) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      weights[l] += o.weights[l];
      biases[l] += o.biases[l];
    }
    return *this;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> m;
    m.dims = dims;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      m.weights.push_back(weights[l].template cast<Other>());
      m.biases.push_back(biases[l].template cast<Other>());
    }
    return m;
  }

  bool operator==(const Mlp& o) const {
    if (dims != o.dims) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
    return true;
  }
};

/// Flat indexing walks layers in order, weights (column-major) before biases.
template <typename Scalar>
Scalar& Mlp<Scalar>::parameter(std::size_t i) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (i < static_cast<std::size_t>(weights[l].size())) return weights[l].data()[i];
    i -= weights[l].size();
    if (i < static_cast<std::size_t>(biases[l].size())) return biases[l].data()[i];
    i -= biases[l].size();
  }
  throw std::out_of_range("parameter index out of range");
}

/// He initialization: weights ~ N(0, 2 / fan_in), biases zero.
template <typename Scalar = double>
Mlp<Scalar> init_model(const std::vector<int>& dims, std::uint64_t seed) {
  Mlp<Scalar> m = Mlp<Scalar>::zeros(dims);
  Rng rng = Rng(seed).split("he-init");
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const double stddev = std::sqrt(2.0 / dims[l]);
    auto& w = m.weights[l];
    // Row-major fill so the draw order reads like the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(rng.normal(0.0, stddev));
  }
  return m;
}

/// Activations retained for backpropagation; `layers[0]` is the input batch,
/// `layers[l]` the post-ReLU output of hidden layer l, and the last entry the
/// linear output row.
template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> layers;
};

/// Scores each column of `inputs` (dims[0] x batch).
template <typename Scalar, typename Derived>
RowVectorX<Scalar> forward_batch(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& inputs,
                                 ForwardCache<Scalar>* cache = nullptr) {
  if (inputs.rows() != model.input_dim())
    throw std::invalid_argument("input dimension " + std::to_string(inputs.rows()) + " does not match model input " +
                                std::to_string(model.input_dim()));
  MatrixX<Scalar> a = inputs;
  if (cache) {
    cache->layers.clear();
    cache->layers.push_back(a);
  }
  const std::size_t n = model.num_layers();
  for (std::size_t l = 0; l < n; ++l) {
    MatrixX<Scalar> z = (model.weights[l] * a).colwise() + model.biases[l];
    if (l + 1 < n) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
    if (cache) cache->layers.push_back(a);
  }
  return a;
}

template <typename Scalar, typename Derived>
Scalar forward(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1) throw std::invalid_argument("forward expects a single column vector");
  return forward_batch(model, x)(0);
}

/// Backpropagates `upstream` (1 x batch, dLoss/dOutput per column) and returns
/// parameter gradients summed over the batch. If `input_grad` is given it
/// receives dLoss/dInput (dims[0] x batch).
template <typename Scalar>
Mlp<Scalar> backward_batch(const Mlp<Scalar>& model, const ForwardCache<Scalar>& cache,
                           const RowVectorX<Scalar>& upstream, MatrixX<Scalar>* input_grad = nullptr) {
  const std::size_t n = model.num_layers();
  if (cache.layers.size() != n + 1 || upstream.cols() != cache.layers.front().cols())
    throw std::invalid_argument("backward_batch: cache does not match model or upstream");
  Mlp<Scalar> grad = model.zeros_like();
  MatrixX<Scalar> delta = upstream;
  for (std::size_t l = n; l-- > 0;) {
    const MatrixX<Scalar>& a_in = cache.layers[l];
    grad.weights[l].noalias() = delta * a_in.transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l == 0 && !input_grad) break;
    MatrixX<Scalar> back = model.weights[l].transpose() * delta;
    if (l > 0) back.array() *= (a_in.array() > Scalar(0)).template cast<Scalar>();
    delta = std::move(back);
  }
  if (input_grad) *input_grad = std::move(delta);
  return grad;
}

/// exp(o) / (1 + exp(o)) without overflow.
template <typename Scalar>
Scalar pair_probability(Scalar o) {
  using std::exp;
  if (o >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-o));
  const Scalar e = exp(o);
  return e / (Scalar(1) + e);
}

/// Binary cross entropy of the logistic pair probability against `label`,
/// i.e. -label * o + ln(1 + exp(o)) evaluated stably.
template <typename Scalar>
Scalar pair_loss(Scalar o, Scalar label) {
  using std::abs;
  using std::exp;
  using std::log1p;
  const Scalar pos = o > Scalar(0) ? o : Scalar(0);
  return pos - label * o + log1p(exp(-abs(o)));
}

/// dLoss/dO.
template <typename Scalar>
Scalar pair_loss_grad(Scalar o, Scalar label) {
  return pair_probability(o) - label;
}

template <typename Scalar, typename DA, typename DB>
Scalar pair_logit(const Mlp<Scalar>& model, const Eigen::MatrixBase<DA>& x_a, const Eigen::MatrixBase<DB>& x_b) {
  return forward(model, x_a) - forward(model, x_b);
}

template <typename Scalar>
struct PairBatchResult {
  Scalar mean_loss = Scalar(0);
  Mlp<Scalar> grad;  // gradient of the mean loss
};

/// Mean pairwise loss and its gradient over a batch. Columns of `x_a` and
/// `x_b` are paired; both streams run through the same parameters in a single
/// stacked pass, so their contributions are summed in a fixed order.
template <typename Scalar, typename DA, typename DB>
PairBatchResult<Scalar> pair_batch_grad(const Mlp<Scalar>& model, const Eigen::MatrixBase<DA>& x_a,
                                        const Eigen::MatrixBase<DB>& x_b, const VectorX<Scalar>& labels) {
  const Eigen::Index batch = x_a.cols();
  if (batch == 0 || x_b.cols() != batch || labels.size() != batch || x_a.rows() != x_b.rows())
    throw std::invalid_argument("pair_batch_grad: mismatched batch shapes");
  MatrixX<Scalar> stacked(x_a.rows(), 2 * batch);
  stacked << x_a, x_b;
  ForwardCache<Scalar> cache;
  const RowVectorX<Scalar> q = forward_batch(model, stacked, &cache);

  RowVectorX<Scalar> upstream(2 * batch);
  PairBatchResult<Scalar> result;
  const Scalar inv = Scalar(1) / static_cast<Scalar>(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const Scalar o = q(i) - q(batch + i);
    result.mean_loss += pair_loss(o, labels(i));
    const Scalar g = pair_loss_grad(o, labels(i)) * inv;
    upstream(i) = g;
    upstream(batch + i) = -g;
  }
  result.mean_loss *= inv;
  result.grad = backward_batch(model, cache, upstream);
  return result;
}

/// Gradient of pair_loss(pair_logit(model, x_a, x_b), label) with respect to
/// every shared parameter.
template <typename Scalar, typename DA, typename DB>
Mlp<Scalar> pair_grad(const Mlp<Scalar>& model, const Eigen::MatrixBase<DA>& x_a, const Eigen::MatrixBase<DB>& x_b,
                      Scalar label) {
  if (x_a.cols() != 1 || x_b.cols() != 1) throw std::invalid_argument("pair_grad expects column vectors");
  VectorX<Scalar> labels(1);
  labels << label;
  return pair_batch_grad(model, x_a, x_b, labels).grad;
}

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct AdamState {
  Mlp<Scalar> m;
  Mlp<Scalar> v;
  std::int64_t step = 0;

  static AdamState for_model(const Mlp<Scalar>& model) { return {model.zeros_like(), model.zeros_like(), 0}; }
};

/// One Adam update with coupled L2: `l2_penalty * theta` is added to the
/// gradient before the moment estimates are updated.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, Mlp<Scalar>& model, const Mlp<Scalar>& grad, Scalar lr, Scalar l2_penalty,
               const AdamHyper& hyper = {}) {
  if (!model.same_shape(grad) || !model.same_shape(state.m) || !model.same_shape(state.v))
    throw std::invalid_argument("adam_step: shape mismatch between model, gradient and state");
  ++state.step;
  const Scalar b1 = static_cast<Scalar>(hyper.beta1);
  const Scalar b2 = static_cast<Scalar>(hyper.beta2);
  const Scalar eps = static_cast<Scalar>(hyper.eps);
  using std::pow;
  const Scalar c1 = Scalar(1) - pow(b1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - pow(b2, static_cast<Scalar>(state.step));
  model.zip_blocks(
      [&](auto& theta, auto& gi, auto& m, auto& v) {
        auto ga = (gi.array() + l2_penalty * theta.array()).eval();
        m.array() = b1 * m.array() + (Scalar(1) - b1) * ga;
        v.array() = b2 * v.array() + (Scalar(1) - b2) * ga.square();
        theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      },
      grad, state.m, state.v);
}

using MlpModel = Mlp<double>;

}  // namespace ipop
